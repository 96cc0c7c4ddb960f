#pragma once

#include <array>

namespace quadsim {

/// The four controlled channels, in the order the error variables are built.
enum class Channel { kPhi = 0, kTheta = 1, kPsi = 2, kZ = 3 };

/// Desired value with its first two time derivatives for one channel.
struct ChannelReference {
  double value = 0.0;
  double rate = 0.0;
  double accel = 0.0;
};

/// References for the four controlled channels plus the desired x/y motion
/// driving the outer position loop (and the logs).
struct FullReference {
  std::array<ChannelReference, 4> channels{};  // phi, theta, psi, z
  ChannelReference x{};
  ChannelReference y{};

  ChannelReference& operator[](Channel c) {
    return channels[static_cast<int>(c)];
  }
  const ChannelReference& operator[](Channel c) const {
    return channels[static_cast<int>(c)];
  }
};

}  // namespace quadsim
