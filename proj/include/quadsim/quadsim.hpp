#pragma once

#include "quadsim/analysis.hpp"
#include "quadsim/backstepping.hpp"
#include "quadsim/dynamics.hpp"
#include "quadsim/errors.hpp"
#include "quadsim/guidance.hpp"
#include "quadsim/pid.hpp"
#include "quadsim/reference.hpp"
#include "quadsim/scenario_io.hpp"
#include "quadsim/simulation.hpp"
#include "quadsim/svg_plot.hpp"
#include "quadsim/trace_io.hpp"
