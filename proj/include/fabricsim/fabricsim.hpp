#pragma once

#include "fabricsim/expansion.hpp"
#include "fabricsim/experiments.hpp"
#include "fabricsim/rational.hpp"
#include "fabricsim/resilience.hpp"
#include "fabricsim/rng.hpp"
#include "fabricsim/routing.hpp"
#include "fabricsim/simulate.hpp"
#include "fabricsim/topology.hpp"
#include "fabricsim/traffic.hpp"
