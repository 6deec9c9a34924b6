#pragma once

#include "aoma/model.hpp"
#include "aoma/policy.hpp"
#include "aoma/distribution.hpp"
#include "aoma/analytic.hpp"
#include "aoma/mdp.hpp"
#include "aoma/oracle.hpp"
#include "aoma/search.hpp"
#include "aoma/simulator.hpp"
#include "aoma/experiments.hpp"
