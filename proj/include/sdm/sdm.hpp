#pragma once

#include "sdm/bandits.hpp"
#include "sdm/error.hpp"
#include "sdm/experiment.hpp"
#include "sdm/instances.hpp"
#include "sdm/io.hpp"
#include "sdm/linear_control.hpp"
#include "sdm/mdp.hpp"
#include "sdm/mdp_learning.hpp"
#include "sdm/mpc.hpp"
#include "sdm/policy_search.hpp"
#include "sdm/rng.hpp"
#include "sdm/stats.hpp"
