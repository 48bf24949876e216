#pragma once

#include "safetune/action_grid.hpp"
#include "safetune/cbf.hpp"
#include "safetune/config.hpp"
#include "safetune/headless.hpp"
#include "safetune/http_api.hpp"
#include "safetune/learner.hpp"
#include "safetune/random.hpp"
#include "safetune/rollouts.hpp"
#include "safetune/session.hpp"
#include "safetune/socp.hpp"
#include "safetune/storage.hpp"
#include "safetune/synthetic_oracle.hpp"
#include "safetune/unicycle_sim.hpp"
#include "safetune/utility_model.hpp"
