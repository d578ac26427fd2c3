#pragma once

#include "lockstep/core/digest.hpp"
#include "lockstep/core/game_rules.hpp"
#include "lockstep/core/log.hpp"
#include "lockstep/core/smoothing.hpp"
#include "lockstep/core/state_cache.hpp"
#include "lockstep/core/types.hpp"
#include "lockstep/det/det_math.hpp"
#include "lockstep/det/det_rng.hpp"
#include "lockstep/error.hpp"
