#pragma once

// Umbrella header.

#include "analysis.hpp"
#include "balance.hpp"
#include "error.hpp"
#include "forage_game.hpp"
#include "generator.hpp"
#include "io.hpp"
#include "level.hpp"
#include "optimizer.hpp"
#include "parallel.hpp"
#include "policy.hpp"
#include "rng.hpp"
#include "swap_env.hpp"

namespace forage {
inline constexpr const char* kVersion = "0.1.0";
}
