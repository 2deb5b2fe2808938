#pragma once

// Umbrella header for the minority-game reserve-arbitrage toolkit.

#include "mg/config_io.hpp"
#include "mg/core.hpp"
#include "mg/engine.hpp"
#include "mg/equilibrium.hpp"
#include "mg/harness.hpp"
#include "mg/intraday.hpp"
#include "mg/presets.hpp"
#include "mg/price.hpp"
#include "mg/report_io.hpp"
#include "mg/rng.hpp"
#include "mg/stats.hpp"
