#ifndef VODSIM_VODSIM_HPP
#define VODSIM_VODSIM_HPP

// Umbrella header: analytic teletraffic formulas, the partitioned-server
// discrete-event engine, metrics, configuration, and experiment presets.

#include "vodsim/analytic.hpp"
#include "vodsim/config.hpp"
#include "vodsim/engine.hpp"
#include "vodsim/experiment.hpp"
#include "vodsim/metrics.hpp"
#include "vodsim/partition.hpp"
#include "vodsim/popularity.hpp"
#include "vodsim/presets.hpp"
#include "vodsim/rng.hpp"
#include "vodsim/stats.hpp"
#include "vodsim/traffic.hpp"

#endif  // VODSIM_VODSIM_HPP
