#pragma once

// Umbrella header: frequency-separation estimation for two-emitter
// Hong-Ou-Mandel coincidence histograms via singular spectrum analysis,
// plus simulation, least-squares baseline, Fisher information, and
// Monte Carlo study harness.

#include "ssafreq/errors.hpp"
#include "ssafreq/fisher.hpp"
#include "ssafreq/fit.hpp"
#include "ssafreq/io.hpp"
#include "ssafreq/model.hpp"
#include "ssafreq/params.hpp"
#include "ssafreq/rng.hpp"
#include "ssafreq/spectral.hpp"
#include "ssafreq/ssa.hpp"
#include "ssafreq/studies.hpp"
