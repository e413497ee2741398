#pragma once

// Umbrella header for the online sparse + low-rank decomposition library.

#include "osdec/clustering.hpp"
#include "osdec/errors.hpp"
#include "osdec/experiment.hpp"
#include "osdec/io.hpp"
#include "osdec/linalg.hpp"
#include "osdec/parallel.hpp"
#include "osdec/pcp.hpp"
#include "osdec/prox.hpp"
#include "osdec/rng.hpp"
#include "osdec/solver.hpp"
#include "osdec/synth.hpp"
#include "osdec/weights.hpp"
