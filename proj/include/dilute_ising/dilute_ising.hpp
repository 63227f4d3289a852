#pragma once

// Umbrella header.

#include "disorder.hpp"
#include "expansion.hpp"
#include "gibbs.hpp"
#include "graph.hpp"
#include "logsum.hpp"
#include "mcmc.hpp"
#include "meanfield.hpp"
#include "measure.hpp"
#include "rng.hpp"
#include "stats.hpp"
