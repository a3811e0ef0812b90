#pragma once

#include "gridpt/condition.hpp"
#include "gridpt/error.hpp"
#include "gridpt/harness.hpp"
#include "gridpt/io.hpp"
#include "gridpt/linalg.hpp"
#include "gridpt/metrics.hpp"
#include "gridpt/network.hpp"
#include "gridpt/phase.hpp"
#include "gridpt/random_network.hpp"
#include "gridpt/recover.hpp"
#include "gridpt/rng.hpp"
#include "gridpt/simulate.hpp"
#include "gridpt/stats.hpp"
#include "gridpt/system_matrices.hpp"
