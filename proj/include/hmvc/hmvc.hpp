#pragma once

// Umbrella header: high-order multi-view clustering, the anchor-based
// scalable variant, and the surrounding data/evaluation toolkit.

#include "hmvc/anchor.hpp"
#include "hmvc/clustering.hpp"
#include "hmvc/dataset.hpp"
#include "hmvc/errors.hpp"
#include "hmvc/graph_filter.hpp"
#include "hmvc/harness.hpp"
#include "hmvc/highorder.hpp"
#include "hmvc/learner.hpp"
#include "hmvc/matrix_io.hpp"
#include "hmvc/simplex_qp.hpp"
#include "hmvc/types.hpp"
