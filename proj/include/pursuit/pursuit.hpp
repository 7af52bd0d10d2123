#pragma once

#include "pursuit/baselines.hpp"
#include "pursuit/bench.hpp"
#include "pursuit/cluster_pursuit.hpp"
#include "pursuit/cocluster.hpp"
#include "pursuit/core.hpp"
#include "pursuit/diagnostics.hpp"
#include "pursuit/graph.hpp"
#include "pursuit/io.hpp"
#include "pursuit/laplacian.hpp"
#include "pursuit/linalg.hpp"
#include "pursuit/operator.hpp"
#include "pursuit/partition.hpp"
#include "pursuit/pipeline.hpp"
#include "pursuit/points.hpp"
#include "pursuit/random_graphs.hpp"
#include "pursuit/rng.hpp"
#include "pursuit/solvers.hpp"
