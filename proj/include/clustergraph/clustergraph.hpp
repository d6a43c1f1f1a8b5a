#pragma once

// Umbrella header.

#include "clustergraph/clustering.hpp"
#include "clustergraph/distortion.hpp"
#include "clustergraph/error.hpp"
#include "clustergraph/geodesics.hpp"
#include "clustergraph/graph_build.hpp"
#include "clustergraph/io.hpp"
#include "clustergraph/kmeans.hpp"
#include "clustergraph/metrics.hpp"
#include "clustergraph/model.hpp"
#include "clustergraph/parallel.hpp"
#include "clustergraph/pipeline.hpp"
#include "clustergraph/point_cloud.hpp"
#include "clustergraph/pruning.hpp"
#include "clustergraph/random.hpp"
#include "clustergraph/stability.hpp"
#include "clustergraph/transport.hpp"
