#pragma once

#include "sicn/bgp/mrt.hpp"
#include "sicn/bgp/text_format.hpp"
#include "sicn/bgp/types.hpp"
#include "sicn/error.hpp"
#include "sicn/experiment/config.hpp"
#include "sicn/experiment/stages.hpp"
#include "sicn/features/dataset_csv.hpp"
#include "sicn/features/extract.hpp"
#include "sicn/features/feature_vector.hpp"
#include "sicn/features/labels.hpp"
#include "sicn/features/window.hpp"
#include "sicn/hierarchy/compare.hpp"
#include "sicn/hierarchy/flat.hpp"
#include "sicn/hierarchy/localize.hpp"
#include "sicn/hierarchy/pipeline.hpp"
#include "sicn/learn/boosting.hpp"
#include "sicn/learn/dataset.hpp"
#include "sicn/learn/forest.hpp"
#include "sicn/learn/knn.hpp"
#include "sicn/learn/logistic.hpp"
#include "sicn/learn/metrics.hpp"
#include "sicn/learn/model.hpp"
#include "sicn/learn/naive_bayes.hpp"
#include "sicn/learn/scaler.hpp"
#include "sicn/learn/split.hpp"
#include "sicn/learn/tree.hpp"
#include "sicn/mitigate/plan.hpp"
#include "sicn/rng.hpp"
#include "sicn/sim/generator.hpp"
#include "sicn/sim/routing.hpp"
#include "sicn/sim/scenario.hpp"
#include "sicn/sim/topology.hpp"
