#pragma once

#include "rssiloc/core.hpp"
#include "rssiloc/ensemble.hpp"
#include "rssiloc/error.hpp"
#include "rssiloc/eval.hpp"
#include "rssiloc/filters.hpp"
#include "rssiloc/ingest.hpp"
#include "rssiloc/learners/dataset.hpp"
#include "rssiloc/learners/forest.hpp"
#include "rssiloc/learners/knn.hpp"
#include "rssiloc/learners/linear.hpp"
#include "rssiloc/learners/mlp.hpp"
#include "rssiloc/learners/tree.hpp"
#include "rssiloc/model_io.hpp"
#include "rssiloc/parallel.hpp"
#include "rssiloc/radio.hpp"
#include "rssiloc/report.hpp"
#include "rssiloc/rng.hpp"
#include "rssiloc/solvers.hpp"
