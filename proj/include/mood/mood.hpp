#pragma once

// Umbrella header for the whole library.

#include "mood/baselines.hpp"
#include "mood/classify.hpp"
#include "mood/cluster.hpp"
#include "mood/common.hpp"
#include "mood/corpus.hpp"
#include "mood/eval.hpp"
#include "mood/experiment.hpp"
#include "mood/features.hpp"
#include "mood/gaussian.hpp"
#include "mood/manifold.hpp"
#include "mood/model_io.hpp"
#include "mood/porter.hpp"
#include "mood/ridge.hpp"
#include "mood/sentiment.hpp"
#include "mood/synthetic.hpp"
