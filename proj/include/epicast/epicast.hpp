#pragma once

// Umbrella header for the whole library.

#include "epicast/autodiff.hpp"
#include "epicast/baselines.hpp"
#include "epicast/common.hpp"
#include "epicast/config.hpp"
#include "epicast/csv.hpp"
#include "epicast/dataset.hpp"
#include "epicast/encoders.hpp"
#include "epicast/metrics.hpp"
#include "epicast/model.hpp"
#include "epicast/pipeline.hpp"
#include "epicast/policy_catalog.hpp"
#include "epicast/rng.hpp"
#include "epicast/state_names.hpp"
#include "epicast/svg.hpp"
#include "epicast/synthetic.hpp"
#include "epicast/targets.hpp"
#include "epicast/textualizer.hpp"
#include "epicast/train.hpp"
#include "epicast/types.hpp"
#include "epicast/vocab.hpp"
