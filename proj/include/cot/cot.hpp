#pragma once

// Umbrella header: cloud-optical-thickness regression from multispectral
// TOA reflectance — synthetic data generation, MLP training, weak-label
// fine-tuning, raster inference and evaluation.

#include "cot/error.hpp"
#include "cot/features.hpp"
#include "cot/inference.hpp"
#include "cot/io.hpp"
#include "cot/metrics.hpp"
#include "cot/mlp.hpp"
#include "cot/rng.hpp"
#include "cot/surrogate.hpp"
#include "cot/types.hpp"
#include "cot/weak_labels.hpp"
