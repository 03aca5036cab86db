#pragma once

#include <string>
#include <vector>

#include "mvclab/training.hpp"

namespace mvclab::train {

/// Resolves a named preset. Published presets carry the per-dataset
/// hyperparameters verbatim, keyed by (variant, complete|incomplete) where
/// they differ; `desk` and `desk-mv` are the small-scale defaults.
TrainConfig make_preset(const std::string& name, BiviewVariant variant, bool incomplete);

std::vector<std::string> preset_names();

}  // namespace mvclab::train
