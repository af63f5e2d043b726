#pragma once

#include <string>

#include "wordseg/model_io.hpp"
#include "wordseg/training.hpp"

namespace wordseg {

struct PipelineResult {
  ModelBundle bundle;
  TrainReport report;
};

// Load a segmented corpus, hold out the dev tail, train with the configured
// strategy, and package the best-dev model. Empty paths disable the optional
// inputs/outputs. When report_path is set, one JSON record per epoch is
// appended to it as training progresses.
PipelineResult train_pipeline(const TrainConfig& cfg, const std::string& train_path,
                              const std::string& pretrained_path = {},
                              const std::string& report_path = {},
                              const EpochCallback& on_epoch = nullptr);

}  // namespace wordseg
