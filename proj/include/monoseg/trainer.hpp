#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "monoseg/correction.hpp"
#include "monoseg/io.hpp"
#include "monoseg/losses.hpp"
#include "monoseg/metrics.hpp"
#include "monoseg/model.hpp"
#include "monoseg/noise.hpp"

namespace monoseg {

struct TrainConfig {
  int epochs = 50;
  int batch_size = 16;
  LossMode mode = LossMode::MC;
  bool lc_enabled = false;
  CorrectionConfig correction;  // tau 0.7, every 10 epochs, lambda0 0.2
  NoiseParams noise;            // sigma > 0 re-perturbs the clean boxes;
                                // sigma == 0 uses the manifest's noisy boxes
  std::uint64_t seed = 0;
  bool mc_normalized = true;
  double cc_weight = 1.0;
  double mc_weight = 1.0;
  double learning_rate = 1e-2;  // see README on the departure from 1e-4
  double weight_decay = 1e-4;
  double eval_threshold = 0.5;
  // SGD rate for the per-image score offsets (train-time only; evaluation
  // always runs at offset zero). Lets predictions track per-image annotation
  // noise so that correction-time IoU matching actually fires; 0 disables.
  double image_bias_lr = 1.0;

  void validate() const;
};

// Strict flat JSON with a schema_version field; unknown keys are errors and
// every field falls back to its default when absent.
TrainConfig train_config_from_json_text(const std::string& text);
TrainConfig load_train_config(const std::filesystem::path& path);
std::string train_config_to_json_text(const TrainConfig& cfg);

struct LoadedImage {
  std::string image_id;
  Image image;
  FeatureStack features;
  BinaryMask gt_mask;
  std::vector<Box> clean_boxes;
  std::vector<Box> boxes;  // current training labels
};

struct LoadedDataset {
  int height = 0;
  int width = 0;
  std::vector<LoadedImage> images;
};

LoadedDataset load_dataset(const Manifest& manifest);

struct StepStats {
  int step = 0;  // global optimizer step, 1-based
  LossBreakdown loss;
};

struct EpochStats {
  int epoch = 0;  // 1-based
  LossBreakdown mean_loss;
  double label_accuracy = 0.0;  // vs clean boxes, after any correction
  double lambda = 0.0;          // value in effect at epoch end
};

struct RunReport {
  std::vector<StepStats> steps;
  std::vector<EpochStats> epochs;
  std::vector<CorrectionEvent> events;
  ModelParams final_params;
  std::vector<double> image_biases;  // final per-image offsets, dataset order
};

// One full deterministic training run; labels in `data` mutate when
// correction is enabled.
RunReport train(const TrainConfig& cfg, LoadedDataset& data);

std::vector<EvalRow> evaluate(const ModelParams& params,
                              const LoadedDataset& data,
                              double threshold = 0.5,
                              double hd_percentile = 1.0);

// Run-directory artifacts.
void write_steps_csv(const std::filesystem::path& path, const RunReport& r,
                     LossMode mode);
void write_epochs_csv(const std::filesystem::path& path, const RunReport& r,
                      LossMode mode);
void write_events_jsonl(const std::filesystem::path& path, const RunReport& r);
void write_eval_csv(const std::filesystem::path& path,
                    const std::vector<EvalRow>& rows);

}  // namespace monoseg
