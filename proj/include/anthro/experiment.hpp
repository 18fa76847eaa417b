// Dataset splitting, k-fold training/evaluation, MAD/RPE metrics and report
// generation. Metrics are always computed in 64-bit regardless of the
// training scalar.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "anthro/nn.hpp"
#include "anthro/render.hpp"
#include "anthro/types.hpp"

namespace anthro {

// Seeded shuffle of [0, n), then a contiguous partition into k eval folds
// whose sizes differ by at most one (the first n % k folds get the extra).
struct FoldSplit {
  int k = 0;
  uint64_t seed = 0;
  std::vector<int> permutation;
  std::vector<int> offsets;  // k + 1 boundaries into `permutation`

  std::vector<int> eval_indices(int fold) const;
  std::vector<int> train_indices(int fold) const;  // other folds, in order
};

FoldSplit kfold_split(int n, int k, uint64_t seed);

// k x a x 2 x 8 store of (estimated, actual) dimensions, meters, row-major.
struct ResultsTensor {
  static constexpr int kEstimated = 0;
  static constexpr int kActual = 1;

  int k = 0;
  int a = 0;  // instances per fold
  Eigen::VectorXd data;

  void resize(int folds, int per_fold);
  double& at(int fold, int inst, int which, int dim);
  double at(int fold, int inst, int which, int dim) const;
  void validate() const;  // shape and finiteness
};

// Shape-tagged persistence: raw little-endian doubles alongside a JSON
// header naming the blob file, dims and provenance.
void save_results(const ResultsTensor& r, const std::string& bin_path,
                  const std::string& json_path,
                  const std::string& provenance_json);
ResultsTensor load_results(const std::string& json_path);

// Per-dimension mean absolute difference (meters): per-fold mean of
// |estimated - actual|, then mean over folds.
HbdVector mad(const ResultsTensor& r);
// Per-dimension relative percentage error: per-fold mean of
// |(estimated - actual) / actual|, then mean over folds, times 100.
HbdVector rpe(const ResultsTensor& r);

struct MetricsReport {
  HbdVector mad_mm = HbdVector::Zero();
  HbdVector rpe_pct = HbdVector::Zero();
  double amad_mm = 0.0;
  double arpe_pct = 0.0;
  // desk-scale diagnostics
  std::vector<double> fold_amad_mm;
  std::vector<double> baseline_amad_mm;              // predict-train-mean
  std::vector<std::vector<double>> train_loss;       // [fold][epoch]
  std::string provenance_json;
};

MetricsReport metrics_from_results(const ResultsTensor& r);

// Aligned text table: one row per dimension (MAD mm, RPE %), then AMAD and
// ARPE rows.
std::string report_table(const MetricsReport& report);
std::string report_json(const MetricsReport& report);

// ---------------------------------------------------------------------------
// end-to-end experiment

struct TrainItem {
  std::string id;
  GrayImage image;
  HbdVector truth = HbdVector::Zero();
};

struct ExperimentOutput {
  FoldSplit split;
  ResultsTensor results;
  MetricsReport report;
  std::vector<nn::Network<float>> fold_models;
};

// Trains one model per fold (reinitialized from seed + fold index), fills
// the results tensor from each fold's eval split and assembles the report.
// The item count must be divisible by k so the tensor is rectangular.
ExperimentOutput run_experiment(const std::vector<TrainItem>& items,
                                const nn::TrainConfig& tcfg, int k,
                                uint64_t seed,
                                bool relu_bn_after_conv2 = false,
                                std::ostream* log = nullptr);

// Eval-only pass with existing per-fold models (checkpoint workflows).
ResultsTensor evaluate_folds(const std::vector<TrainItem>& items,
                             const FoldSplit& split,
                             std::vector<nn::Network<float>>& models);

// Pixel intensities scaled to [0, 1].
nn::Tensor<float> images_to_tensor(const std::vector<TrainItem>& items,
                                   const std::vector<int>& indices);

}  // namespace anthro
