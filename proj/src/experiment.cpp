#include "anthro/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "anthro/rng.hpp"

namespace anthro {

using json = nlohmann::json;

std::vector<int> FoldSplit::eval_indices(int fold) const {
  return {permutation.begin() + offsets[fold],
          permutation.begin() + offsets[fold + 1]};
}

std::vector<int> FoldSplit::train_indices(int fold) const {
  std::vector<int> out;
  out.reserve(permutation.size() -
              (offsets[fold + 1] - offsets[fold]));
  out.insert(out.end(), permutation.begin(),
             permutation.begin() + offsets[fold]);
  out.insert(out.end(), permutation.begin() + offsets[fold + 1],
             permutation.end());
  return out;
}

FoldSplit kfold_split(int n, int k, uint64_t seed) {
  if (k < 1) throw DataError("k must be >= 1");
  if (n < k) throw DataError("fewer instances than folds");
  FoldSplit split;
  split.k = k;
  split.seed = seed;
  split.permutation.resize(n);
  for (int i = 0; i < n; ++i) split.permutation[i] = i;
  std::mt19937_64 rng = seeded_stream(seed, 0x6b666f6c, 0);
  for (int i = n - 1; i > 0; --i) {  // Fisher-Yates, portable draws
    const auto j = static_cast<int>(uniform_index(rng, i + 1));
    std::swap(split.permutation[i], split.permutation[j]);
  }
  split.offsets.resize(k + 1, 0);
  const int base = n / k, extra = n % k;
  for (int f = 0; f < k; ++f)
    split.offsets[f + 1] = split.offsets[f] + base + (f < extra ? 1 : 0);
  return split;
}

void ResultsTensor::resize(int folds, int per_fold) {
  k = folds;
  a = per_fold;
  data.setZero(static_cast<Eigen::Index>(k) * a * 2 * kNumDims);
}

double& ResultsTensor::at(int fold, int inst, int which, int dim) {
  return data[((static_cast<Eigen::Index>(fold) * a + inst) * 2 + which) *
                  kNumDims +
              dim];
}

double ResultsTensor::at(int fold, int inst, int which, int dim) const {
  return data[((static_cast<Eigen::Index>(fold) * a + inst) * 2 + which) *
                  kNumDims +
              dim];
}

void ResultsTensor::validate() const {
  if (data.size() != static_cast<Eigen::Index>(k) * a * 2 * kNumDims)
    throw DataError("results tensor storage does not match its dims");
  if (!data.allFinite()) throw DataError("results tensor has non-finite values");
}

void save_results(const ResultsTensor& r, const std::string& bin_path,
                  const std::string& json_path,
                  const std::string& provenance_json) {
  r.validate();
  {
    std::ofstream os(bin_path, std::ios::binary);
    if (!os) throw Error("cannot write results blob: " + bin_path);
    os.write(reinterpret_cast<const char*>(r.data.data()),
             static_cast<std::streamsize>(r.data.size() * sizeof(double)));
    if (!os) throw Error("short write: " + bin_path);
  }
  json header = {{"dims", {r.k, r.a, 2, kNumDims}},
                 {"dtype", "float64"},
                 {"order", "row_major"},
                 {"axes", {"fold", "instance", "estimated_actual", "dim"}},
                 {"blob", bin_path.substr(bin_path.find_last_of('/') + 1)}};
  if (!provenance_json.empty())
    header["provenance"] = json::parse(provenance_json);
  std::ofstream os(json_path);
  if (!os) throw Error("cannot write results header: " + json_path);
  os << header.dump(2) << "\n";
}

ResultsTensor load_results(const std::string& json_path) {
  std::ifstream is(json_path);
  if (!is) throw ParseError("cannot open results header: " + json_path);
  json header;
  try {
    is >> header;
  } catch (const json::exception& e) {
    throw ParseError(json_path + ": " + e.what());
  }
  const auto dims = header.at("dims");
  if (dims.size() != 4 || dims[2].get<int>() != 2 ||
      dims[3].get<int>() != kNumDims)
    throw ParseError(json_path + ": unexpected results dims");
  ResultsTensor r;
  r.resize(dims[0].get<int>(), dims[1].get<int>());
  const std::string dir =
      json_path.find('/') == std::string::npos
          ? ""
          : json_path.substr(0, json_path.find_last_of('/') + 1);
  const std::string blob = dir + header.at("blob").get<std::string>();
  std::ifstream bs(blob, std::ios::binary);
  if (!bs) throw ParseError("cannot open results blob: " + blob);
  bs.read(reinterpret_cast<char*>(r.data.data()),
          static_cast<std::streamsize>(r.data.size() * sizeof(double)));
  if (bs.gcount() !=
      static_cast<std::streamsize>(r.data.size() * sizeof(double)))
    throw ParseError(blob + ": truncated results blob");
  r.validate();
  return r;
}

HbdVector mad(const ResultsTensor& r) {
  if (r.k < 1 || r.a < 1) throw DataError("empty results tensor");
  HbdVector out = HbdVector::Zero();
  for (int d = 0; d < kNumDims; ++d) {
    double fold_mean_sum = 0.0;
    for (int f = 0; f < r.k; ++f) {
      double s = 0.0;
      for (int i = 0; i < r.a; ++i)
        s += std::abs(r.at(f, i, ResultsTensor::kEstimated, d) -
                      r.at(f, i, ResultsTensor::kActual, d));
      fold_mean_sum += s / r.a;
    }
    out[d] = fold_mean_sum / r.k;
  }
  return out;
}

HbdVector rpe(const ResultsTensor& r) {
  if (r.k < 1 || r.a < 1) throw DataError("empty results tensor");
  HbdVector out = HbdVector::Zero();
  for (int d = 0; d < kNumDims; ++d) {
    double fold_mean_sum = 0.0;
    for (int f = 0; f < r.k; ++f) {
      double s = 0.0;
      for (int i = 0; i < r.a; ++i) {
        const double actual = r.at(f, i, ResultsTensor::kActual, d);
        if (actual == 0.0)
          throw DataError("rpe: zero actual value (division guard)");
        s += std::abs((r.at(f, i, ResultsTensor::kEstimated, d) - actual) /
                      actual);
      }
      fold_mean_sum += s / r.a;
    }
    out[d] = 100.0 * fold_mean_sum / r.k;
  }
  return out;
}

MetricsReport metrics_from_results(const ResultsTensor& r) {
  MetricsReport rep;
  rep.mad_mm = mad(r) * 1000.0;
  rep.rpe_pct = rpe(r);
  rep.amad_mm = rep.mad_mm.mean();
  rep.arpe_pct = rep.rpe_pct.mean();
  return rep;
}

std::string report_table(const MetricsReport& rep) {
  std::ostringstream os;
  os << std::left << std::setw(22) << "HBD" << std::right << std::setw(10)
     << "MAD(mm)" << std::setw(10) << "RPE(%)" << "\n";
  os << std::string(42, '-') << "\n";
  os << std::fixed << std::setprecision(2);
  for (int d = 0; d < kNumDims; ++d)
    os << std::left << std::setw(22) << dim_labels()[d] << std::right
       << std::setw(10) << rep.mad_mm[d] << std::setw(10) << rep.rpe_pct[d]
       << "\n";
  os << std::string(42, '-') << "\n";
  os << std::left << std::setw(22) << "AMAD" << std::right << std::setw(10)
     << rep.amad_mm << std::setw(10) << "" << "\n";
  os << std::left << std::setw(22) << "ARPE" << std::right << std::setw(10)
     << "" << std::setw(10) << rep.arpe_pct << "\n";
  return os.str();
}

std::string report_json(const MetricsReport& rep) {
  json j;
  for (int d = 0; d < kNumDims; ++d) {
    j["per_dimension"][dim_names()[d]] = {{"mad_mm", rep.mad_mm[d]},
                                          {"rpe_pct", rep.rpe_pct[d]}};
  }
  j["amad_mm"] = rep.amad_mm;
  j["arpe_pct"] = rep.arpe_pct;
  if (!rep.fold_amad_mm.empty()) j["fold_amad_mm"] = rep.fold_amad_mm;
  if (!rep.baseline_amad_mm.empty())
    j["baseline_amad_mm"] = rep.baseline_amad_mm;
  if (!rep.train_loss.empty()) j["train_loss"] = rep.train_loss;
  if (!rep.provenance_json.empty())
    j["provenance"] = json::parse(rep.provenance_json);
  return j.dump(2);
}

nn::Tensor<float> images_to_tensor(const std::vector<TrainItem>& items,
                                   const std::vector<int>& indices) {
  if (indices.empty()) throw DataError("empty batch");
  const int h = items[indices[0]].image.height;
  const int w = items[indices[0]].image.width;
  nn::Tensor<float> t({static_cast<Eigen::Index>(indices.size()), 1, h, w});
  float* dst = t.ptr();
  for (int idx : indices) {
    const auto& img = items[idx].image;
    if (img.height != h || img.width != w)
      throw DataError("inconsistent image sizes in dataset");
    for (size_t p = 0; p < img.pixels.size(); ++p)
      *dst++ = static_cast<float>(img.pixels[p]) / 255.0f;
  }
  return t;
}

namespace {

nn::Tensor<float> truths_to_tensor(const std::vector<TrainItem>& items,
                                   const std::vector<int>& indices) {
  nn::Tensor<float> t(
      {static_cast<Eigen::Index>(indices.size()), kNumDims});
  float* dst = t.ptr();
  for (int idx : indices)
    for (int d = 0; d < kNumDims; ++d)
      *dst++ = static_cast<float>(items[idx].truth[d]);
  return t;
}

}  // namespace

ResultsTensor evaluate_folds(const std::vector<TrainItem>& items,
                             const FoldSplit& split,
                             std::vector<nn::Network<float>>& models) {
  if (static_cast<int>(models.size()) != split.k)
    throw DataError("model count does not match the fold count");
  const int a = split.offsets[1] - split.offsets[0];
  for (int f = 0; f < split.k; ++f)
    if (split.offsets[f + 1] - split.offsets[f] != a)
      throw DataError("results tensor requires equal fold sizes");
  ResultsTensor results;
  results.resize(split.k, a);
  constexpr int kEvalBatch = 50;
  for (int f = 0; f < split.k; ++f) {
    const auto eval = split.eval_indices(f);
    for (size_t start = 0; start < eval.size(); start += kEvalBatch) {
      const std::vector<int> chunk(
          eval.begin() + start,
          eval.begin() + std::min(eval.size(), start + kEvalBatch));
      auto x = images_to_tensor(items, chunk);
      auto pred = models[f].forward(x, nn::Mode::kEval);
      for (size_t i = 0; i < chunk.size(); ++i)
        for (int d = 0; d < kNumDims; ++d) {
          const int inst = static_cast<int>(start + i);
          results.at(f, inst, ResultsTensor::kEstimated, d) =
              static_cast<double>(pred.data[i * kNumDims + d]);
          results.at(f, inst, ResultsTensor::kActual, d) =
              items[chunk[i]].truth[d];
        }
    }
  }
  results.validate();
  return results;
}

ExperimentOutput run_experiment(const std::vector<TrainItem>& items,
                                const nn::TrainConfig& tcfg, int k,
                                uint64_t seed, bool relu_bn_after_conv2,
                                std::ostream* log) {
  tcfg.validate();
  const int n = static_cast<int>(items.size());
  if (n == 0) throw DataError("empty dataset");
  if (n % k != 0)
    throw DataError("instance count must be divisible by k for the results tensor");
  for (const auto& item : items) validate_hbd(item.truth);

  nn::NetConfig ncfg;
  ncfg.in_h = items[0].image.height;
  ncfg.in_w = items[0].image.width;
  ncfg.hidden = tcfg.hidden;
  ncfg.relu_bn_after_conv2 = relu_bn_after_conv2;

  ExperimentOutput out;
  out.split = kfold_split(n, k, seed);

  for (int f = 0; f < k; ++f) {
    nn::Network<float> net(ncfg);
    net.init(seed + static_cast<uint64_t>(f));  // per-fold re-init
    auto velocity = net.zero_grads();
    const auto train = out.split.train_indices(f);

    std::vector<double> epoch_losses;
    for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
      std::vector<int> order = train;
      std::mt19937_64 rng =
          seeded_stream(seed, static_cast<uint64_t>(f) + 100,
                        static_cast<uint64_t>(epoch));
      for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
        const auto j = static_cast<int>(uniform_index(rng, i + 1));
        std::swap(order[i], order[j]);
      }
      double loss_sum = 0.0;
      for (size_t start = 0; start < order.size();
           start += tcfg.batch_size) {
        const std::vector<int> batch(
            order.begin() + start,
            order.begin() +
                std::min(order.size(), start + tcfg.batch_size));
        auto x = images_to_tensor(items, batch);
        auto y = truths_to_tensor(items, batch);
        nn::Network<float>::Cache cache;
        auto pred = net.forward(x, nn::Mode::kTrain, &cache);
        auto [loss, dpred] = nn::mse_loss(pred, y);
        auto grads = net.backward(cache, dpred);
        nn::sgd_momentum_step(net.params, grads, velocity, tcfg.lr,
                              tcfg.momentum);
        loss_sum += loss * static_cast<double>(batch.size());
      }
      epoch_losses.push_back(loss_sum / static_cast<double>(train.size()));
      if (log)
        *log << "fold " << f << " epoch " << epoch << " loss "
             << epoch_losses.back() << "\n";
    }
    out.report.train_loss.push_back(std::move(epoch_losses));
    out.fold_models.push_back(std::move(net));
  }

  out.results = evaluate_folds(items, out.split, out.fold_models);

  // metrics + per-fold diagnostics
  const MetricsReport m = metrics_from_results(out.results);
  out.report.mad_mm = m.mad_mm;
  out.report.rpe_pct = m.rpe_pct;
  out.report.amad_mm = m.amad_mm;
  out.report.arpe_pct = m.arpe_pct;
  for (int f = 0; f < k; ++f) {
    double fold_sum = 0.0;
    for (int d = 0; d < kNumDims; ++d) {
      double s = 0.0;
      for (int i = 0; i < out.results.a; ++i)
        s += std::abs(out.results.at(f, i, ResultsTensor::kEstimated, d) -
                      out.results.at(f, i, ResultsTensor::kActual, d));
      fold_sum += s / out.results.a;
    }
    out.report.fold_amad_mm.push_back(1000.0 * fold_sum / kNumDims);

    // predict-the-training-mean baseline
    const auto train = out.split.train_indices(f);
    HbdVector mean = HbdVector::Zero();
    for (int idx : train) mean += items[idx].truth;
    mean /= static_cast<double>(train.size());
    double base_sum = 0.0;
    for (int d = 0; d < kNumDims; ++d) {
      double s = 0.0;
      for (int i = 0; i < out.results.a; ++i)
        s += std::abs(mean[d] -
                      out.results.at(f, i, ResultsTensor::kActual, d));
      base_sum += s / out.results.a;
    }
    out.report.baseline_amad_mm.push_back(1000.0 * base_sum / kNumDims);
  }
  return out;
}

}  // namespace anthro
