#pragma once

// Threshold stumps over single difference components. The threshold of
// feature j is the midpoint of the unweighted intra and extra class means
// and stays fixed for the whole boosting run; only the polarity is chosen
// under the current weights.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gaborboost/error.hpp"
#include "gaborboost/pairs.hpp"

namespace gaborboost {

struct WeakClassifier {
  std::size_t feature_index = 0;
  double threshold = 0.0;
  int polarity = +1;

  bool operator==(const WeakClassifier&) const = default;
};

using WeightVector = std::vector<double>;

struct ScoredStump {
  WeakClassifier stump;
  double error = 0.0;
};

/// Midpoint of the intra-class and extra-class means of component j.
inline double threshold_from_means(const TrainingSet& set, std::size_t j) {
  double intra_sum = 0.0;
  double extra_sum = 0.0;
  std::size_t m = 0;
  std::size_t l = 0;
  for (const auto& s : set.samples) {
    const double x = component(s, j);
    if (s.label == kIntra) {
      intra_sum += x;
      ++m;
    } else {
      extra_sum += x;
      ++l;
    }
  }
  if (m == 0) throw ParameterError("no intra-person samples");
  if (l == 0) throw ParameterError("no extra-person samples");
  return 0.5 * (intra_sum / static_cast<double>(m) +
                extra_sum / static_cast<double>(l));
}

/// -1 below the threshold, +1 at or above it, times the polarity.
inline int classify(const WeakClassifier& h, std::span<const double> values) {
  if (h.feature_index >= values.size())
    throw ParameterError("stump feature index " +
                         std::to_string(h.feature_index) +
                         " exceeds sample dimension");
  const int raw = values[h.feature_index] < h.threshold ? -1 : +1;
  return h.polarity * raw;
}

inline void check_weights(const TrainingSet& set, std::span<const double> w) {
  if (w.size() != set.size())
    throw ParameterError("weight vector length " + std::to_string(w.size()) +
                         " does not match " + std::to_string(set.size()) +
                         " samples");
}

inline double weighted_error(const WeakClassifier& h, const TrainingSet& set,
                             std::span<const double> w) {
  check_weights(set, w);
  double err = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i)
    if (classify(h, set.samples[i].values) != set.samples[i].label)
      err += w[i];
  return err;
}

/// Thresholds and raw (+1 polarity) outputs of every stump on every sample,
/// stored feature-major. Built once per training run.
class StumpTable {
 public:
  explicit StumpTable(const TrainingSet& set)
      : num_samples_(set.size()), num_features_(set.dimension()) {
    set.validate();
    labels_.reserve(num_samples_);
    for (const auto& s : set.samples)
      labels_.push_back(static_cast<std::int8_t>(s.label));
    thresholds_.resize(num_features_);
    raw_.resize(num_features_ * num_samples_);
    for (std::size_t j = 0; j < num_features_; ++j) {
      const double t = threshold_from_means(set, j);
      thresholds_[j] = t;
      std::int8_t* row = raw_.data() + j * num_samples_;
      for (std::size_t i = 0; i < num_samples_; ++i)
        row[i] = set.samples[i].values[j] < t ? -1 : +1;
    }
  }

  std::size_t num_samples() const { return num_samples_; }
  std::size_t num_features() const { return num_features_; }
  double threshold(std::size_t j) const { return thresholds_[j]; }
  std::span<const std::int8_t> labels() const { return labels_; }
  std::span<const std::int8_t> raw(std::size_t j) const {
    return {raw_.data() + j * num_samples_, num_samples_};
  }

  WeakClassifier stump(std::size_t j, int polarity) const {
    return {j, thresholds_[j], polarity};
  }

  /// Outputs of stump (j, polarity) over the training samples.
  std::vector<std::int8_t> responses(std::size_t j, int polarity) const {
    const auto r = raw(j);
    std::vector<std::int8_t> out(r.begin(), r.end());
    if (polarity < 0)
      for (auto& v : out) v = static_cast<std::int8_t>(-v);
    return out;
  }

 private:
  std::size_t num_samples_;
  std::size_t num_features_;
  std::vector<std::int8_t> labels_;
  std::vector<double> thresholds_;
  std::vector<std::int8_t> raw_;
};

/// Weighted error of both polarities for every feature.
struct StumpErrors {
  std::vector<double> positive;
  std::vector<double> negative;
};

inline StumpErrors compute_stump_errors(const StumpTable& table,
                                        std::span<const double> w) {
  if (w.size() != table.num_samples())
    throw ParameterError("weight vector length does not match samples");
  const auto labels = table.labels();
  StumpErrors e;
  e.positive.resize(table.num_features());
  e.negative.resize(table.num_features());
  for (std::size_t j = 0; j < table.num_features(); ++j) {
    const auto raw = table.raw(j);
    double pos = 0.0;
    double neg = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != labels[i])
        pos += w[i];
      else
        neg += w[i];
    }
    e.positive[j] = pos;
    e.negative[j] = neg;
  }
  return e;
}

namespace detail {

// Strict weak order on (error, feature index, polarity +1 first).
inline bool stump_before(double ea, std::size_t ja, int pa, double eb,
                         std::size_t jb, int pb) {
  if (ea != eb) return ea < eb;
  if (ja != jb) return ja < jb;
  return pa > pb;
}

}  // namespace detail

/// Lowest-error admissible stump, or nullopt if every feature is excluded.
inline std::optional<ScoredStump> argmin_stump(
    const StumpTable& table, const StumpErrors& errors,
    std::span<const std::uint8_t> excluded) {
  std::optional<ScoredStump> best;
  for (std::size_t j = 0; j < table.num_features(); ++j) {
    if (!excluded.empty() && excluded[j]) continue;
    for (int pol : {+1, -1}) {
      const double e = pol > 0 ? errors.positive[j] : errors.negative[j];
      if (!best || detail::stump_before(e, j, pol, best->error,
                                        best->stump.feature_index,
                                        best->stump.polarity))
        best = ScoredStump{table.stump(j, pol), e};
    }
  }
  return best;
}

/// Every admissible (feature, polarity) in ascending error order.
inline std::vector<ScoredStump> ranked_stumps(
    const StumpTable& table, const StumpErrors& errors,
    std::span<const std::uint8_t> excluded) {
  std::vector<ScoredStump> out;
  out.reserve(2 * table.num_features());
  for (std::size_t j = 0; j < table.num_features(); ++j) {
    if (!excluded.empty() && excluded[j]) continue;
    out.push_back({table.stump(j, +1), errors.positive[j]});
    out.push_back({table.stump(j, -1), errors.negative[j]});
  }
  std::sort(out.begin(), out.end(),
            [](const ScoredStump& a, const ScoredStump& b) {
              return detail::stump_before(a.error, a.stump.feature_index,
                                          a.stump.polarity, b.error,
                                          b.stump.feature_index,
                                          b.stump.polarity);
            });
  return out;
}

/// Exhaustive search over non-excluded features and both polarities.
/// Ties go to the smaller feature index, then polarity +1.
inline ScoredStump best_weak(const TrainingSet& set, std::span<const double> w,
                             const std::vector<std::size_t>& exclude = {}) {
  check_weights(set, w);
  const StumpTable table(set);
  std::vector<std::uint8_t> mask(table.num_features(), 0);
  for (std::size_t j : exclude)
    if (j < mask.size()) mask[j] = 1;
  auto best = argmin_stump(table, compute_stump_errors(table, w), mask);
  if (!best) throw ExhaustionError("every feature is excluded", 0);
  return *best;
}

}  // namespace gaborboost
