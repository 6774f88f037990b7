#pragma once

// Serial AdaBoost, Parallel AdaBoost (P-Boost) and the mutual-information
// redundancy filter.
//
// P-Boost runs S ordinary rounds while recording each sample's weight, fits a
// Gamma distribution to every sample's weight history by the method of
// moments (mean = alpha*theta, variance = alpha*theta^2), and then trains
// rounds S+1..T independently on weights drawn from those distributions.
// Every draw comes from a generator seeded by (seed, round, sample), so the
// parallel rounds can be scheduled on any number of workers without changing
// the result. Their picks are merged in round order, which is where feature
// distinctness and the MI filter are applied.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gaborboost/error.hpp"
#include "gaborboost/gabor.hpp"
#include "gaborboost/pairs.hpp"
#include "gaborboost/parallel.hpp"
#include "gaborboost/weak.hpp"

namespace gaborboost {

struct BoostConfig {
  int total_rounds = 200;
  int serial_rounds = 50;
  double mi_threshold = 0.2;  // bits; +inf disables the filter
  std::optional<double> epsilon_floor;  // unset: 1 / (2N)
  std::uint64_t seed = 0;

  bool mi_enabled() const { return std::isfinite(mi_threshold); }

  double floor_for(std::size_t num_samples) const {
    return epsilon_floor ? *epsilon_floor
                         : 1.0 / (2.0 * static_cast<double>(num_samples));
  }

  void validate() const {
    if (total_rounds < 1) throw ParameterError("T must be >= 1");
    if (serial_rounds < 1 || serial_rounds > total_rounds)
      throw ParameterError("S must satisfy 1 <= S <= T");
    if (std::isnan(mi_threshold) || mi_threshold < 0.0)
      throw ParameterError("delta_MI must be >= 0");
    if (epsilon_floor && !(*epsilon_floor > 0.0 && *epsilon_floor < 0.5))
      throw ParameterError("epsilon_floor must lie in (0, 0.5)");
  }
};

struct BoostRound {
  WeakClassifier stump;
  double coefficient = 0.0;
  // Diagnostics, not persisted.
  double error = 0.0;
  double max_mi = 0.0;
};

struct EnsembleModel {
  std::vector<BoostRound> rounds;
  BoostConfig config;
  std::optional<FeatureLayout> layout;

  std::vector<std::size_t> selected_features() const {
    std::vector<std::size_t> out;
    out.reserve(rounds.size());
    for (const auto& r : rounds) out.push_back(r.stump.feature_index);
    return out;
  }
};

// ---------------------------------------------------------------------------
// Gamma weight models

struct GammaParams {
  double alpha = 1.0;  // shape
  double theta = 1.0;  // scale
  std::optional<double> degenerate_value;

  bool degenerate() const { return degenerate_value.has_value(); }
};

/// Method-of-moments fit with the population variance. Near-zero mean or
/// variance yields the degenerate (constant) model.
inline GammaParams fit_gamma(std::span<const double> trajectory) {
  if (trajectory.size() < 2)
    throw ParameterError("gamma fit needs at least two weights");
  double sum = 0.0;
  for (double w : trajectory) {
    if (!(w >= 0.0)) throw DataError("negative weight in trajectory");
    sum += w;
  }
  const double n = static_cast<double>(trajectory.size());
  const double mean = sum / n;
  double ss = 0.0;
  for (double w : trajectory) ss += (w - mean) * (w - mean);
  const double var = ss / n;

  GammaParams p;
  if (var < 1e-18 || mean < 1e-18) {
    p.degenerate_value = mean;
    return p;
  }
  p.theta = var / mean;
  p.alpha = mean / p.theta;
  return p;
}

namespace detail {

inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t round,
                                 std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(round),
                    static_cast<std::uint32_t>(round >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace detail

/// Independent draw per sample from its Gamma model, renormalized to sum 1.
/// Sample i's draw depends only on (seed, round, i).
inline WeightVector sample_weights(std::span<const GammaParams> params,
                                   std::uint64_t seed, int round,
                                   int workers = 1) {
  WeightVector w(params.size());
  parallel_for(params.size(), workers, [&](std::size_t i) {
    const auto& p = params[i];
    if (p.degenerate()) {
      w[i] = *p.degenerate_value;
      return;
    }
    if (!(p.alpha > 0.0 && p.theta > 0.0))
      throw ParameterError("gamma parameters must be positive");
    auto rng = detail::substream(seed, static_cast<std::uint64_t>(round), i);
    std::gamma_distribution<double> dist(p.alpha, p.theta);
    w[i] = dist(rng);
  });
  double sum = 0.0;
  for (double x : w) sum += x;
  if (!(sum > 0.0))
    throw DegenerateWeightsError("sampled weights sum to zero in round " +
                                 std::to_string(round));
  for (double& x : w) x /= sum;
  return w;
}

// ---------------------------------------------------------------------------
// Mutual information between +-1 response rows

using ResponseRow = std::vector<std::int8_t>;
using ClassifierResponseTable = std::vector<ResponseRow>;

/// Entropy in bits of a +-1 row.
inline double binary_entropy(std::span<const std::int8_t> a) {
  if (a.empty()) throw ParameterError("empty response row");
  std::size_t pos = 0;
  for (auto x : a) pos += x > 0;
  const std::size_t counts[2] = {a.size() - pos, pos};
  const double n = static_cast<double>(a.size());
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    h += (static_cast<double>(c) / n) *
         (std::log2(n) - std::log2(static_cast<double>(c)));
  }
  return h;
}

/// Plug-in estimate from the 2x2 contingency table, in bits.
inline double mutual_information_binary(std::span<const std::int8_t> a,
                                        std::span<const std::int8_t> b) {
  if (a.size() != b.size())
    throw ParameterError("response rows differ in length");
  if (a.empty()) throw ParameterError("empty response row");
  std::size_t joint[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < a.size(); ++i)
    ++joint[a[i] > 0][b[i] > 0];
  const std::size_t ma[2] = {joint[0][0] + joint[0][1],
                             joint[1][0] + joint[1][1]};
  const std::size_t mb[2] = {joint[0][0] + joint[1][0],
                             joint[0][1] + joint[1][1]};
  const double n = static_cast<double>(a.size());
  const double log_n = std::log2(n);
  double mi = 0.0;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      const std::size_t c = joint[x][y];
      if (c == 0) continue;
      // log2(c*n / (ma*mb)) grouped so identical rows reduce term-by-term to
      // the entropy expression above.
      const double lc = std::log2(static_cast<double>(c));
      const double term =
          (lc - std::log2(static_cast<double>(ma[x]))) +
          (log_n - std::log2(static_cast<double>(mb[y])));
      mi += (static_cast<double>(c) / n) * term;
    }
  }
  return std::max(mi, 0.0);
}

// ---------------------------------------------------------------------------
// Selection state shared by every round of one run

struct SelectionState {
  ClassifierResponseTable responses;
  std::vector<std::uint8_t> used;  // per feature

  explicit SelectionState(std::size_t num_features) : used(num_features, 0) {}

  void add(const StumpTable& table, const WeakClassifier& h) {
    responses.push_back(table.responses(h.feature_index, h.polarity));
    used[h.feature_index] = 1;
  }
};

struct FilterPick {
  ScoredStump candidate;
  double max_mi = 0.0;
};

namespace detail {

inline double max_mi_against(const StumpTable& table, const WeakClassifier& h,
                             const ClassifierResponseTable& responses) {
  if (responses.empty()) return 0.0;
  const ResponseRow row = table.responses(h.feature_index, h.polarity);
  double best = 0.0;
  for (const auto& prev : responses)
    best = std::max(best, mutual_information_binary(row, prev));
  return best;
}

}  // namespace detail

/// Walks candidates in ascending weighted error and returns the first one on
/// an unused feature whose largest MI against the already selected
/// classifiers is at most `delta_mi`.
inline FilterPick mi_filter_pick(const StumpTable& table,
                                 const StumpErrors& errors,
                                 const SelectionState& state, double delta_mi,
                                 int round) {
  const auto first = argmin_stump(table, errors, state.used);
  if (!first)
    throw ExhaustionError("round " + std::to_string(round) +
                              ": every feature already selected",
                          round);
  const double first_mi =
      detail::max_mi_against(table, first->stump, state.responses);
  if (first_mi <= delta_mi) return {*first, first_mi};

  for (const auto& c : ranked_stumps(table, errors, state.used)) {
    const double mi = detail::max_mi_against(table, c.stump, state.responses);
    if (mi <= delta_mi) return {c, mi};
  }
  throw ExhaustionError("round " + std::to_string(round) +
                            ": no candidate passes the MI filter",
                        round);
}

/// Convenience form over a raw training set and explicit selection history.
inline FilterPick mi_filter_pick(const TrainingSet& set,
                                 std::span<const double> w,
                                 const std::vector<WeakClassifier>& selected,
                                 const BoostConfig& cfg) {
  check_weights(set, w);
  const StumpTable table(set);
  SelectionState state(table.num_features());
  for (const auto& h : selected) state.add(table, h);
  return mi_filter_pick(table, compute_stump_errors(table, w), state,
                        cfg.mi_threshold,
                        static_cast<int>(selected.size()) + 1);
}

// ---------------------------------------------------------------------------
// Rounds

/// Clamps into [floor, 1 - floor] and caps at 0.5 so c_n stays >= 0.
inline double clamp_error(double error, double floor) {
  return std::min(std::clamp(error, floor, 1.0 - floor), 0.5);
}

inline double coefficient_from_error(double error) {
  return 0.5 * std::log((1.0 - error) / error);
}

struct RoundResult {
  BoostRound round;
  WeightVector weights;  // after the update
};

/// One serial AdaBoost round: filtered pick, coefficient, exponential
/// reweighting and renormalization. `round` is 1-based and only used for
/// error reporting.
inline RoundResult adaboost_round(const StumpTable& table,
                                  std::span<const double> w,
                                  SelectionState& state,
                                  const BoostConfig& cfg, int round) {
  const FilterPick pick = mi_filter_pick(
      table, compute_stump_errors(table, w), state, cfg.mi_threshold, round);
  const double eps =
      clamp_error(pick.candidate.error, cfg.floor_for(table.num_samples()));
  const double c = coefficient_from_error(eps);
  const WeakClassifier& h = pick.candidate.stump;

  const auto raw = table.raw(h.feature_index);
  const auto labels = table.labels();
  RoundResult out{{h, c, pick.candidate.error, pick.max_mi}, WeightVector(w.size())};
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const int margin = labels[i] * h.polarity * raw[i];
    out.weights[i] = w[i] * std::exp(-c * margin);
    sum += out.weights[i];
  }
  for (double& x : out.weights) x /= sum;
  state.add(table, h);
  return out;
}

/// Convenience form: the selection history is taken from `selected`.
inline RoundResult adaboost_round(const TrainingSet& set,
                                  std::span<const double> w,
                                  const EnsembleModel& selected,
                                  const BoostConfig& cfg) {
  check_weights(set, w);
  const StumpTable table(set);
  SelectionState state(table.num_features());
  for (const auto& r : selected.rounds) state.add(table, r.stump);
  return adaboost_round(table, w, state, cfg,
                        static_cast<int>(selected.rounds.size()) + 1);
}

// ---------------------------------------------------------------------------
// Trainers

struct TrainOptions {
  int workers = 1;
  bool record_trajectory = false;
  std::function<void(int round, const BoostRound&)> on_round;
};

struct TrainResult {
  EnsembleModel model;
  std::vector<WeightVector> trajectory;  // weights entering each serial round
  double serial_seconds = 0.0;
  double parallel_seconds = 0.0;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

inline void run_serial(const StumpTable& table, const BoostConfig& cfg,
                       int rounds, bool record, SelectionState& state,
                       TrainResult& result, const TrainOptions& opts) {
  const std::size_t n = table.num_samples();
  WeightVector w(n, 1.0 / static_cast<double>(n));
  for (int r = 1; r <= rounds; ++r) {
    if (record) result.trajectory.push_back(w);
    RoundResult rr = adaboost_round(table, w, state, cfg, r);
    w = std::move(rr.weights);
    result.model.rounds.push_back(rr.round);
    if (opts.on_round) opts.on_round(r, rr.round);
  }
}

}  // namespace detail

inline TrainResult train_ab_detailed(const TrainingSet& set,
                                     const BoostConfig& cfg,
                                     const TrainOptions& opts = {}) {
  BoostConfig snapshot = cfg;
  snapshot.serial_rounds = cfg.total_rounds;
  snapshot.validate();
  const StumpTable table(set);
  if (static_cast<std::size_t>(cfg.total_rounds) > table.num_features())
    throw ParameterError("T exceeds the number of features");

  TrainResult result;
  result.model.config = snapshot;
  result.model.layout = set.layout;
  SelectionState state(table.num_features());
  const auto t0 = detail::Clock::now();
  detail::run_serial(table, snapshot, snapshot.total_rounds,
                     opts.record_trajectory, state, result, opts);
  result.serial_seconds = detail::seconds_since(t0);
  return result;
}

inline EnsembleModel train_ab(const TrainingSet& set, const BoostConfig& cfg) {
  return train_ab_detailed(set, cfg).model;
}

inline TrainResult train_pab_detailed(const TrainingSet& set,
                                      const BoostConfig& cfg,
                                      const TrainOptions& opts = {}) {
  cfg.validate();
  const int S = cfg.serial_rounds;
  const int T = cfg.total_rounds;
  if (S < T && S < 2)
    throw ParameterError("P-Boost needs S >= 2 serial rounds to fit weights");
  const StumpTable table(set);
  if (static_cast<std::size_t>(T) > table.num_features())
    throw ParameterError("T exceeds the number of features");

  TrainResult result;
  result.model.config = cfg;
  result.model.layout = set.layout;
  SelectionState state(table.num_features());

  auto t0 = detail::Clock::now();
  detail::run_serial(table, cfg, S, true, state, result, opts);
  result.serial_seconds = detail::seconds_since(t0);
  if (S == T) {
    if (!opts.record_trajectory) result.trajectory.clear();
    return result;
  }

  t0 = detail::Clock::now();
  const std::size_t n = table.num_samples();
  std::vector<GammaParams> params(n);
  std::vector<double> history(static_cast<std::size_t>(S));
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < S; ++k) history[static_cast<std::size_t>(k)] = result.trajectory[static_cast<std::size_t>(k)][i];
    params[i] = fit_gamma(history);
  }

  // Independent rounds: sampled weights and the error of every stump.
  const auto parallel_count = static_cast<std::size_t>(T - S);
  std::vector<StumpErrors> round_errors(parallel_count);
  parallel_for(parallel_count, opts.workers, [&](std::size_t k) {
    const int round = S + 1 + static_cast<int>(k);
    const WeightVector w = sample_weights(params, cfg.seed, round);
    round_errors[k] = compute_stump_errors(table, w);
  });

  // Deterministic merge in round order.
  const double floor = cfg.floor_for(n);
  for (std::size_t k = 0; k < parallel_count; ++k) {
    const int round = S + 1 + static_cast<int>(k);
    const FilterPick pick = mi_filter_pick(table, round_errors[k], state,
                                           cfg.mi_threshold, round);
    const double eps = clamp_error(pick.candidate.error, floor);
    const BoostRound br{pick.candidate.stump, coefficient_from_error(eps),
                        pick.candidate.error, pick.max_mi};
    state.add(table, br.stump);
    result.model.rounds.push_back(br);
    if (opts.on_round) opts.on_round(round, br);
  }
  result.parallel_seconds = detail::seconds_since(t0);
  if (!opts.record_trajectory) result.trajectory.clear();
  return result;
}

inline EnsembleModel train_pab(const TrainingSet& set, const BoostConfig& cfg,
                               int workers = 1) {
  TrainOptions opts;
  opts.workers = workers;
  return train_pab_detailed(set, cfg, opts).model;
}

// ---------------------------------------------------------------------------
// Inference and cost model

struct Prediction {
  double score = 0.0;
  int decision = +1;
};

/// sign(sum c_n h_n(x)); a zero score maps to +1.
inline Prediction predict(const EnsembleModel& model,
                          std::span<const double> values) {
  Prediction p;
  for (const auto& r : model.rounds)
    p.score += r.coefficient * classify(r.stump, values);
  p.decision = p.score >= 0.0 ? +1 : -1;
  return p;
}

struct CostUnits {
  long serial = 0;
  long parallel = 0;

  bool operator==(const CostUnits&) const = default;
};

/// Critical-path length in round units: S serial rounds, then the T - S
/// independent rounds spread over the workers.
inline CostUnits cost_estimate(const BoostConfig& cfg, int workers) {
  if (workers < 1) throw ParameterError("workers must be >= 1");
  const long rest = cfg.total_rounds - cfg.serial_rounds;
  return {cfg.serial_rounds, (rest + workers - 1) / workers};
}

// ---------------------------------------------------------------------------
// Persistence

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string serialize_model(const EnsembleModel& model) {
  std::ostringstream os;
  os << "gaborboost-model 1\n"
     << "T " << model.config.total_rounds << "\n"
     << "S " << model.config.serial_rounds << "\n"
     << "delta_mi " << format_double(model.config.mi_threshold) << "\n"
     << "seed " << model.config.seed << "\n"
     << "layout " << (model.layout ? model.layout->describe() : "none") << "\n"
     << "rounds " << model.rounds.size() << "\n";
  for (const auto& r : model.rounds)
    os << r.stump.feature_index << '\t' << format_double(r.stump.threshold)
       << '\t' << r.stump.polarity << '\t' << format_double(r.coefficient)
       << '\n';
  return os.str();
}

inline EnsembleModel parse_model(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto fail = [](const std::string& what) -> FormatError {
    return FormatError("model: " + what);
  };
  if (!std::getline(in, line) || line != "gaborboost-model 1")
    throw fail("missing 'gaborboost-model 1' header");

  EnsembleModel model;
  auto header = [&](const std::string& key) {
    if (!std::getline(in, line) || line.rfind(key + " ", 0) != 0)
      throw fail("expected '" + key + "' line");
    return line.substr(key.size() + 1);
  };
  try {
    model.config.total_rounds = std::stoi(header("T"));
    model.config.serial_rounds = std::stoi(header("S"));
    model.config.mi_threshold = std::stod(header("delta_mi"));
    model.config.seed = std::stoull(header("seed"));
  } catch (const std::logic_error&) {
    throw fail("bad numeric header value: " + line);
  }
  const std::string layout = header("layout");
  if (layout != "none") model.layout = FeatureLayout::parse(layout);
  std::size_t count = 0;
  try {
    count = std::stoull(header("rounds"));
  } catch (const std::logic_error&) {
    throw fail("bad round count");
  }

  for (std::size_t k = 0; k < count; ++k) {
    if (!std::getline(in, line))
      throw fail("expected " + std::to_string(count) + " rounds, got " +
                 std::to_string(k));
    std::istringstream ls(line);
    std::string j, lambda, pol, c;
    if (!std::getline(ls, j, '\t') || !std::getline(ls, lambda, '\t') ||
        !std::getline(ls, pol, '\t') || !std::getline(ls, c))
      throw fail("round line " + std::to_string(k + 1) + " is malformed");
    BoostRound r;
    try {
      r.stump.feature_index = std::stoull(j);
      r.stump.threshold = std::stod(lambda);
      r.stump.polarity = std::stoi(pol);
      r.coefficient = std::stod(c);
    } catch (const std::logic_error&) {
      throw fail("round line " + std::to_string(k + 1) + " is malformed");
    }
    if (r.stump.polarity != 1 && r.stump.polarity != -1)
      throw fail("polarity must be +1 or -1");
    if (!std::isfinite(r.coefficient)) throw fail("non-finite coefficient");
    if (model.layout && r.stump.feature_index >= model.layout->size())
      throw fail("feature index outside layout");
    model.rounds.push_back(r);
  }
  if (std::getline(in, line) && !line.empty())
    throw fail("trailing content after rounds");
  return model;
}

inline void save_model(const EnsembleModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot write model: " + path);
  out << serialize_model(model);
}

inline EnsembleModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot open model: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

/// Text header, then rounds*samples float64 values row-major (host order).
inline void save_trajectory(const std::vector<WeightVector>& trajectory,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot write trajectory: " + path);
  const std::size_t n = trajectory.empty() ? 0 : trajectory.front().size();
  out << "gaborboost-trajectory 1\nrounds " << trajectory.size()
      << "\nsamples " << n << "\nend\n";
  for (const auto& row : trajectory)
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
}

}  // namespace gaborboost
