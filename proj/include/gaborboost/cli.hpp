#pragma once

// Command-line front end: synth, pairs, train, eval, bench, show-selected.
// run_cli() is the whole program minus process plumbing so that tests can
// drive it in-process. Exit codes: 0 success, 2 usage/parameter/format
// problems, 3 algorithmic failure during boosting.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gaborboost/boosting.hpp"
#include "gaborboost/dataio.hpp"
#include "gaborboost/error.hpp"
#include "gaborboost/gabor.hpp"
#include "gaborboost/pairs.hpp"
#include "gaborboost/pipeline.hpp"
#include "gaborboost/recognizer.hpp"

namespace gaborboost::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitAlgorithm = 3;

// Bank flags layered over an optional config file.
struct BankFlags {
  std::string config_path;
  std::optional<double> f_max, gamma, eta;
  std::optional<int> scales, orientations, radius, step;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "bank config file (key = value)");
    app.add_option("--f-max", f_max, "highest kernel frequency");
    app.add_option("--gamma", gamma, "f / alpha ratio");
    app.add_option("--eta", eta, "f / beta ratio");
    app.add_option("--scales", scales, "number of scales U");
    app.add_option("--orientations", orientations, "number of orientations V");
    app.add_option("--kernel-radius", radius, "kernel radius in pixels");
    app.add_option("--step", step, "feature grid stride in pixels");
  }

  bool any_set() const {
    return !config_path.empty() || f_max || gamma || eta || scales ||
           orientations || radius || step;
  }

  GaborBankConfig resolve(GaborBankConfig base = {}) const {
    GaborBankConfig c =
        config_path.empty() ? base : load_bank_config(config_path, base);
    if (f_max) c.f_max = *f_max;
    if (gamma) c.gamma = *gamma;
    if (eta) c.eta = *eta;
    if (scales) c.num_scales = *scales;
    if (orientations) c.num_orientations = *orientations;
    if (radius) c.kernel_radius = *radius;
    if (step) c.downsample_step = *step;
    c.validate();
    return c;
  }
};

inline double parse_delta(const std::string& text) {
  if (text == "inf" || text == "+inf" || text == "infinity")
    return std::numeric_limits<double>::infinity();
  return detail::parse_double("delta-mi", text);
}

inline std::vector<std::size_t> parse_list(const std::string& text,
                                           const std::string& what) {
  std::vector<std::size_t> out;
  std::istringstream is(text);
  for (std::string tok; std::getline(is, tok, ',');) {
    tok = detail::trim(tok);
    if (tok.empty()) continue;
    const int v = detail::parse_int(what, tok);
    if (v < 1) throw ParameterError(what + " values must be >= 1");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw ParameterError(what + " list is empty");
  return out;
}

/// Writes to --out when given, otherwise to the command's stdout.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw ParameterError("cannot write " + path);
      out_ = &file_;
    }
  }
  std::ostream& stream() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

inline std::string fixed1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

inline std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  int ids = 20;
  int per_id = 3;
  int size = 64;
  double sigma = 0.05;
  std::uint64_t seed = 7;
  int gallery_per_id = 2;
  std::string out;
};

inline int cmd_synth(const SynthArgs& a, std::ostream& out) {
  SyntheticSpec spec{a.ids, a.per_id, a.size, a.sigma, a.seed};
  const auto manifest =
      write_synthetic_dataset(spec, a.out, a.gallery_per_id, a.seed);
  out << "wrote " << manifest.size() << " images and manifest.tsv to "
      << a.out << "\n";
  return kExitOk;
}

struct PairsArgs {
  std::string manifest;
  std::string out;
  std::size_t num_intra = 0;
  std::size_t num_extra = 0;
  std::uint64_t seed = 0;
  int workers = 1;
  BankFlags bank;
};

inline int cmd_pairs(const PairsArgs& a, std::ostream& out) {
  const auto images = load_images(read_manifest(a.manifest));
  const GaborBank bank(a.bank.resolve());
  const TrainingSet set = build_training_set(
      images, bank, {a.num_intra, a.num_extra, a.seed}, a.workers);
  save_training_set(set, a.out);
  out << "pairs\t" << set.size() << "\nintra\t" << set.num_intra
      << "\nextra\t" << set.num_extra << "\ndimension\t" << set.dimension()
      << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string manifest;
  std::string pairs;
  std::string mode = "pab-mi";
  int serial_rounds = 50;
  int total_rounds = 200;
  std::string delta_mi = "0.2";
  std::optional<double> epsilon_floor;
  std::uint64_t seed = 0;
  int workers = 1;
  std::size_t num_intra = 0;
  std::size_t num_extra = 0;
  std::string out;
  std::string trajectory;
  BankFlags bank;
};

inline BoostConfig boost_config_for(const std::string& mode, int S, int T,
                                    double delta, std::uint64_t seed,
                                    std::optional<double> floor) {
  BoostConfig cfg;
  cfg.total_rounds = T;
  cfg.serial_rounds = mode == "pab-mi" ? S : T;
  cfg.mi_threshold =
      mode == "ab" ? std::numeric_limits<double>::infinity() : delta;
  cfg.seed = seed;
  cfg.epsilon_floor = floor;
  cfg.validate();
  return cfg;
}

inline TrainResult run_training(const TrainingSet& set, const std::string& mode,
                                const BoostConfig& cfg,
                                const TrainOptions& opts) {
  if (mode == "pab-mi") return train_pab_detailed(set, cfg, opts);
  return train_ab_detailed(set, cfg, opts);
}

inline int cmd_train(const TrainArgs& a, std::ostream& out) {
  if (a.manifest.empty() == a.pairs.empty())
    throw ParameterError("train needs exactly one of --manifest or --pairs");
  const BoostConfig cfg =
      boost_config_for(a.mode, a.serial_rounds, a.total_rounds,
                       parse_delta(a.delta_mi), a.seed, a.epsilon_floor);
  if (a.workers < 1) throw ParameterError("--workers must be >= 1");

  TrainingSet set;
  if (!a.pairs.empty()) {
    if (a.bank.any_set())
      throw ParameterError("bank flags cannot be combined with --pairs");
    set = load_training_set(a.pairs);
  } else {
    const auto images = load_images(read_manifest(a.manifest));
    const GaborBank bank(a.bank.resolve());
    set = build_training_set(images, bank, {a.num_intra, a.num_extra, a.seed},
                             a.workers);
  }

  TrainOptions opts;
  opts.workers = a.workers;
  opts.record_trajectory = !a.trajectory.empty();
  const bool mi = cfg.mi_enabled();
  out << "round\tfeature\terror\tc_n" << (mi ? "\tmax_mi" : "") << "\n";
  opts.on_round = [&](int round, const BoostRound& r) {
    out << round << '\t' << r.stump.feature_index << '\t'
        << format_double(r.error) << '\t' << format_double(r.coefficient);
    if (mi) out << '\t' << format_double(r.max_mi);
    out << '\n';
  };
  const TrainResult result = run_training(set, a.mode, cfg, opts);
  save_model(result.model, a.out);
  if (!a.trajectory.empty()) save_trajectory(result.trajectory, a.trajectory);
  return kExitOk;
}

struct EvalArgs {
  std::string model;
  std::string manifest;
  std::string dims;
  std::string probes = "probe";
  std::string out;
  std::string csv;
  int workers = 1;
  BankFlags bank;
};

/// Bank for evaluation: the model's own, checked against any flags and the
/// manifest's image geometry.
inline GaborBank eval_bank(const EnsembleModel& model, const BankFlags& flags,
                           const std::vector<LoadedImage>& images) {
  if (!model.layout)
    throw ParameterError("model has no feature layout; cannot extract features");
  const GaborBankConfig bank_cfg = flags.resolve(model.layout->bank);
  const FeatureLayout data_layout = common_layout(images, bank_cfg);
  if (!(data_layout == *model.layout))
    throw ParameterError("layout mismatch:\n  model:    " +
                         model.layout->describe() + "\n  manifest: " +
                         data_layout.describe());
  return GaborBank(bank_cfg);
}

inline int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const EnsembleModel model = load_model(a.model);
  const auto images = load_images(read_manifest(a.manifest));
  const GaborBank bank = eval_bank(model, a.bank, images);
  if (a.probes != "probe" && a.probes != "gallery")
    throw ParameterError("--probes must be 'probe' or 'gallery'");
  const auto dims = a.dims.empty() ? default_dims(model.rounds.size())
                                   : parse_list(a.dims, "dims");
  for (std::size_t k : dims)
    if (k > model.rounds.size())
      throw ParameterError("dimension " + std::to_string(k) +
                           " exceeds the model's " +
                           std::to_string(model.rounds.size()) + " rounds");

  const auto data =
      build_recognition_data(images, bank, model.selected_features(),
                             a.probes == "gallery", a.workers);
  const RecognitionReport report =
      evaluate(data.index, data.probes, dims, a.workers);
  Sink sink(a.out, out);
  write_accuracy_table(report, sink.stream());
  if (!a.csv.empty()) {
    std::ofstream csv(a.csv);
    if (!csv) throw ParameterError("cannot write " + a.csv);
    write_probe_csv(report, csv);
  }
  return kExitOk;
}

struct BenchArgs {
  std::string manifest;
  std::string serial_list = "50,70,100,150";
  int total_rounds = 200;
  std::string delta_mi = "0.2";
  std::uint64_t seed = 0;
  int workers = 1;
  std::string dims;
  std::size_t num_intra = 0;
  std::size_t num_extra = 0;
  std::string out;
  BankFlags bank;
};

struct BenchRow {
  std::string config;
  int serial_rounds = 0;
  RecognitionReport report;
  double serial_seconds = 0.0;
  double parallel_seconds = 0.0;
  CostUnits units;
};

inline std::vector<BenchRow> run_bench(const BenchArgs& a) {
  if (a.workers < 1) throw ParameterError("--workers must be >= 1");
  const auto serial = parse_list(a.serial_list, "S");
  const double delta = parse_delta(a.delta_mi);
  for (std::size_t s : serial)
    if (s > static_cast<std::size_t>(a.total_rounds))
      throw ParameterError("S = " + std::to_string(s) + " exceeds T = " +
                           std::to_string(a.total_rounds));

  const auto images = load_images(read_manifest(a.manifest));
  const GaborBank bank(a.bank.resolve());
  const TrainingSet set = build_training_set(
      images, bank, {a.num_intra, a.num_extra, a.seed}, a.workers);
  const auto dims = a.dims.empty()
                        ? default_dims(static_cast<std::size_t>(a.total_rounds))
                        : parse_list(a.dims, "dims");

  std::vector<BenchRow> rows;
  auto run = [&](const std::string& label, const std::string& mode, int S) {
    const BoostConfig cfg =
        boost_config_for(mode, S, a.total_rounds, delta, a.seed, std::nullopt);
    TrainOptions opts;
    opts.workers = a.workers;
    const TrainResult tr = run_training(set, mode, cfg, opts);
    const auto data = build_recognition_data(
        images, bank, tr.model.selected_features(), false, a.workers);
    rows.push_back({label, cfg.serial_rounds,
                    evaluate(data.index, data.probes, dims, a.workers),
                    tr.serial_seconds, tr.parallel_seconds,
                    cost_estimate(cfg, a.workers)});
  };
  run("AB+MI", "ab-mi", a.total_rounds);
  for (std::size_t s : serial)
    run("PAB+MI", "pab-mi", static_cast<int>(s));
  return rows;
}

/// Accuracy grid (dimension rows, one column per configuration) followed by
/// one timing/cost row per configuration.
inline void write_bench_report(const std::vector<BenchRow>& rows,
                               std::ostream& out) {
  if (rows.empty()) return;
  out << "feature_count";
  for (const auto& r : rows)
    out << '\t' << r.config
        << (r.config == "AB+MI" ? "" : " S=" + std::to_string(r.serial_rounds));
  out << '\n';
  const auto& dims = rows.front().report.accuracy;
  for (std::size_t d = 0; d < dims.size(); ++d) {
    out << dims[d].first;
    for (const auto& r : rows) out << '\t' << fixed1(r.report.accuracy[d].second);
    out << '\n';
  }
  out << '\n'
      << "config\tS\tbest_accuracy\tserial_ms\tparallel_ms\tserial_units\t"
         "parallel_units\n";
  for (const auto& r : rows) {
    double best = 0.0;
    for (const auto& [k, acc] : r.report.accuracy) best = std::max(best, acc);
    out << r.config << '\t' << r.serial_rounds << '\t' << fixed1(best) << '\t'
        << fixed3(1e3 * r.serial_seconds) << '\t'
        << fixed3(1e3 * r.parallel_seconds) << '\t' << r.units.serial << '\t'
        << r.units.parallel << '\n';
  }
}

inline int cmd_bench(const BenchArgs& a, std::ostream& out) {
  const auto rows = run_bench(a);
  Sink sink(a.out, out);
  write_bench_report(rows, sink.stream());
  return kExitOk;
}

struct ShowArgs {
  std::string model;
  std::string out;
};

inline int cmd_show_selected(const ShowArgs& a, std::ostream& out) {
  const EnsembleModel model = load_model(a.model);
  if (!model.layout)
    throw ParameterError("model has no feature layout to decode indices");
  Sink sink(a.out, out);
  auto& os = sink.stream();
  os << "round\tfeature\tu\tv\tx\ty\tc_n\n";
  for (std::size_t r = 0; r < model.rounds.size(); ++r) {
    const auto idx = model.rounds[r].stump.feature_index;
    const FeaturePosition p = model.layout->decode(idx);
    os << r + 1 << '\t' << idx << '\t' << p.u << '\t' << p.v << '\t' << p.x
       << '\t' << p.y << '\t' << format_double(model.rounds[r].coefficient)
       << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

/// `args` excludes the program name.
inline int run_cli(std::vector<std::string> args, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"Gabor wavelet selection with AdaBoost / P-Boost and MI"};
  app.name("gaborboost");
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "generate a synthetic identity dataset");
  s->add_option("--ids", synth.ids, "number of identities");
  s->add_option("--per-id", synth.per_id, "images per identity");
  s->add_option("--size", synth.size, "image side in pixels");
  s->add_option("--sigma", synth.sigma, "pixel noise standard deviation");
  s->add_option("--seed", synth.seed, "generator seed");
  s->add_option("--gallery-per-id", synth.gallery_per_id,
                "gallery images per identity in the split");
  s->add_option("--out", synth.out, "output directory")->required();

  PairsArgs pairs;
  auto* p = app.add_subcommand("pairs", "build the intra/extra difference set");
  p->add_option("--manifest", pairs.manifest, "dataset manifest")->required();
  p->add_option("--out", pairs.out, "pairs file")->required();
  p->add_option("--num-intra", pairs.num_intra, "intra-person pairs");
  p->add_option("--num-extra", pairs.num_extra, "extra-person pairs");
  p->add_option("--seed", pairs.seed, "sampling seed");
  p->add_option("--workers", pairs.workers, "extraction threads");
  pairs.bank.attach(*p);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "select wavelets by boosting");
  t->add_option("--manifest", train.manifest, "dataset manifest");
  t->add_option("--pairs", train.pairs, "pairs file from `pairs`");
  t->add_option("--mode", train.mode, "ab | ab-mi | pab-mi")
      ->check(CLI::IsMember({"ab", "ab-mi", "pab-mi"}));
  t->add_option("--S", train.serial_rounds, "serial rounds (pab-mi)");
  t->add_option("--T", train.total_rounds, "total rounds");
  t->add_option("--delta-mi", train.delta_mi, "MI threshold in bits or 'inf'");
  t->add_option("--epsilon-floor", train.epsilon_floor,
                "error clamp (default 1/(2N))");
  t->add_option("--seed", train.seed, "seed for pairs and weight sampling");
  t->add_option("--workers", train.workers, "threads for the parallel phase");
  t->add_option("--num-intra", train.num_intra, "intra-person pairs");
  t->add_option("--num-extra", train.num_extra, "extra-person pairs");
  t->add_option("--out", train.out, "model file")->required();
  t->add_option("--trajectory", train.trajectory,
                "also dump serial-round weights here");
  train.bank.attach(*t);

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "rank-1 recognition by feature count");
  e->add_option("--model", eval.model, "model file")->required();
  e->add_option("--manifest", eval.manifest, "dataset manifest")->required();
  e->add_option("--dims", eval.dims, "comma-separated feature counts");
  e->add_option("--probes", eval.probes, "probe | gallery");
  e->add_option("--out", eval.out, "report path (default stdout)");
  e->add_option("--csv", eval.csv, "per-probe CSV path");
  e->add_option("--workers", eval.workers, "probe scoring threads");
  eval.bank.attach(*e);

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "AB+MI vs PAB+MI over several S");
  b->add_option("--manifest", bench.manifest, "dataset manifest")->required();
  b->add_option("--S", bench.serial_list, "comma-separated serial rounds");
  b->add_option("--T", bench.total_rounds, "total rounds");
  b->add_option("--delta-mi", bench.delta_mi, "MI threshold in bits or 'inf'");
  b->add_option("--seed", bench.seed, "seed");
  b->add_option("--workers", bench.workers, "threads");
  b->add_option("--dims", bench.dims, "comma-separated feature counts");
  b->add_option("--num-intra", bench.num_intra, "intra-person pairs");
  b->add_option("--num-extra", bench.num_extra, "extra-person pairs");
  b->add_option("--out", bench.out, "report path (default stdout)");
  bench.bank.attach(*b);

  ShowArgs show;
  auto* sh = app.add_subcommand("show-selected", "decode selected wavelets");
  sh->add_option("--model", show.model, "model file")->required();
  sh->add_option("--out", show.out, "output path (default stdout)");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::Error& ex) {
    err << "usage error: " << ex.what() << "\n";
    return kExitUsage;
  }

  try {
    if (s->parsed()) return cmd_synth(synth, out);
    if (p->parsed()) return cmd_pairs(pairs, out);
    if (t->parsed()) return cmd_train(train, out);
    if (e->parsed()) return cmd_eval(eval, out);
    if (b->parsed()) return cmd_bench(bench, out);
    if (sh->parsed()) return cmd_show_selected(show, out);
  } catch (const ExhaustionError& ex) {
    err << "error: " << ex.what() << " (round " << ex.round() << ")\n";
    return kExitAlgorithm;
  } catch (const DegenerateWeightsError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitAlgorithm;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace gaborboost::cli
