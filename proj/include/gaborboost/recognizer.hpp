#pragma once

// Rank-1 nearest-neighbour identification with normalized-correlation
// distance over the boosted feature selection.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gaborboost/error.hpp"
#include "gaborboost/parallel.hpp"

namespace gaborboost {

/// 1 - cos(a, b). One zero vector gives 1, two zero vectors give 0.
inline double ncc_distance(std::span<const double> a,
                           std::span<const double> b) {
  if (a.size() != b.size())
    throw ParameterError("ncc_distance: vectors differ in length");
  if (a.empty()) throw ParameterError("ncc_distance: empty vectors");
  double dot = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  const bool za = aa == 0.0;
  const bool zb = bb == 0.0;
  if (za && zb) return 0.0;
  if (za || zb) return 1.0;
  const double cosine = std::clamp(dot / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
  return 1.0 - cosine;
}

struct GalleryEntry {
  std::string identity;
  std::vector<double> features;  // selected features, in round order
};

struct GalleryIndex {
  std::vector<GalleryEntry> entries;
  std::vector<std::size_t> selection;

  void validate() const {
    if (entries.empty()) throw ParameterError("gallery is empty");
    for (const auto& e : entries)
      if (e.features.size() != selection.size())
        throw ParameterError("gallery entry '" + e.identity +
                             "' has wrong feature count");
  }
};

struct Match {
  std::size_t entry = 0;
  double distance = 0.0;
};

/// Nearest gallery entry on the first k selected features. Ties go to the
/// earliest entry.
inline Match nearest_match(const GalleryIndex& index,
                           std::span<const double> probe,
                           std::size_t k_features) {
  if (index.entries.empty()) throw ParameterError("gallery is empty");
  if (k_features < 1 || k_features > index.selection.size())
    throw ParameterError("k_features must lie in [1, " +
                         std::to_string(index.selection.size()) + "]");
  if (probe.size() < k_features)
    throw ParameterError("probe has fewer than k_features components");
  Match best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t e = 0; e < index.entries.size(); ++e) {
    const auto& f = index.entries[e].features;
    if (f.size() < k_features)
      throw ParameterError("gallery entry has fewer than k_features components");
    const double d = ncc_distance(std::span(f).first(k_features),
                                  probe.first(k_features));
    if (d < best.distance) best = {e, d};
  }
  return best;
}

inline std::string nearest_neighbor(const GalleryIndex& index,
                                    std::span<const double> probe,
                                    std::size_t k_features) {
  return index.entries[nearest_match(index, probe, k_features).entry].identity;
}

struct Probe {
  std::string id;  // e.g. image path
  std::string identity;
  std::vector<double> features;
};

struct ProbeDecision {
  std::size_t feature_count = 0;
  std::string probe_id;
  std::string predicted;
  std::string actual;
  double distance = 0.0;
};

struct RecognitionReport {
  std::vector<std::pair<std::size_t, double>> accuracy;  // (k, percent)
  std::vector<ProbeDecision> decisions;
};

/// Rank-1 accuracy (percent) at each requested feature count.
inline RecognitionReport evaluate(const GalleryIndex& index,
                                  const std::vector<Probe>& probes,
                                  const std::vector<std::size_t>& dims,
                                  int workers = 1) {
  index.validate();
  if (dims.empty()) throw ParameterError("no feature dimensions requested");
  if (probes.empty()) throw ParameterError("no probes");
  for (std::size_t k : dims)
    if (k < 1 || k > index.selection.size())
      throw ParameterError("feature dimension " + std::to_string(k) +
                           " exceeds the " +
                           std::to_string(index.selection.size()) +
                           " selected features");

  RecognitionReport report;
  for (std::size_t k : dims) {
    std::vector<ProbeDecision> row(probes.size());
    parallel_for(probes.size(), workers, [&](std::size_t p) {
      const Match m = nearest_match(index, probes[p].features, k);
      row[p] = {k, probes[p].id, index.entries[m.entry].identity,
                probes[p].identity, m.distance};
    });
    std::size_t correct = 0;
    for (const auto& d : row) correct += d.predicted == d.actual;
    report.accuracy.emplace_back(
        k, 100.0 * static_cast<double>(correct) /
               static_cast<double>(probes.size()));
    report.decisions.insert(report.decisions.end(), row.begin(), row.end());
  }
  return report;
}

/// Tab-separated (feature_count, accuracy) table.
inline void write_accuracy_table(const RecognitionReport& report,
                                 std::ostream& out) {
  out << "feature_count\taccuracy\n";
  char buf[32];
  for (const auto& [k, acc] : report.accuracy) {
    std::snprintf(buf, sizeof buf, "%.1f", acc);
    out << k << '\t' << buf << '\n';
  }
}

inline void write_probe_csv(const RecognitionReport& report, std::ostream& out) {
  out << "feature_count,probe,predicted,actual,distance\n";
  char buf[40];
  for (const auto& d : report.decisions) {
    std::snprintf(buf, sizeof buf, "%.17g", d.distance);
    out << d.feature_count << ',' << d.probe_id << ',' << d.predicted << ','
        << d.actual << ',' << buf << '\n';
  }
}

}  // namespace gaborboost
