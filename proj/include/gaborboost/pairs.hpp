#pragma once

// Intra/extra-person difference samples: the two-class training set the
// boosting stage selects wavelets from.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gaborboost/error.hpp"
#include "gaborboost/gabor.hpp"

namespace gaborboost {

struct GallerySample {
  std::string identity;
  std::string image_ref;
  std::vector<double> features;
};

inline constexpr int kIntra = +1;
inline constexpr int kExtra = -1;

struct DiffSample {
  std::vector<double> values;  // |a[j] - b[j]|
  int label = kIntra;
  std::pair<std::uint32_t, std::uint32_t> source_pair{0, 0};
};

struct TrainingSet {
  std::vector<DiffSample> samples;
  std::size_t num_intra = 0;
  std::size_t num_extra = 0;
  std::uint64_t seed = 0;
  std::optional<FeatureLayout> layout;

  std::size_t size() const { return samples.size(); }
  std::size_t dimension() const {
    return samples.empty() ? 0 : samples.front().values.size();
  }

  /// Throws unless the set has both classes and a uniform dimension.
  void validate() const {
    if (num_intra < 1 || num_extra < 1)
      throw ParameterError("training set needs at least one intra and one "
                           "extra sample");
    const std::size_t d = dimension();
    if (d == 0) throw ParameterError("training set has zero dimension");
    std::size_t intra = 0;
    for (const auto& s : samples) {
      if (s.values.size() != d)
        throw ParameterError("training samples differ in dimension");
      if (s.label != kIntra && s.label != kExtra)
        throw ParameterError("sample label must be +1 or -1");
      intra += s.label == kIntra;
    }
    if (intra != num_intra || samples.size() - intra != num_extra)
      throw ParameterError("training set class counts are inconsistent");
  }
};

inline DiffSample make_diff(std::span<const double> a, std::span<const double> b,
                            int label, std::uint32_t p, std::uint32_t q) {
  if (a.size() != b.size())
    throw ParameterError("feature vectors differ in length");
  DiffSample s;
  s.values.resize(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) s.values[j] = std::abs(a[j] - b[j]);
  s.label = label;
  s.source_pair = {p, q};
  return s;
}

inline double component(const DiffSample& sample, std::size_t j) {
  if (j >= sample.values.size())
    throw ParameterError("feature index " + std::to_string(j) +
                         " out of range");
  return sample.values[j];
}

namespace detail {

// Partial Fisher-Yates: the first `count` entries of `pool` become a uniform
// sample without replacement.
template <typename T>
void sample_prefix(std::vector<T>& pool, std::size_t count,
                   std::mt19937_64& rng) {
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
}

}  // namespace detail

/// Samples `num_intra` same-identity and `num_extra` cross-identity pairs
/// without replacement (uniform over all pairs of each class) and returns
/// their absolute feature differences, intra samples first.
inline TrainingSet build_pairs(const std::vector<GallerySample>& gallery,
                               std::size_t num_intra, std::size_t num_extra,
                               std::uint64_t seed) {
  if (gallery.empty()) throw ParameterError("gallery is empty");
  if (num_intra < 1 || num_extra < 1)
    throw ParameterError("need at least one intra and one extra pair");
  const std::size_t dim = gallery.front().features.size();
  for (const auto& g : gallery) {
    if (g.identity.empty()) throw ParameterError("gallery identity is empty");
    if (g.features.size() != dim)
      throw ParameterError("gallery feature vectors differ in length");
  }

  using Pair = std::pair<std::uint32_t, std::uint32_t>;
  std::vector<Pair> intra;
  std::vector<Pair> extra;
  for (std::uint32_t p = 0; p < gallery.size(); ++p)
    for (std::uint32_t q = p + 1; q < gallery.size(); ++q)
      (gallery[p].identity == gallery[q].identity ? intra : extra)
          .emplace_back(p, q);

  if (intra.size() < num_intra)
    throw CapacityError("intra-person pairs: requested " +
                        std::to_string(num_intra) + ", only " +
                        std::to_string(intra.size()) + " available");
  if (extra.size() < num_extra)
    throw CapacityError("extra-person pairs: requested " +
                        std::to_string(num_extra) + ", only " +
                        std::to_string(extra.size()) + " available");

  std::mt19937_64 rng(seed);
  detail::sample_prefix(intra, num_intra, rng);
  detail::sample_prefix(extra, num_extra, rng);

  TrainingSet set;
  set.seed = seed;
  set.num_intra = num_intra;
  set.num_extra = num_extra;
  set.samples.reserve(num_intra + num_extra);
  for (auto [p, q] : intra)
    set.samples.push_back(
        make_diff(gallery[p].features, gallery[q].features, kIntra, p, q));
  for (auto [p, q] : extra)
    set.samples.push_back(
        make_diff(gallery[p].features, gallery[q].features, kExtra, p, q));
  return set;
}

// Binary persistence: a text header terminated by "end\n", then per sample
// int32 label, uint32 p, uint32 q and `cols` float64 values, all in host
// byte order.
inline void save_training_set(const TrainingSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot write training set: " + path);
  out << "gaborboost-pairs 1\n"
      << "rows " << set.size() << "\n"
      << "cols " << set.dimension() << "\n"
      << "intra " << set.num_intra << "\n"
      << "extra " << set.num_extra << "\n"
      << "seed " << set.seed << "\n";
  if (set.layout) out << "layout " << set.layout->describe() << "\n";
  out << "end\n";
  for (const auto& s : set.samples) {
    const std::int32_t label = s.label;
    out.write(reinterpret_cast<const char*>(&label), sizeof label);
    out.write(reinterpret_cast<const char*>(&s.source_pair.first),
              sizeof s.source_pair.first);
    out.write(reinterpret_cast<const char*>(&s.source_pair.second),
              sizeof s.source_pair.second);
    out.write(reinterpret_cast<const char*>(s.values.data()),
              static_cast<std::streamsize>(s.values.size() * sizeof(double)));
  }
}

inline TrainingSet load_training_set(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot open training set: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "gaborboost-pairs 1")
    throw FormatError(path + ": not a pairs file");
  TrainingSet set;
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool ended = false;
  while (std::getline(in, line)) {
    if (line == "end") {
      ended = true;
      break;
    }
    const auto sp = line.find(' ');
    if (sp == std::string::npos) throw FormatError(path + ": bad header line");
    const std::string key = line.substr(0, sp);
    const std::string value = line.substr(sp + 1);
    try {
      if (key == "rows") rows = std::stoull(value);
      else if (key == "cols") cols = std::stoull(value);
      else if (key == "intra") set.num_intra = std::stoull(value);
      else if (key == "extra") set.num_extra = std::stoull(value);
      else if (key == "seed") set.seed = std::stoull(value);
      else if (key == "layout") set.layout = FeatureLayout::parse(value);
      else throw FormatError(path + ": unknown header key " + key);
    } catch (const std::logic_error&) {
      throw FormatError(path + ": bad header value for " + key);
    }
  }
  if (!ended) throw FormatError(path + ": header not terminated");
  set.samples.resize(rows);
  for (auto& s : set.samples) {
    std::int32_t label = 0;
    in.read(reinterpret_cast<char*>(&label), sizeof label);
    in.read(reinterpret_cast<char*>(&s.source_pair.first),
            sizeof s.source_pair.first);
    in.read(reinterpret_cast<char*>(&s.source_pair.second),
            sizeof s.source_pair.second);
    s.label = label;
    s.values.resize(cols);
    in.read(reinterpret_cast<char*>(s.values.data()),
            static_cast<std::streamsize>(cols * sizeof(double)));
    if (!in) throw FormatError(path + ": truncated sample data");
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw FormatError(path + ": trailing bytes after sample data");
  set.validate();
  return set;
}

}  // namespace gaborboost
