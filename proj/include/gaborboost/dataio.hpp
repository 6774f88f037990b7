#pragma once

// PGM (P5, maxval 255) I/O, dataset manifests, gallery/probe splitting and
// the synthetic identity generator used in place of a licensed face set.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gaborboost/error.hpp"
#include "gaborboost/gabor.hpp"

namespace gaborboost {

namespace detail {

class PgmCursor {
 public:
  explicit PgmCursor(const std::string& bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError("PGM: " + what + " at byte offset " +
                      std::to_string(pos_));
  }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long read_uint() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size()) fail("unexpected end of header");
    if (!std::isdigit(static_cast<unsigned char>(bytes_[pos_])))
      fail("expected a decimal number");
    long value = 0;
    while (pos_ < bytes_.size() &&
           std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000) fail("header number too large");
      ++pos_;
    }
    return value;
  }

  void expect_magic() {
    if (bytes_.size() < 2) fail("file too short for magic number");
    if (bytes_[0] != 'P' || bytes_[1] != '5') fail("expected magic 'P5'");
    pos_ = 2;
  }

  void expect_single_space() {
    if (pos_ >= bytes_.size() ||
        !std::isspace(static_cast<unsigned char>(bytes_[pos_])))
      fail("expected whitespace after maxval");
    ++pos_;
  }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Image decode_pgm(const std::string& bytes) {
  detail::PgmCursor cur(bytes);
  cur.expect_magic();
  const long width = cur.read_uint();
  const long height = cur.read_uint();
  const long maxval = cur.read_uint();
  if (width < 1 || height < 1) cur.fail("zero image dimension");
  if (maxval != 255) cur.fail("unsupported maxval " + std::to_string(maxval));
  cur.expect_single_space();

  const auto expected = static_cast<std::size_t>(width) * height;
  const std::size_t available = bytes.size() - cur.offset();
  if (available != expected)
    cur.fail("pixel payload is " + std::to_string(available) +
             " bytes, expected " + std::to_string(expected));

  Image img(static_cast<int>(width), static_cast<int>(height));
  for (std::size_t i = 0; i < expected; ++i)
    img.pixels[i] =
        static_cast<unsigned char>(bytes[cur.offset() + i]) / 255.0;
  return img;
}

inline Image load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open PGM file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return decode_pgm(ss.str());
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline std::string encode_pgm(const Image& image) {
  image.validate();
  std::string out = "P5\n" + std::to_string(image.width) + " " +
                    std::to_string(image.height) + "\n255\n";
  out.reserve(out.size() + image.pixels.size());
  for (double p : image.pixels)
    out.push_back(static_cast<char>(
        static_cast<unsigned char>(std::lround(p * 255.0))));
  return out;
}

inline void save_pgm(const Image& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot write PGM file: " + path);
  const std::string bytes = encode_pgm(image);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

enum class Split { gallery, probe, train };

inline std::string to_string(Split s) {
  switch (s) {
    case Split::gallery:
      return "gallery";
    case Split::probe:
      return "probe";
    case Split::train:
      return "train";
  }
  return "gallery";
}

inline Split parse_split(const std::string& s) {
  if (s == "gallery") return Split::gallery;
  if (s == "probe") return Split::probe;
  if (s == "train") return Split::train;
  throw FormatError("unknown split tag '" + s + "'");
}

struct ManifestEntry {
  std::string identity;
  std::string path;
  Split split = Split::gallery;

  bool operator==(const ManifestEntry&) const = default;
};

using DatasetManifest = std::vector<ManifestEntry>;

/// Reads `<identity>\t<path>[\t<split>]` lines. A missing split column
/// means gallery. Relative paths are resolved against the manifest's
/// directory.
inline DatasetManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open manifest: " + path);
  const auto base = std::filesystem::path(path).parent_path();
  DatasetManifest entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::istringstream ls(line);
    for (std::string col; std::getline(ls, col, '\t');) cols.push_back(col);
    if (cols.size() < 2 || cols.size() > 3 || cols[0].empty() ||
        cols[1].empty())
      throw FormatError(path + ":" + std::to_string(line_no) +
                        ": expected <identity>\\t<path>[\\t<split>]");
    ManifestEntry e;
    e.identity = cols[0];
    std::filesystem::path p(cols[1]);
    e.path = p.is_absolute() ? p.string() : (base / p).string();
    e.split = cols.size() == 3 ? parse_split(cols[2]) : Split::gallery;
    entries.push_back(std::move(e));
  }
  return entries;
}

/// Writes paths verbatim; callers pass paths relative to the manifest when
/// the dataset should be relocatable.
inline void write_manifest(const DatasetManifest& entries,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot write manifest: " + path);
  for (const auto& e : entries)
    out << e.identity << '\t' << e.path << '\t' << to_string(e.split) << '\n';
}

/// Per identity (first-appearance order), a seeded shuffle picks
/// `gallery_per_id` gallery images; the rest become probes.
inline DatasetManifest split_dataset(const DatasetManifest& entries,
                                     int gallery_per_id, std::uint64_t seed) {
  if (gallery_per_id < 1) throw ParameterError("gallery_per_id must be >= 1");
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> by_id;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto [it, inserted] = by_id.try_emplace(entries[i].identity);
    if (inserted) order.push_back(entries[i].identity);
    it->second.push_back(i);
  }
  DatasetManifest out = entries;
  for (std::size_t id = 0; id < order.size(); ++id) {
    auto& members = by_id[order[id]];
    if (static_cast<int>(members.size()) <= gallery_per_id)
      throw CapacityError("identity '" + order[id] + "' has " +
                          std::to_string(members.size()) +
                          " images; need more than " +
                          std::to_string(gallery_per_id));
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(id)};
    std::mt19937 rng(seq);
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t k = 0; k < members.size(); ++k)
      out[members[k]].split =
          static_cast<int>(k) < gallery_per_id ? Split::gallery : Split::probe;
  }
  return out;
}

struct SyntheticSpec {
  int num_identities = 20;
  int images_per_identity = 3;
  int image_size = 64;
  double noise_sigma = 0.05;
  std::uint64_t seed = 7;

  void validate() const {
    if (num_identities < 1 || images_per_identity < 1 || image_size < 1)
      throw ParameterError("synthetic counts must be >= 1");
    if (!(noise_sigma >= 0.0)) throw ParameterError("noise_sigma must be >= 0");
  }
};

struct LabeledImage {
  std::string identity;
  Image image;
};

inline std::string synthetic_identity_name(int id) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "id%03d", id);
  return buf;
}

/// Identity base pattern: three oriented sinusoidal gratings plus a Gaussian
/// blob, all drawn from an identity-seeded stream. Each image adds i.i.d.
/// Gaussian pixel noise and clamps to [0, 1].
inline std::vector<LabeledImage> generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const int n = spec.image_size;
  const auto seed_lo = static_cast<std::uint32_t>(spec.seed);
  const auto seed_hi = static_cast<std::uint32_t>(spec.seed >> 32);
  constexpr double two_pi = 2.0 * std::numbers::pi;

  std::vector<LabeledImage> out;
  out.reserve(static_cast<std::size_t>(spec.num_identities) *
              spec.images_per_identity);
  for (int id = 0; id < spec.num_identities; ++id) {
    std::seed_seq seq{seed_lo, seed_hi, static_cast<std::uint32_t>(id), 0u};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    struct Grating {
      double freq, theta, phase;
    };
    Grating gratings[3];
    for (auto& g : gratings) {
      g.freq = 0.04 + 0.11 * unit(rng);
      g.theta = std::numbers::pi * unit(rng);
      g.phase = two_pi * unit(rng);
    }
    const double cx = n * (0.25 + 0.5 * unit(rng));
    const double cy = n * (0.25 + 0.5 * unit(rng));
    const double blob_sigma = n / 8.0;

    Image base(n, n);
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        double value = 0.4;
        for (const auto& g : gratings) {
          const double t = x * std::cos(g.theta) + y * std::sin(g.theta);
          value += 0.12 * std::cos(two_pi * g.freq * t + g.phase);
        }
        const double dx = x - cx;
        const double dy = y - cy;
        value += 0.35 * std::exp(-(dx * dx + dy * dy) /
                                 (2.0 * blob_sigma * blob_sigma));
        base.at(x, y) = value;
      }
    }

    for (int k = 0; k < spec.images_per_identity; ++k) {
      std::seed_seq noise_seq{seed_lo, seed_hi, static_cast<std::uint32_t>(id),
                              static_cast<std::uint32_t>(k + 1)};
      std::mt19937_64 noise_rng(noise_seq);
      std::normal_distribution<double> noise(0.0, 1.0);
      Image img = base;
      for (double& p : img.pixels) {
        if (spec.noise_sigma > 0.0) p += spec.noise_sigma * noise(noise_rng);
        p = std::clamp(p, 0.0, 1.0);
      }
      out.push_back({synthetic_identity_name(id), std::move(img)});
    }
  }
  return out;
}

/// Materializes a synthetic dataset as PGM files plus `manifest.tsv` with
/// split tags, so downstream commands treat it like any other dataset.
/// Returns the manifest with paths relative to `dir`.
inline DatasetManifest write_synthetic_dataset(const SyntheticSpec& spec,
                                               const std::string& dir,
                                               int gallery_per_id,
                                               std::uint64_t split_seed) {
  const auto images = generate_synthetic(spec);
  std::filesystem::create_directories(dir);
  DatasetManifest manifest;
  std::map<std::string, int> counter;
  for (const auto& li : images) {
    const int k = counter[li.identity]++;
    const std::string name = li.identity + "_" + std::to_string(k) + ".pgm";
    save_pgm(li.image, (std::filesystem::path(dir) / name).string());
    manifest.push_back({li.identity, name, Split::gallery});
  }
  if (spec.images_per_identity > gallery_per_id)
    manifest = split_dataset(manifest, gallery_per_id, split_seed);
  write_manifest(manifest, (std::filesystem::path(dir) / "manifest.tsv").string());
  return manifest;
}

}  // namespace gaborboost
