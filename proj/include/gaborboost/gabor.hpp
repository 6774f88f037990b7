#pragma once

// Gabor kernel generation, magnitude responses and feature vectors.
//
// Kernel taps follow
//   phi(x, y) = f^2 / (pi * gamma * eta) * exp(-(alpha^2 x'^2 + beta^2 y'^2))
//               * exp(i 2 pi f x')
//   x' =  x cos(theta) + y sin(theta)
//   y' = -x sin(theta) + y cos(theta)
//   alpha = f / gamma, beta = f / eta
// with f_u = f_max / sqrt(2^u) and theta_v = v * pi / V.
//
// Responses are correlations (no kernel flip) with zero padding outside the
// image; only the magnitude is ever exposed.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gaborboost/error.hpp"

namespace gaborboost {

struct GaborBankConfig {
  double f_max = 0.25;
  double gamma = std::numbers::sqrt2;
  double eta = std::numbers::sqrt2;
  int num_scales = 5;
  int num_orientations = 8;
  int kernel_radius = 16;
  int downsample_step = 4;

  int num_kernels() const { return num_scales * num_orientations; }

  void validate() const {
    if (!(f_max > 0.0) || !std::isfinite(f_max))
      throw ParameterError("f_max must be > 0");
    if (!(gamma > 0.0) || !std::isfinite(gamma))
      throw ParameterError("gamma must be > 0");
    if (!(eta > 0.0) || !std::isfinite(eta))
      throw ParameterError("eta must be > 0");
    if (num_scales < 1) throw ParameterError("num_scales must be >= 1");
    if (num_orientations < 1)
      throw ParameterError("num_orientations must be >= 1");
    if (kernel_radius < 1) throw ParameterError("kernel_radius must be >= 1");
    if (downsample_step < 1)
      throw ParameterError("downsample_step must be >= 1");
  }

  bool operator==(const GaborBankConfig&) const = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw FormatError("bad numeric value for '" + key + "': " + text);
  }
}

inline int parse_int(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const long value = std::stol(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return static_cast<int>(value);
  } catch (const std::exception&) {
    throw FormatError("bad integer value for '" + key + "': " + text);
  }
}

}  // namespace detail

/// Applies `key = value` lines on top of `base`. Blank lines and '#'
/// comments are ignored; unknown keys are an error.
inline GaborBankConfig parse_bank_config(std::istream& in,
                                         GaborBankConfig base = {}) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw FormatError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key == "f_max") {
      base.f_max = detail::parse_double(key, value);
    } else if (key == "gamma") {
      base.gamma = detail::parse_double(key, value);
    } else if (key == "eta") {
      base.eta = detail::parse_double(key, value);
    } else if (key == "num_scales") {
      base.num_scales = detail::parse_int(key, value);
    } else if (key == "num_orientations") {
      base.num_orientations = detail::parse_int(key, value);
    } else if (key == "kernel_radius") {
      base.kernel_radius = detail::parse_int(key, value);
    } else if (key == "downsample_step") {
      base.downsample_step = detail::parse_int(key, value);
    } else {
      throw FormatError("config line " + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
    }
  }
  base.validate();
  return base;
}

inline GaborBankConfig load_bank_config(const std::string& path,
                                        GaborBankConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config file: " + path);
  return parse_bank_config(in, base);
}

/// Gray image with pixels in [0, 1], row-major.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(int w, int h, double fill = 0.0)
      : width(w), height(h), pixels(checked_area(w, h), fill) {}
  Image(int w, int h, std::vector<double> data)
      : width(w), height(h), pixels(std::move(data)) {
    if (pixels.size() != checked_area(w, h))
      throw ParameterError("image pixel count does not match dimensions");
  }

  double at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  double& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }

  void validate() const {
    if (width < 1 || height < 1)
      throw ParameterError("image must be at least 1x1");
    if (pixels.size() != static_cast<std::size_t>(width) * height)
      throw ParameterError("image pixel count does not match dimensions");
    for (double p : pixels)
      if (!(p >= 0.0 && p <= 1.0))
        throw ParameterError("image pixel outside [0, 1]");
  }

  bool operator==(const Image&) const = default;

 private:
  static std::size_t checked_area(int w, int h) {
    if (w < 1 || h < 1) throw ParameterError("image must be at least 1x1");
    return static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  }
};

/// Sampled complex taps of one wavelet. Taps are stored row-major over
/// offsets y in [-radius, radius] (rows) and x in [-radius, radius].
struct GaborKernel {
  int scale_index = 0;
  int orientation_index = 0;
  double frequency = 0.0;  // f_u, cycles per pixel
  double theta = 0.0;      // radians
  int radius = 0;
  std::vector<double> real;
  std::vector<double> imag;

  int side() const { return 2 * radius + 1; }

  std::complex<double> tap(int x, int y) const {
    const auto k = static_cast<std::size_t>(y + radius) * side() + (x + radius);
    return {real[k], imag[k]};
  }
};

inline GaborKernel make_kernel(const GaborBankConfig& config, int u, int v) {
  config.validate();
  if (u < 0 || u >= config.num_scales)
    throw ParameterError("scale index " + std::to_string(u) + " out of range");
  if (v < 0 || v >= config.num_orientations)
    throw ParameterError("orientation index " + std::to_string(v) +
                         " out of range");

  GaborKernel k;
  k.scale_index = u;
  k.orientation_index = v;
  k.frequency = config.f_max / std::sqrt(std::pow(2.0, u));
  k.theta = static_cast<double>(v) / config.num_orientations * std::numbers::pi;
  k.radius = config.kernel_radius;

  const double f = k.frequency;
  const double alpha = f / config.gamma;
  const double beta = f / config.eta;
  const double norm = f * f / (std::numbers::pi * config.gamma * config.eta);
  const double c = std::cos(k.theta);
  const double s = std::sin(k.theta);

  const auto n = static_cast<std::size_t>(k.side()) * k.side();
  k.real.resize(n);
  k.imag.resize(n);
  std::size_t idx = 0;
  for (int y = -k.radius; y <= k.radius; ++y) {
    for (int x = -k.radius; x <= k.radius; ++x, ++idx) {
      const double xr = x * c + y * s;
      const double yr = -x * s + y * c;
      const double envelope =
          norm * std::exp(-(alpha * alpha * xr * xr + beta * beta * yr * yr));
      const double phase = 2.0 * std::numbers::pi * f * xr;
      k.real[idx] = envelope * std::cos(phase);
      k.imag[idx] = envelope * std::sin(phase);
    }
  }
  return k;
}

/// U*V kernels ordered u-major, then v. This order defines feature indices.
inline std::vector<GaborKernel> make_bank(const GaborBankConfig& config) {
  config.validate();
  std::vector<GaborKernel> bank;
  bank.reserve(static_cast<std::size_t>(config.num_kernels()));
  for (int u = 0; u < config.num_scales; ++u)
    for (int v = 0; v < config.num_orientations; ++v)
      bank.push_back(make_kernel(config, u, v));
  return bank;
}

/// |sum_{dx,dy} I(x+dx, y+dy) * k(dx, dy)| with zero padding.
inline double response_at(const Image& image, const GaborKernel& kernel, int x,
                          int y) {
  const int r = kernel.radius;
  const int side = kernel.side();
  const int dy0 = std::max(-r, -y);
  const int dy1 = std::min(r, image.height - 1 - y);
  const int dx0 = std::max(-r, -x);
  const int dx1 = std::min(r, image.width - 1 - x);
  double re = 0.0;
  double im = 0.0;
  for (int dy = dy0; dy <= dy1; ++dy) {
    const double* row =
        image.pixels.data() + static_cast<std::size_t>(y + dy) * image.width + x;
    const auto base = static_cast<std::size_t>(dy + r) * side + r;
    const double* kr = kernel.real.data() + base;
    const double* ki = kernel.imag.data() + base;
    for (int dx = dx0; dx <= dx1; ++dx) {
      re += row[dx] * kr[dx];
      im += row[dx] * ki[dx];
    }
  }
  return std::hypot(re, im);
}

/// Row-major grid of non-negative reals.
struct Grid {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
};

inline Grid convolve_magnitude(const Image& image, const GaborKernel& kernel) {
  Grid out{image.width, image.height,
           std::vector<double>(image.pixels.size())};
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      out.values[static_cast<std::size_t>(y) * image.width + x] =
          response_at(image, kernel, x, y);
  return out;
}

/// Decoded position of a feature index.
struct FeaturePosition {
  int u = 0;
  int v = 0;
  int row = 0;
  int col = 0;
  int x = 0;  // pixel column = col * step
  int y = 0;  // pixel row = row * step

  bool operator==(const FeaturePosition&) const = default;
};

/// Describes how a feature vector is laid out: bank parameters plus the
/// image geometry. index = ((u*V + v)*rows + row)*cols + col.
struct FeatureLayout {
  GaborBankConfig bank;
  int width = 0;
  int height = 0;

  int step() const { return bank.downsample_step; }
  int cols() const { return (width + step() - 1) / step(); }
  int rows() const { return (height + step() - 1) / step(); }
  std::size_t size() const {
    return static_cast<std::size_t>(bank.num_kernels()) * rows() * cols();
  }

  std::size_t encode(int u, int v, int row, int col) const {
    if (u < 0 || u >= bank.num_scales || v < 0 || v >= bank.num_orientations ||
        row < 0 || row >= rows() || col < 0 || col >= cols())
      throw ParameterError("feature coordinate out of range");
    return ((static_cast<std::size_t>(u) * bank.num_orientations + v) *
                rows() +
            row) *
               cols() +
           col;
  }

  FeaturePosition decode(std::size_t index) const {
    if (index >= size())
      throw ParameterError("feature index " + std::to_string(index) +
                           " out of range (size " + std::to_string(size()) +
                           ")");
    FeaturePosition p;
    p.col = static_cast<int>(index % cols());
    index /= cols();
    p.row = static_cast<int>(index % rows());
    index /= rows();
    p.v = static_cast<int>(index % bank.num_orientations);
    p.u = static_cast<int>(index / bank.num_orientations);
    p.x = p.col * step();
    p.y = p.row * step();
    return p;
  }

  /// Single-line text form, parsed back by parse().
  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    os << "width=" << width << " height=" << height
       << " f_max=" << bank.f_max << " gamma=" << bank.gamma
       << " eta=" << bank.eta << " num_scales=" << bank.num_scales
       << " num_orientations=" << bank.num_orientations
       << " kernel_radius=" << bank.kernel_radius
       << " downsample_step=" << bank.downsample_step;
    return os.str();
  }

  static FeatureLayout parse(const std::string& text) {
    std::istringstream is(text);
    std::string token;
    std::ostringstream bank_text;
    FeatureLayout layout;
    bool have_w = false;
    bool have_h = false;
    while (is >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos)
        throw FormatError("bad layout token: " + token);
      const std::string key = token.substr(0, eq);
      const std::string value = token.substr(eq + 1);
      if (key == "width") {
        layout.width = detail::parse_int(key, value);
        have_w = true;
      } else if (key == "height") {
        layout.height = detail::parse_int(key, value);
        have_h = true;
      } else {
        bank_text << key << " = " << value << "\n";
      }
    }
    if (!have_w || !have_h)
      throw FormatError("layout is missing width/height: " + text);
    std::istringstream bank_in(bank_text.str());
    layout.bank = parse_bank_config(bank_in);
    layout.validate();
    return layout;
  }

  void validate() const {
    bank.validate();
    if (width < 1 || height < 1)
      throw ParameterError("layout image size must be at least 1x1");
  }

  bool operator==(const FeatureLayout&) const = default;
};

struct FeatureVector {
  FeatureLayout layout;
  std::vector<double> values;
};

/// Kernels plus the configuration that produced them.
class GaborBank {
 public:
  explicit GaborBank(GaborBankConfig config)
      : config_(config), kernels_(make_bank(config)) {}

  const GaborBankConfig& config() const { return config_; }
  const std::vector<GaborKernel>& kernels() const { return kernels_; }
  const GaborKernel& kernel(int u, int v) const {
    return kernels_[static_cast<std::size_t>(u) * config_.num_orientations + v];
  }

  FeatureLayout layout_for(int width, int height) const {
    FeatureLayout layout{config_, width, height};
    layout.validate();
    return layout;
  }

 private:
  GaborBankConfig config_;
  std::vector<GaborKernel> kernels_;
};

/// Magnitudes on the stride grid of every kernel, concatenated u-major, then
/// v, then row-major grid position.
inline FeatureVector extract_features(const Image& image,
                                      const GaborBank& bank) {
  image.validate();
  FeatureVector fv{bank.layout_for(image.width, image.height), {}};
  const auto& layout = fv.layout;
  fv.values.reserve(layout.size());
  const int step = layout.step();
  for (const auto& kernel : bank.kernels())
    for (int row = 0; row < layout.rows(); ++row)
      for (int col = 0; col < layout.cols(); ++col)
        fv.values.push_back(response_at(image, kernel, col * step, row * step));
  return fv;
}

/// Only the requested components, each from one local correlation.
inline std::vector<double> extract_selected(
    const Image& image, const GaborBank& bank,
    std::span<const std::size_t> selected) {
  image.validate();
  const FeatureLayout layout = bank.layout_for(image.width, image.height);
  std::vector<double> out;
  out.reserve(selected.size());
  for (std::size_t index : selected) {
    const FeaturePosition p = layout.decode(index);
    out.push_back(response_at(image, bank.kernel(p.u, p.v), p.x, p.y));
  }
  return out;
}

}  // namespace gaborboost
