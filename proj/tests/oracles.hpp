#pragma once

// Independent reference implementations used only by tests. None of these
// call into the library's computational paths.

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

/// Kernel tap straight from the wavelet formula, evaluated with
/// std::complex arithmetic.
inline std::complex<double> gabor_tap(double f_max, double gamma, double eta,
                                      int U_index, int v, int V, int x,
                                      int y) {
  const double f = f_max / std::pow(std::sqrt(2.0), U_index);
  const double theta = std::numbers::pi * v / V;
  const double xr = x * std::cos(theta) + y * std::sin(theta);
  const double yr = -x * std::sin(theta) + y * std::cos(theta);
  const double a = f / gamma;
  const double b = f / eta;
  const std::complex<double> carrier =
      std::exp(std::complex<double>(0.0, 2.0 * std::numbers::pi * f * xr));
  return f * f / (std::numbers::pi * gamma * eta) *
         std::exp(-(a * a * xr * xr + b * b * yr * yr)) * carrier;
}

/// Naive correlation magnitude: for every output pixel, every kernel tap,
/// with an explicit bounds test for zero padding.
inline std::vector<double> correlate_magnitude(
    const std::vector<double>& image, int w, int h,
    const std::vector<std::complex<double>>& taps, int radius) {
  const int side = 2 * radius + 1;
  std::vector<double> out(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::complex<double> acc = 0.0;
      for (int ky = 0; ky < side; ++ky) {
        for (int kx = 0; kx < side; ++kx) {
          const int ix = x + kx - radius;
          const int iy = y + ky - radius;
          if (ix < 0 || iy < 0 || ix >= w || iy >= h) continue;
          acc += image[static_cast<std::size_t>(iy) * w + ix] *
                 taps[static_cast<std::size_t>(ky) * side + kx];
        }
      }
      out[static_cast<std::size_t>(y) * w + x] = std::abs(acc);
    }
  }
  return out;
}

/// MI in bits as H(a) + H(b) - H(a, b) from a std::map histogram.
inline double mutual_information(const std::vector<std::int8_t>& a,
                                 const std::vector<std::int8_t>& b) {
  std::map<int, double> pa;
  std::map<int, double> pb;
  std::map<std::pair<int, int>, double> pab;
  const double n = static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    pa[a[i]] += 1.0 / n;
    pb[b[i]] += 1.0 / n;
    pab[{a[i], b[i]}] += 1.0 / n;
  }
  auto entropy = [](const auto& hist) {
    double h = 0.0;
    for (const auto& [k, p] : hist)
      if (p > 0) h -= p * std::log(p);
    return h / std::log(2.0);
  };
  return entropy(pa) + entropy(pb) - entropy(pab);
}

inline double entropy(const std::vector<std::int8_t>& a) {
  return mutual_information(a, a);
}

inline std::vector<std::int8_t> random_row(std::size_t n, std::mt19937_64& rng,
                                           double p_plus = 0.5) {
  std::bernoulli_distribution coin(p_plus);
  std::vector<std::int8_t> row(n);
  for (auto& v : row) v = coin(rng) ? 1 : -1;
  return row;
}

}  // namespace oracle
