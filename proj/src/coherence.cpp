#include "psfr/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace psfr {

namespace {

// Twiddles exp(-2 pi i u n / len) for u in [-m0, m0], laid out [u + m0][n].
std::vector<cplx> twiddles(std::size_t len, std::size_t m0) {
  const std::size_t n_bins = 2 * m0 + 1;
  std::vector<cplx> tw(n_bins * len);
  for (std::size_t b = 0; b < n_bins; ++b) {
    const double u = static_cast<double>(b) - static_cast<double>(m0);
    for (std::size_t n = 0; n < len; ++n) {
      // Reduce the phase index mod len so that u*n stays small.
      const auto un = static_cast<double>(
          (static_cast<long long>(u) * static_cast<long long>(n)) % static_cast<long long>(len));
      tw[b * len + n] = std::polar(1.0, -2.0 * std::numbers::pi * un / static_cast<double>(len));
    }
  }
  return tw;
}

}  // namespace

CoherenceMap coherence_map(const ComplexImage& img, const FilterKernel& k, const CoherenceOptions& opts) {
  const std::size_t kz = k.taps.rows();
  const std::size_t kx = k.taps.cols();
  if (kz > img.rows() || kx > img.cols()) throw std::invalid_argument("coherence_map: kernel larger than image");
  const std::size_t limit = opts.axes == CoherenceAxes::both ? std::min(kz / 2, kx / 2) : kx / 2;
  if (opts.m0 > limit) throw std::invalid_argument("coherence_map: m0 exceeds the kernel half-size");

  const std::size_t m0 = opts.m0;
  const std::size_t n_bins = 2 * m0 + 1;
  const std::vector<cplx> tw_x = twiddles(kx, m0);
  const std::vector<cplx> tw_z = twiddles(kz, m0);
  const bool both = opts.axes == CoherenceAxes::both;
  const double n_points = both ? static_cast<double>(kz * kx) : static_cast<double>(kx);

  const auto rows = static_cast<std::ptrdiff_t>(img.rows());
  const auto cols = static_cast<std::ptrdiff_t>(img.cols());
  const auto az = static_cast<std::ptrdiff_t>(k.anchor.row);
  const auto ax = static_cast<std::ptrdiff_t>(k.anchor.col);
  Grid<double> w(img.rows(), img.cols());

  // Pixels are independent; no reduction crosses pixels.
#pragma omp parallel
  {
    std::vector<cplx> row_bins(kz * n_bins);
    std::vector<cplx> product(kx);
#pragma omp for schedule(static)
    for (std::ptrdiff_t z = 0; z < rows; ++z) {
      for (std::ptrdiff_t x = 0; x < cols; ++x) {
        double energy = 0.0;
        double low = 0.0;
        for (std::size_t i = 0; i < kz; ++i) {
          const std::ptrdiff_t sz = z - (static_cast<std::ptrdiff_t>(i) - az);
          cplx* bins = &row_bins[i * n_bins];
          std::fill(bins, bins + n_bins, cplx{});
          if (sz < 0 || sz >= rows) continue;
          const auto src = img.data.row(static_cast<std::size_t>(sz));
          const auto taps = k.taps.row(i);
          for (std::size_t j = 0; j < kx; ++j) {
            const std::ptrdiff_t sx = x - (static_cast<std::ptrdiff_t>(j) - ax);
            product[j] = (sx < 0 || sx >= cols) ? cplx{} : taps[j] * src[static_cast<std::size_t>(sx)];
            energy += std::norm(product[j]);
          }
          for (std::size_t v = 0; v < n_bins; ++v) {
            cplx acc{};
            const cplx* t = &tw_x[v * kx];
            for (std::size_t j = 0; j < kx; ++j) acc += product[j] * t[j];
            bins[v] = acc;
            if (!both) low += std::norm(acc);
          }
        }
        if (both) {
          for (std::size_t u = 0; u < n_bins; ++u) {
            const cplx* t = &tw_z[u * kz];
            for (std::size_t v = 0; v < n_bins; ++v) {
              cplx acc{};
              for (std::size_t i = 0; i < kz; ++i) acc += t[i] * row_bins[i * n_bins + v];
              low += std::norm(acc);
            }
          }
        }
        double ratio = energy > 0.0 ? low / (n_points * energy) : 0.0;
        w(static_cast<std::size_t>(z), static_cast<std::size_t>(x)) = std::clamp(ratio, 0.0, 1.0);
      }
    }
  }
  return CoherenceMap(std::move(w));
}

ComplexImage apply_weighting(const ComplexImage& img, const CoherenceMap& w, double p) {
  if (!img.data.same_shape(w.w)) throw std::invalid_argument("apply_weighting: shape mismatch");
  if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("apply_weighting: exponent must be >= 0");
  if (p == 0.0) return img;
  Grid<cplx> out = img.data;
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] *= std::pow(w.w.values()[i], p);
  return ComplexImage(std::move(out), img.sampling);
}

EnvelopeImage apply_weighting(const EnvelopeImage& env, const CoherenceMap& w, double p) {
  if (!env.env.same_shape(w.w)) throw std::invalid_argument("apply_weighting: shape mismatch");
  if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("apply_weighting: exponent must be >= 0");
  if (p == 0.0) return env;
  Grid<double> out = env.env;
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] *= std::pow(w.w.values()[i], p);
  return EnvelopeImage(std::move(out), env.sampling);
}

}  // namespace psfr
