#include "psfr/restore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "psfr/fft.hpp"

namespace psfr {

namespace {

std::vector<double> taper_1d(std::size_t n, double fraction) {
  std::vector<double> w(n, 1.0);
  if (fraction <= 0.0) return w;
  const double h = static_cast<double>(n / 2) + 1.0;
  const double flat = (1.0 - fraction) * h;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::abs(static_cast<double>(i) - static_cast<double>(n / 2));
    if (d > flat) w[i] = 0.5 * (1.0 + std::cos(std::numbers::pi * (d - flat) / (h - flat)));
  }
  return w;
}

// Finite-support ridge solution. With T the linear convolution matrix of
// psf_a restricted to kernel taps, T^H T is the autocorrelation of psf_a at
// tap-offset lags and T^H b the cross-correlation with the target, whose
// centre is placed where psf_a's centre lands (centre + anchor).
FilterKernel design_exact(const Grid<cplx>& a, const Grid<cplx>& b, double ridge, std::size_t kz, std::size_t kx) {
  const auto az = static_cast<std::ptrdiff_t>(a.rows());
  const auto ax = static_cast<std::ptrdiff_t>(a.cols());
  const auto lz = static_cast<std::ptrdiff_t>(kz);
  const auto lx = static_cast<std::ptrdiff_t>(kx);

  Grid<cplx> acf(2 * kz - 1, 2 * kx - 1);
  for (std::ptrdiff_t du = 1 - lz; du < lz; ++du)
    for (std::ptrdiff_t dv = 1 - lx; dv < lx; ++dv) {
      cplx s = 0.0;
      for (std::ptrdiff_t p = std::max<std::ptrdiff_t>(0, -du); p < std::min(az, az - du); ++p)
        for (std::ptrdiff_t q = std::max<std::ptrdiff_t>(0, -dv); q < std::min(ax, ax - dv); ++q)
          s += std::conj(a(p, q)) * a(p + du, q + dv);
      acf(du + lz - 1, dv + lx - 1) = s;
    }

  const std::size_t n = kz * kx;
  Eigen::MatrixXcd normal(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto du = static_cast<std::ptrdiff_t>(i / kx) - static_cast<std::ptrdiff_t>(j / kx);
      const auto dv = static_cast<std::ptrdiff_t>(i % kx) - static_cast<std::ptrdiff_t>(j % kx);
      normal(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acf(du + lz - 1, dv + lx - 1);
    }
  normal.diagonal().array() += ridge;

  // Target sample (m - hz, n - hx) sits at full-output position (m, n).
  const std::ptrdiff_t hz = lz / 2, hx = lx / 2;
  Eigen::VectorXcd rhs(static_cast<Eigen::Index>(n));
  for (std::ptrdiff_t i = 0; i < lz; ++i)
    for (std::ptrdiff_t j = 0; j < lx; ++j) {
      cplx s = 0.0;
      for (std::ptrdiff_t p = std::max<std::ptrdiff_t>(0, hz - i); p < std::min(az, az + hz - i); ++p)
        for (std::ptrdiff_t q = std::max<std::ptrdiff_t>(0, hx - j); q < std::min(ax, ax + hx - j); ++q)
          s += std::conj(a(p, q)) * b(p + i - hz, q + j - hx);
      rhs(i * lx + j) = s;
    }

  const Eigen::VectorXcd k = normal.ldlt().solve(rhs);
  Grid<cplx> taps(kz, kx);
  for (std::size_t i = 0; i < n; ++i) taps.values()[i] = k(static_cast<Eigen::Index>(i));
  if (!all_finite(taps.values())) throw NumericalError("design_filter: normal equations are singular");
  return FilterKernel(std::move(taps));
}

}  // namespace

FilterMethod parse_filter_method(const std::string& name) {
  if (name == "frequency") return FilterMethod::frequency;
  if (name == "exact") return FilterMethod::exact;
  throw std::invalid_argument("unknown filter method '" + name + "' (frequency or exact)");
}

const char* to_string(FilterMethod m) { return m == FilterMethod::exact ? "exact" : "frequency"; }

Grid<double> kernel_taper(std::size_t nz, std::size_t nx, double fraction) {
  if (fraction < 0.0 || fraction > 1.0) throw std::invalid_argument("kernel_taper: fraction must lie in [0, 1]");
  const auto wz = taper_1d(nz, fraction);
  const auto wx = taper_1d(nx, fraction);
  Grid<double> w(nz, nx);
  for (std::size_t r = 0; r < nz; ++r)
    for (std::size_t c = 0; c < nx; ++c) w(r, c) = wz[r] * wx[c];
  return w;
}

FilterKernel design_filter(const Psf& psf_a, const Psf& psf_i, const FilterDesign& design) {
  const Grid<cplx>& a = psf_a.patch.data;
  const Grid<cplx>& b = psf_i.patch.data;
  if (!a.same_shape(b)) throw std::invalid_argument("design_filter: PSF dims differ");
  if (psf_a.center != psf_i.center) throw std::invalid_argument("design_filter: PSF centres differ");
  if (!(design.eps > 0.0) || !std::isfinite(design.eps)) throw std::invalid_argument("design_filter: eps must be > 0");
  if (design.kernel_nz % 2 == 0 || design.kernel_nx % 2 == 0 || design.kernel_nz == 0 || design.kernel_nx == 0)
    throw std::invalid_argument("design_filter: kernel dims must be odd");

  const std::size_t nz = a.rows() + design.kernel_nz - 1;
  const std::size_t nx = a.cols() + design.kernel_nx - 1;
  Grid<cplx> spec_a = fft::zero_pad(a, nz, nx);
  Grid<cplx> spec_i = fft::zero_pad(b, nz, nx);
  fft::forward(spec_a);
  fft::forward(spec_i);

  double peak_power = 0.0;
  for (const cplx& v : spec_a.values()) peak_power = std::max(peak_power, std::norm(v));
  if (!(peak_power > 0.0)) throw NumericalError("design_filter: aberrated PSF is all zero");
  const double ridge = design.eps * peak_power;
  if (design.method == FilterMethod::exact) return design_exact(a, b, ridge, design.kernel_nz, design.kernel_nx);

  Grid<cplx> k = std::move(spec_i);
  for (std::size_t i = 0; i < k.size(); ++i) {
    const cplx ha = spec_a.values()[i];
    k.values()[i] = k.values()[i] * std::conj(ha) / (std::norm(ha) + ridge);
  }
  fft::inverse(k);

  const std::size_t hz = design.kernel_nz / 2;
  const std::size_t hx = design.kernel_nx / 2;
  const Grid<double> w = kernel_taper(design.kernel_nz, design.kernel_nx, design.taper);
  Grid<cplx> taps(design.kernel_nz, design.kernel_nx);
  for (std::size_t r = 0; r < design.kernel_nz; ++r) {
    const std::size_t sr = (r + nz - hz) % nz;
    for (std::size_t c = 0; c < design.kernel_nx; ++c) {
      const std::size_t sc = (c + nx - hx) % nx;
      taps(r, c) = k(sr, sc) * w(r, c);
    }
  }
  return FilterKernel(std::move(taps));
}

ComplexImage apply_filter(const ComplexImage& img, const FilterKernel& k) {
  if (k.taps.rows() > img.rows() || k.taps.cols() > img.cols())
    throw std::invalid_argument("apply_filter: kernel larger than image");
  return ComplexImage(fft::convolve_same(img.data, k.taps, k.anchor), img.sampling);
}

Grid<cplx> restored_response(const Psf& psf, const FilterKernel& k) {
  return fft::convolve_full_direct(psf.patch.data, k.taps);
}

double restoration_residual(const Psf& psf_a, const Psf& psf_i, const FilterKernel& k) {
  const Grid<cplx>& target = psf_i.patch.data;
  if (!psf_a.patch.data.same_shape(target)) throw std::invalid_argument("restoration_residual: PSF dims differ");
  double target_energy = 0.0;
  for (const cplx& v : target.values()) target_energy += std::norm(v);
  if (!(target_energy > 0.0)) throw NumericalError("restoration_residual: ideal PSF is all zero");

  Grid<cplx> diff = restored_response(psf_a, k);
  for (std::size_t r = 0; r < target.rows(); ++r)
    for (std::size_t c = 0; c < target.cols(); ++c) diff(r + k.anchor.row, c + k.anchor.col) -= target(r, c);
  double err = 0.0;
  for (const cplx& v : diff.values()) err += std::norm(v);
  return std::sqrt(err / target_energy);
}

}  // namespace psfr
