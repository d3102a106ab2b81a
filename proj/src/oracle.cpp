#include "psfr/oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace psfr::oracle {

Grid<cplx> dft2(const Grid<cplx>& g) {
  const std::size_t nz = g.rows();
  const std::size_t nx = g.cols();
  Grid<cplx> out(nz, nx);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t u = 0; u < nz; ++u)
    for (std::size_t v = 0; v < nx; ++v) {
      cplx acc{};
      for (std::size_t r = 0; r < nz; ++r)
        for (std::size_t c = 0; c < nx; ++c) {
          const double phase = two_pi * (static_cast<double>((u * r) % nz) / static_cast<double>(nz) +
                                         static_cast<double>((v * c) % nx) / static_cast<double>(nx));
          acc += g(r, c) * std::polar(1.0, -phase);
        }
      out(u, v) = acc;
    }
  return out;
}

FilterKernel filter_normal_equations(const Psf& psf_a, const Psf& psf_i, double eps, std::size_t kernel_nz,
                                     std::size_t kernel_nx) {
  const Grid<cplx>& a = psf_a.patch.data;
  const Grid<cplx>& b = psf_i.patch.data;
  const std::size_t nz = a.rows() + kernel_nz - 1;
  const std::size_t nx = a.cols() + kernel_nx - 1;
  const std::size_t n = nz * nx;

  Grid<cplx> a_pad(nz, nx);
  Grid<cplx> b_pad(nz, nx);
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) {
      a_pad(r, c) = a(r, c);
      b_pad(r, c) = b(r, c);
    }

  double peak = 0.0;
  const Grid<cplx> spectrum = dft2(a_pad);
  for (const cplx& v : spectrum.values()) peak = std::max(peak, std::norm(v));
  const double lambda = eps * peak;

  Eigen::MatrixXcd conv(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::VectorXcd rhs(static_cast<Eigen::Index>(n));
  for (std::size_t pr = 0; pr < nz; ++pr)
    for (std::size_t pc = 0; pc < nx; ++pc) {
      const auto p = static_cast<Eigen::Index>(pr * nx + pc);
      rhs(p) = b_pad(pr, pc);
      for (std::size_t qr = 0; qr < nz; ++qr)
        for (std::size_t qc = 0; qc < nx; ++qc)
          conv(p, static_cast<Eigen::Index>(qr * nx + qc)) = a_pad((pr + nz - qr) % nz, (pc + nx - qc) % nx);
    }

  Eigen::MatrixXcd normal = conv.adjoint() * conv;
  normal.diagonal().array() += lambda;
  const Eigen::VectorXcd k = normal.ldlt().solve(conv.adjoint() * rhs);

  const std::size_t hz = kernel_nz / 2;
  const std::size_t hx = kernel_nx / 2;
  Grid<cplx> taps(kernel_nz, kernel_nx);
  for (std::size_t r = 0; r < kernel_nz; ++r)
    for (std::size_t c = 0; c < kernel_nx; ++c) {
      const std::size_t sr = (r + nz - hz) % nz;
      const std::size_t sc = (c + nx - hx) % nx;
      taps(r, c) = k(static_cast<Eigen::Index>(sr * nx + sc));
    }
  return FilterKernel(std::move(taps));
}

Grid<cplx> convolve_same(const Grid<cplx>& img, const Grid<cplx>& kernel, Index2 anchor) {
  Grid<cplx> out(img.rows(), img.cols());
  const auto rows = static_cast<std::ptrdiff_t>(img.rows());
  const auto cols = static_cast<std::ptrdiff_t>(img.cols());
  for (std::ptrdiff_t r = 0; r < rows; ++r)
    for (std::ptrdiff_t c = 0; c < cols; ++c) {
      cplx acc{};
      for (std::size_t i = 0; i < kernel.rows(); ++i)
        for (std::size_t j = 0; j < kernel.cols(); ++j) {
          const auto sr = r - (static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(anchor.row));
          const auto sc = c - (static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(anchor.col));
          if (sr < 0 || sr >= rows || sc < 0 || sc >= cols) continue;
          acc += kernel(i, j) * img(static_cast<std::size_t>(sr), static_cast<std::size_t>(sc));
        }
      out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = acc;
    }
  return out;
}

double coherence_at(const Grid<cplx>& img, const FilterKernel& k, std::size_t z, std::size_t x, std::size_t m0) {
  const std::size_t kz = k.taps.rows();
  const std::size_t kx = k.taps.cols();
  Grid<cplx> product(kz, kx);
  for (std::size_t i = 0; i < kz; ++i)
    for (std::size_t j = 0; j < kx; ++j) {
      const auto sr = static_cast<std::ptrdiff_t>(z) - (static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(k.anchor.row));
      const auto sc = static_cast<std::ptrdiff_t>(x) - (static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(k.anchor.col));
      if (sr < 0 || sc < 0 || sr >= static_cast<std::ptrdiff_t>(img.rows()) || sc >= static_cast<std::ptrdiff_t>(img.cols()))
        continue;
      product(i, j) = k.taps(i, j) * img(static_cast<std::size_t>(sr), static_cast<std::size_t>(sc));
    }
  const Grid<cplx> spectrum = dft2(product);
  double low = 0.0;
  double total = 0.0;
  for (std::size_t u = 0; u < kz; ++u)
    for (std::size_t v = 0; v < kx; ++v) {
      const double p = std::norm(spectrum(u, v));
      total += p;
      const std::size_t du = std::min(u, kz - u);
      const std::size_t dv = std::min(v, kx - v);
      if (du <= m0 && dv <= m0) low += p;
    }
  return total > 0.0 ? low / total : 0.0;
}

double relative_l2(const Grid<cplx>& a, const Grid<cplx>& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("relative_l2: shape mismatch");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a.values()[i] - b.values()[i]);
    den += std::norm(b.values()[i]);
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(num / den);
}

}  // namespace psfr::oracle
