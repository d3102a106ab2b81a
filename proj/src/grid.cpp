#include "psfr/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace psfr {

GridSpec GridSpec::centered(Point2 centre, std::size_t nx, std::size_t nz, double dx, double dz) {
  GridSpec g;
  g.nx = nx;
  g.nz = nz;
  g.sampling.dx = dx;
  g.sampling.dz = dz;
  g.sampling.x0 = centre.x - static_cast<double>(nx / 2) * dx;
  g.sampling.z0 = centre.z - static_cast<double>(nz / 2) * dz;
  return g;
}

void GridSpec::validate() const {
  if (nx == 0 || nz == 0) throw std::invalid_argument("grid: empty grid");
  if (!(sampling.dx > 0.0) || !(sampling.dz > 0.0)) throw std::invalid_argument("grid: dx and dz must be > 0");
  if (!std::isfinite(sampling.x0) || !std::isfinite(sampling.z0)) throw std::invalid_argument("grid: non-finite origin");
}

ArrayGeometry ArrayGeometry::linear(std::size_t n_elements, double pitch, double f0, double c0, double fs,
                                    Point2 tx_focus) {
  ArrayGeometry g;
  g.n_elements = n_elements;
  g.pitch = pitch;
  g.f0 = f0;
  g.c0 = c0;
  g.fs = fs;
  g.tx_focus = tx_focus;
  g.element_x.resize(n_elements);
  const double mid = 0.5 * static_cast<double>(n_elements) - 0.5;
  for (std::size_t e = 0; e < n_elements; ++e) g.element_x[e] = (static_cast<double>(e) - mid) * pitch;
  g.validate();
  return g;
}

void ArrayGeometry::validate() const {
  if (n_elements < 1) throw std::invalid_argument("geometry: n_elements must be >= 1");
  if (!(pitch > 0.0) || !std::isfinite(pitch)) throw std::invalid_argument("geometry: pitch must be > 0");
  if (element_x.size() != n_elements) throw std::invalid_argument("geometry: element_x length != n_elements");
  for (std::size_t e = 0; e < n_elements; ++e) {
    if (!std::isfinite(element_x[e])) throw std::invalid_argument("geometry: non-finite element position");
    if (e > 0 && !(element_x[e] > element_x[e - 1]))
      throw std::invalid_argument("geometry: element_x must be strictly increasing");
    if (std::abs(element_x[e] + element_x[n_elements - 1 - e]) > 1e-12)
      throw std::invalid_argument("geometry: element_x must be symmetric about 0");
  }
  if (!(c0 > 0.0) || !std::isfinite(c0)) throw std::invalid_argument("geometry: c0 must be > 0");
  if (!(f0 > 0.0) || !std::isfinite(f0)) throw std::invalid_argument("geometry: f0 must be > 0");
  if (!(fs > 2.0 * f0) || !std::isfinite(fs)) throw std::invalid_argument("geometry: fs must exceed 2*f0");
  if (!(tx_focus.z > 0.0) || !std::isfinite(tx_focus.x) || !std::isfinite(tx_focus.z))
    throw std::invalid_argument("geometry: tx_focus.z must be > 0");
}

namespace {

// Envelope exp(-a t^2) falls to -6 dB at the band edges f0*(1 +- bw/2).
double envelope_rate(double f0, double bw) {
  const double ref = std::pow(10.0, -6.0 / 20.0);
  const double pfb = std::numbers::pi * f0 * bw;
  return -(pfb * pfb) / (4.0 * std::log(ref));
}

}  // namespace

double Pulse::envelope(double t) const noexcept {
  if (std::abs(t) > 0.5 * duration) return 0.0;
  return std::exp(-envelope_rate(f0, fractional_bandwidth) * t * t);
}

double Pulse::operator()(double t) const noexcept {
  if (std::abs(t) > 0.5 * duration) return 0.0;
  return envelope(t) * std::cos(2.0 * std::numbers::pi * f0 * t);
}

void Pulse::validate() const {
  if (!(f0 > 0.0) || !std::isfinite(f0)) throw std::invalid_argument("pulse: f0 must be > 0");
  if (!(fractional_bandwidth > 0.0) || fractional_bandwidth > 1.0)
    throw std::invalid_argument("pulse: fractional bandwidth must lie in (0, 1]");
  if (!(duration > 0.0) || !std::isfinite(duration)) throw std::invalid_argument("pulse: duration must be > 0");
}

double Pulse::default_duration(double f0, double fractional_bandwidth) {
  const double a = envelope_rate(f0, fractional_bandwidth);
  return 2.0 * std::sqrt(std::log(1e5) / a);
}

void AberrationProfile::validate(std::size_t n_elements) const {
  if (delays.size() != n_elements) throw std::invalid_argument("aberration profile: length != n_elements");
  if (!all_finite(delays)) throw std::invalid_argument("aberration profile: non-finite delay");
}

ComplexImage::ComplexImage(Grid<cplx> d, Sampling s) : data(std::move(d)), sampling(s) {
  if (data.rows() == 0 || data.cols() == 0) throw std::invalid_argument("complex image: empty");
  if (!(sampling.dx > 0.0) || !(sampling.dz > 0.0)) throw std::invalid_argument("complex image: dx, dz must be > 0");
  if (!all_finite(data.values())) throw std::invalid_argument("complex image: non-finite sample");
}

FilterKernel::FilterKernel(Grid<cplx> t) : taps(std::move(t)) {
  if (taps.rows() % 2 == 0 || taps.cols() % 2 == 0) throw std::invalid_argument("filter kernel: dims must be odd");
  if (!all_finite(taps.values())) throw std::invalid_argument("filter kernel: non-finite tap");
  anchor = {taps.rows() / 2, taps.cols() / 2};
}

FilterKernel FilterKernel::impulse(std::size_t rows, std::size_t cols) {
  Grid<cplx> t(rows, cols);
  t(rows / 2, cols / 2) = 1.0;
  return FilterKernel(std::move(t));
}

std::size_t RegionMask::count() const noexcept {
  return static_cast<std::size_t>(std::count_if(bits.values().begin(), bits.values().end(),
                                                [](std::uint8_t b) { return b != 0; }));
}

CoherenceMap::CoherenceMap(Grid<double> weights) : w(std::move(weights)) {
  for (double v : w.values())
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("coherence map: values must lie in [0, 1]");
}

EnvelopeImage::EnvelopeImage(Grid<double> e, Sampling s) : env(std::move(e)), sampling(s) {
  for (double v : env.values())
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("envelope: values must be finite and >= 0");
}

bool all_finite(std::span<const double> v) noexcept {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

bool all_finite(std::span<const cplx> v) noexcept {
  return std::all_of(v.begin(), v.end(),
                     [](const cplx& x) { return std::isfinite(x.real()) && std::isfinite(x.imag()); });
}

namespace {

Index2 argmax_abs(const Grid<cplx>& g) {
  Index2 best;
  double peak = -1.0;
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c) {
      const double m = std::abs(g(r, c));
      if (m > peak) {
        peak = m;
        best = {r, c};
      }
    }
  return best;
}

// out(centre + d) = in(src + d), zero where the source falls outside.
Grid<cplx> recentre(const Grid<cplx>& in, Index2 src, std::size_t nz, std::size_t nx) {
  Grid<cplx> out(nz, nx);
  const auto dr = static_cast<std::ptrdiff_t>(src.row) - static_cast<std::ptrdiff_t>(nz / 2);
  const auto dc = static_cast<std::ptrdiff_t>(src.col) - static_cast<std::ptrdiff_t>(nx / 2);
  for (std::size_t r = 0; r < nz; ++r) {
    const auto sr = static_cast<std::ptrdiff_t>(r) + dr;
    if (sr < 0 || sr >= static_cast<std::ptrdiff_t>(in.rows())) continue;
    for (std::size_t c = 0; c < nx; ++c) {
      const auto sc = static_cast<std::ptrdiff_t>(c) + dc;
      if (sc < 0 || sc >= static_cast<std::ptrdiff_t>(in.cols())) continue;
      out(r, c) = in(static_cast<std::size_t>(sr), static_cast<std::size_t>(sc));
    }
  }
  return out;
}

}  // namespace

Psf center_psf(const ComplexImage& raw) {
  const Index2 peak = argmax_abs(raw.data);
  const double peak_mag = std::abs(raw.data(peak.row, peak.col));
  if (!(peak_mag > 0.0)) throw NumericalError("center_psf: all-zero input");

  const std::size_t nz = raw.rows() % 2 ? raw.rows() : raw.rows() - 1;
  const std::size_t nx = raw.cols() % 2 ? raw.cols() : raw.cols() - 1;
  if (nz == 0 || nx == 0) throw std::invalid_argument("center_psf: patch too small");
  Grid<cplx> patch = recentre(raw.data, peak, nz, nx);

  // Leave an already-normalised patch untouched so centring is idempotent.
  double gain = 1.0;
  if (std::abs(peak_mag - 1.0) > 4.0 * std::numeric_limits<double>::epsilon()) {
    gain = peak_mag;
    for (auto& v : patch.values()) v /= peak_mag;
  }

  Sampling s = raw.sampling;
  s.x0 = raw.sampling.x_at(peak.col) - static_cast<double>(nx / 2) * s.dx;
  s.z0 = raw.sampling.z_at(peak.row) - static_cast<double>(nz / 2) * s.dz;
  return Psf{ComplexImage(std::move(patch), s), Index2{nz / 2, nx / 2}, gain};
}

Psf crop_psf(const Psf& psf, std::size_t nz, std::size_t nx) {
  if (nz % 2 == 0 || nx % 2 == 0) throw std::invalid_argument("crop_psf: dims must be odd");
  Grid<cplx> patch = recentre(psf.patch.data, psf.center, nz, nx);
  Sampling s = psf.patch.sampling;
  s.x0 = psf.patch.sampling.x_at(psf.center.col) - static_cast<double>(nx / 2) * s.dx;
  s.z0 = psf.patch.sampling.z_at(psf.center.row) - static_cast<double>(nz / 2) * s.dz;
  return Psf{ComplexImage(std::move(patch), s), Index2{nz / 2, nx / 2}, psf.gain};
}

}  // namespace psfr
