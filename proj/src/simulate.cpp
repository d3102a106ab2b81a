#include "psfr/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "psfr/fft.hpp"

namespace psfr {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double distance(double ex, Point2 p) { return std::hypot(p.x - ex, p.z); }

double norm(Point2 p) { return std::hypot(p.x, p.z); }

}  // namespace

AberratorSettings preset_settings(AberratorPreset preset) {
  switch (preset) {
    case AberratorPreset::none: return {0.0, 5.0};
    case AberratorPreset::mild: return {25e-9, 5.0};
    case AberratorPreset::moderate: return {50e-9, 5.0};
    case AberratorPreset::severe: return {75e-9, 5.0};
  }
  return {};
}

AberratorPreset parse_preset(std::string_view name) {
  if (name == "none") return AberratorPreset::none;
  if (name == "mild") return AberratorPreset::mild;
  if (name == "moderate") return AberratorPreset::moderate;
  if (name == "severe") return AberratorPreset::severe;
  throw std::invalid_argument("unknown aberrator preset '" + std::string(name) + "'");
}

AberrationProfile zero_profile(std::size_t n_elements) {
  AberrationProfile p;
  p.delays.assign(n_elements, 0.0);
  return p;
}

AberrationProfile make_aberration_profile(std::size_t n_elements, double rms, double corr_len, std::uint64_t seed) {
  if (!(rms >= 0.0) || !std::isfinite(rms)) throw std::invalid_argument("aberration: rms must be >= 0");
  if (!(corr_len >= 0.0) || !std::isfinite(corr_len)) throw std::invalid_argument("aberration: corr_len must be >= 0");
  if (n_elements == 0) throw std::invalid_argument("aberration: n_elements must be >= 1");
  if (rms > 0.0 && n_elements < 2)
    throw std::invalid_argument("aberration: need >= 2 elements for a zero-mean profile with nonzero rms");

  AberrationProfile p{std::vector<double>(n_elements, 0.0), rms, corr_len, seed};
  if (rms == 0.0) return p;

  // Draw enough extra samples that the smoothed sequence has no edge taper.
  const auto half = static_cast<std::size_t>(std::ceil(4.0 * corr_len));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> white(n_elements + 2 * half);
  for (auto& v : white) v = normal(rng);

  std::vector<double> window(2 * half + 1, 1.0);
  if (corr_len > 0.0)
    for (std::size_t i = 0; i < window.size(); ++i) {
      const double u = (static_cast<double>(i) - static_cast<double>(half)) / corr_len;
      window[i] = std::exp(-0.5 * u * u);
    }

  for (std::size_t e = 0; e < n_elements; ++e)
    p.delays[e] = std::inner_product(window.begin(), window.end(), white.begin() + static_cast<std::ptrdiff_t>(e), 0.0);

  const double mean = std::accumulate(p.delays.begin(), p.delays.end(), 0.0) / static_cast<double>(n_elements);
  for (auto& d : p.delays) d -= mean;
  double ss = 0.0;
  for (double d : p.delays) ss += d * d;
  const double current = std::sqrt(ss / static_cast<double>(n_elements));
  if (!(current > 0.0)) throw NumericalError("aberration: degenerate profile");
  for (auto& d : p.delays) d *= rms / current;
  return p;
}

double focus_path_offset(const ArrayGeometry& geom, std::size_t element) {
  return distance(geom.element_x[element], geom.tx_focus) - norm(geom.tx_focus);
}

namespace {

// Transmit leg of every scatterer: arrival time at the scatterer and 1/d
// gain for each transmitting element.
struct TxLeg {
  std::vector<double> delay;
  std::vector<double> gain;
};

TxLeg transmit_leg(const ArrayGeometry& geom, const AberrationProfile& profile, const Scatterer& s) {
  TxLeg leg;
  leg.delay.resize(geom.n_elements);
  leg.gain.resize(geom.n_elements);
  for (std::size_t tx = 0; tx < geom.n_elements; ++tx) {
    const double d = distance(geom.element_x[tx], {s.x, s.z});
    leg.delay[tx] = (d - focus_path_offset(geom, tx)) / geom.c0 + profile.delays[tx];
    leg.gain[tx] = 1.0 / d;
  }
  return leg;
}

void check_inputs(const ArrayGeometry& geom, const Pulse& pulse, const std::vector<Scatterer>& scatterers,
                  const AberrationProfile& profile) {
  geom.validate();
  pulse.validate();
  profile.validate(geom.n_elements);
  for (const auto& s : scatterers)
    if (!(s.z > 0.0) || !std::isfinite(s.x) || !std::isfinite(s.amp))
      throw std::invalid_argument("simulate: scatterer depth must be > 0 and values finite");
}

}  // namespace

TimeWindow covering_window(const ArrayGeometry& geom, const Pulse& pulse, const std::vector<Scatterer>& scatterers,
                           const AberrationProfile& profile, std::size_t margin) {
  check_inputs(geom, pulse, scatterers, profile);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : scatterers) {
    const TxLeg leg = transmit_leg(geom, profile, s);
    const auto [tmin, tmax] = std::minmax_element(leg.delay.begin(), leg.delay.end());
    for (std::size_t e = 0; e < geom.n_elements; ++e) {
      const double rx = distance(geom.element_x[e], {s.x, s.z}) / geom.c0 + profile.delays[e];
      lo = std::min(lo, *tmin + rx);
      hi = std::max(hi, *tmax + rx);
    }
  }
  if (scatterers.empty()) {
    lo = 0.0;
    hi = 0.0;
  }
  lo -= 0.5 * pulse.duration;
  hi += 0.5 * pulse.duration;
  const double first = std::floor(lo * geom.fs) - static_cast<double>(margin);
  const double last = std::ceil(hi * geom.fs) + static_cast<double>(margin);
  return TimeWindow{first / geom.fs, static_cast<std::size_t>(last - first) + 1};
}

ChannelData simulate_channel_data(const ArrayGeometry& geom, const Pulse& pulse,
                                  const std::vector<Scatterer>& scatterers, const AberrationProfile& profile,
                                  const TimeWindow& window) {
  check_inputs(geom, pulse, scatterers, profile);
  if (window.n_samples == 0) throw std::invalid_argument("simulate: empty time window");

  ChannelData ch{Grid<double>(geom.n_elements, window.n_samples), geom.fs, window.t0};
  const double t_end = window.t0 + static_cast<double>(window.n_samples - 1) / geom.fs;
  const double half = 0.5 * pulse.duration;

  std::vector<TxLeg> legs;
  legs.reserve(scatterers.size());
  for (const auto& s : scatterers) legs.push_back(transmit_leg(geom, profile, s));

  // Each receive channel owns its row; the summation order inside a row is
  // fixed, so results do not depend on the thread count.
  const auto n_el = static_cast<std::ptrdiff_t>(geom.n_elements);
  bool overflow = false;
#pragma omp parallel for schedule(static) reduction(|| : overflow)
  for (std::ptrdiff_t ei = 0; ei < n_el; ++ei) {
    const auto e = static_cast<std::size_t>(ei);
    auto row = ch.rf.row(e);
    for (std::size_t k = 0; k < scatterers.size(); ++k) {
      const Scatterer& s = scatterers[k];
      const double d_rx = distance(geom.element_x[e], {s.x, s.z});
      const double rx_delay = d_rx / geom.c0 + profile.delays[e];
      for (std::size_t tx = 0; tx < geom.n_elements; ++tx) {
        const double tau = legs[k].delay[tx] + rx_delay;
        if (tau - half < window.t0 || tau + half > t_end) {
          overflow = true;
          continue;
        }
        const double a = s.amp * legs[k].gain[tx] / d_rx;
        const auto first = static_cast<std::size_t>(std::ceil((tau - half - window.t0) * geom.fs));
        const auto last = static_cast<std::size_t>(std::floor((tau + half - window.t0) * geom.fs));
        for (std::size_t n = first; n <= last && n < window.n_samples; ++n) {
          const double t = window.t0 + static_cast<double>(n) / geom.fs;
          row[n] += a * pulse(t - tau);
        }
      }
    }
  }
  if (overflow) throw std::invalid_argument("simulate: time window too short for the echo travel times");
  return ch;
}

namespace {

// Symmetric one-period averaging taps. An even period gets half-weight end
// taps so the window stays centred.
std::vector<double> period_window(double fs, double f) {
  const auto period = static_cast<std::size_t>(std::max(1.0, std::round(fs / f)));
  std::vector<double> w;
  if (period % 2 == 0) {
    w.assign(period + 1, 1.0);
    w.front() = 0.5;
    w.back() = 0.5;
  } else {
    w.assign(period, 1.0);
  }
  for (auto& v : w) v /= static_cast<double>(period);
  return w;
}

}  // namespace

Grid<cplx> demodulate_channels(const ChannelData& ch, double f_demod) {
  if (!(f_demod > 0.0)) throw std::invalid_argument("demodulate: f_demod must be > 0");
  const std::size_t n_el = ch.rf.rows();
  const std::size_t n_s = ch.rf.cols();
  const std::vector<double> w = period_window(ch.fs, f_demod);
  const auto half = static_cast<std::ptrdiff_t>(w.size() / 2);

  std::vector<cplx> carrier(n_s);
  for (std::size_t n = 0; n < n_s; ++n) {
    const double t = ch.t0 + static_cast<double>(n) / ch.fs;
    carrier[n] = std::polar(1.0, -kTwoPi * f_demod * t);
  }

  Grid<cplx> iq(n_el, n_s);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ei = 0; ei < static_cast<std::ptrdiff_t>(n_el); ++ei) {
    const auto e = static_cast<std::size_t>(ei);
    auto rf = ch.rf.row(e);
    std::vector<cplx> mixed(n_s);
    for (std::size_t n = 0; n < n_s; ++n) mixed[n] = rf[n] * carrier[n];
    auto out = iq.row(e);
    for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(n_s); ++n) {
      cplx acc{};
      for (std::ptrdiff_t m = -half; m <= half; ++m) {
        const std::ptrdiff_t idx = n + m;
        if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(n_s)) continue;
        acc += w[static_cast<std::size_t>(m + half)] * mixed[static_cast<std::size_t>(idx)];
      }
      out[static_cast<std::size_t>(n)] = 2.0 * acc;
    }
  }
  return iq;
}

double nominal_transmit_time(const ArrayGeometry& geom, Point2 p) {
  // Plane-wave approximation about the focus along the beam axis.
  const double r = norm(geom.tx_focus);
  const double ux = geom.tx_focus.x / r;
  const double uz = geom.tx_focus.z / r;
  return (r + (p.x - geom.tx_focus.x) * ux + (p.z - geom.tx_focus.z) * uz) / geom.c0;
}

ComplexImage beamform_das(const ChannelData& ch, const ArrayGeometry& geom, const GridSpec& grid, double f_demod) {
  if (!(f_demod > 0.0)) throw std::invalid_argument("beamform: f_demod must be > 0");
  grid.validate();
  geom.validate();
  if (ch.rf.rows() != geom.n_elements) throw std::invalid_argument("beamform: channel count != n_elements");
  if (!(grid.sampling.z0 > 0.0)) throw std::invalid_argument("beamform: grid must lie below the array (z > 0)");

  const Grid<cplx> iq = demodulate_channels(ch, f_demod);
  const std::size_t n_s = iq.cols();
  Grid<cplx> out(grid.nz, grid.nx);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ri = 0; ri < static_cast<std::ptrdiff_t>(grid.nz); ++ri) {
    const auto r = static_cast<std::size_t>(ri);
    const double z = grid.sampling.z_at(r);
    for (std::size_t c = 0; c < grid.nx; ++c) {
      const double x = grid.sampling.x_at(c);
      const double t_tx = nominal_transmit_time(geom, {x, z});
      cplx acc{};
      for (std::size_t e = 0; e < geom.n_elements; ++e) {
        const double tau = t_tx + distance(geom.element_x[e], {x, z}) / geom.c0;
        const double pos = (tau - ch.t0) * ch.fs;
        if (pos < 0.0 || pos > static_cast<double>(n_s - 1)) continue;
        const auto i0 = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(i0);
        const cplx a = iq(e, i0);
        const cplx b = i0 + 1 < n_s ? iq(e, i0 + 1) : cplx{};
        const cplx sample = (1.0 - frac) * a + frac * b;
        acc += sample * std::polar(1.0, kTwoPi * f_demod * tau);
      }
      const double t_ref = t_tx + z / geom.c0;
      out(r, c) = acc * std::polar(1.0, -kTwoPi * f_demod * t_ref);
    }
  }
  return ComplexImage(std::move(out), grid.sampling);
}

Psf simulate_psf(const ArrayGeometry& geom, const Pulse& pulse, const AberrationProfile& profile,
                 const PsfSpec& spec) {
  if (spec.nx % 2 == 0 || spec.nz % 2 == 0) throw std::invalid_argument("simulate_psf: patch dims must be odd");
  const std::vector<Scatterer> target{{geom.tx_focus.x, geom.tx_focus.z, 1.0}};
  const TimeWindow window = covering_window(geom, pulse, target, profile);
  const ChannelData ch = simulate_channel_data(geom, pulse, target, profile, window);
  const GridSpec wide = GridSpec::centered(geom.tx_focus, 2 * spec.nx - 1, 2 * spec.nz - 1, spec.dx, spec.dz);
  const ComplexImage img = beamform_das(ch, geom, wide, geom.f0);
  return crop_psf(center_psf(img), spec.nz, spec.nx);
}

void PhantomSpec::validate() const {
  if (!(width > 0.0) || !(height > 0.0)) throw std::invalid_argument("phantom: extent must be positive");
  if (!(cyst_radius > 0.0)) throw std::invalid_argument("phantom: cyst radius must be > 0");
  if (!(cyst_amp >= 0.0)) throw std::invalid_argument("phantom: cyst_amp must be >= 0");
  if (!(scatterer_density >= 0.0)) throw std::invalid_argument("phantom: scatterer density must be >= 0");
  if (!(background_gap >= 0.0)) throw std::invalid_argument("phantom: background gap must be >= 0");
  if (cyst_center.x - cyst_radius < center.x - 0.5 * width || cyst_center.x + cyst_radius > center.x + 0.5 * width ||
      cyst_center.z - cyst_radius < center.z - 0.5 * height || cyst_center.z + cyst_radius > center.z + 0.5 * height)
    throw std::invalid_argument("phantom: cyst must lie fully inside the extent");
}

namespace {

std::ptrdiff_t nearest(double v, double origin, double step) {
  return static_cast<std::ptrdiff_t>(std::llround((v - origin) / step));
}

Grid<std::uint8_t> erode(const Grid<std::uint8_t>& in, std::size_t radius) {
  Grid<std::uint8_t> out(in.rows(), in.cols());
  const auto rad = static_cast<std::ptrdiff_t>(radius);
  const auto rows = static_cast<std::ptrdiff_t>(in.rows());
  const auto cols = static_cast<std::ptrdiff_t>(in.cols());
  for (std::ptrdiff_t r = 0; r < rows; ++r)
    for (std::ptrdiff_t c = 0; c < cols; ++c) {
      bool keep = true;
      for (std::ptrdiff_t dr = -rad; dr <= rad && keep; ++dr)
        for (std::ptrdiff_t dc = -rad; dc <= rad && keep; ++dc) {
          const auto rr = r + dr;
          const auto cc = c + dc;
          keep = rr >= 0 && rr < rows && cc >= 0 && cc < cols &&
                 in(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc)) != 0;
        }
      out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = keep ? 1 : 0;
    }
  return out;
}

}  // namespace

Phantom make_phantom(const PhantomSpec& spec, const GridSpec& grid, std::uint64_t seed) {
  spec.validate();
  grid.validate();
  const Sampling& s = grid.sampling;
  const double half_dx = 0.5 * s.dx;
  const double half_dz = 0.5 * s.dz;
  const double x_lo = spec.center.x - 0.5 * spec.width;
  const double z_lo = spec.center.z - 0.5 * spec.height;
  if (x_lo < s.x0 - half_dx || z_lo < s.z0 - half_dz ||
      x_lo + spec.width > s.x_at(grid.nx - 1) + half_dx || z_lo + spec.height > s.z_at(grid.nz - 1) + half_dz)
    throw std::invalid_argument("phantom: grid does not cover the phantom extent");

  Phantom ph;
  ph.scatterers = ScattererMap{Grid<cplx>(grid.nz, grid.nx), s};
  Grid<cplx>& amps = ph.scatterers.amps;

  std::mt19937_64 rng(seed);
  const double area_mm2 = spec.width * spec.height * 1e6;
  const double expected = spec.scatterer_density * area_mm2;
  std::size_t count = 0;
  if (expected > 0.0) {
    std::poisson_distribution<std::uint64_t> poisson(expected);
    count = static_cast<std::size_t>(poisson(rng));
  }
  std::uniform_real_distribution<double> ux(x_lo, x_lo + spec.width);
  std::uniform_real_distribution<double> uz(z_lo, z_lo + spec.height);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double r2 = spec.cyst_radius * spec.cyst_radius;

  for (std::size_t k = 0; k < count; ++k) {
    const double x = ux(rng);
    const double z = uz(rng);
    // Circular complex amplitude: a scatterer's carrier phase depends on its
    // depth to a fraction of a wavelength, far below the grid spacing.
    const double re = normal(rng);
    const double im = normal(rng);
    cplx a = cplx(re, im) * std::numbers::sqrt2 * 0.5;
    const auto c = static_cast<std::size_t>(
        std::clamp<std::ptrdiff_t>(nearest(x, s.x0, s.dx), 0, static_cast<std::ptrdiff_t>(grid.nx) - 1));
    const auto r = static_cast<std::size_t>(
        std::clamp<std::ptrdiff_t>(nearest(z, s.z0, s.dz), 0, static_cast<std::ptrdiff_t>(grid.nz) - 1));
    // Cyst membership is decided on the cell the scatterer lands in.
    const double ddx = s.x_at(c) - spec.cyst_center.x;
    const double ddz = s.z_at(r) - spec.cyst_center.z;
    if (ddx * ddx + ddz * ddz <= r2) a *= spec.cyst_amp;
    amps(r, c) += a;
  }
  ph.n_scatterers = count;

  for (const auto& pt : spec.point_targets) {
    const auto c = nearest(pt.x, s.x0, s.dx);
    const auto r = nearest(pt.z, s.z0, s.dz);
    if (c < 0 || r < 0 || c >= static_cast<std::ptrdiff_t>(grid.nx) || r >= static_cast<std::ptrdiff_t>(grid.nz))
      throw std::invalid_argument("phantom: point target outside the grid");
    amps(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) += pt.amp;
  }

  // Cyst disk on pixel centres, eroded by two pixels.
  Grid<std::uint8_t> disk(grid.nz, grid.nx);
  std::vector<std::pair<double, std::size_t>> outside;
  const double r_in = spec.cyst_radius + spec.background_gap;
  for (std::size_t r = 0; r < grid.nz; ++r)
    for (std::size_t c = 0; c < grid.nx; ++c) {
      const double d = std::hypot(s.x_at(c) - spec.cyst_center.x, s.z_at(r) - spec.cyst_center.z);
      if (d * d <= r2) disk(r, c) = 1;
      if (d >= r_in) outside.emplace_back(d, r * grid.nx + c);
    }
  ph.cyst = RegionMask{erode(disk, 2), "cyst"};
  const std::size_t n_cyst = ph.cyst.count();
  if (n_cyst == 0) throw std::invalid_argument("phantom: cyst too small for the grid after erosion");

  // Background: the n_cyst pixels nearest the inner radius, i.e. a concentric
  // annulus of equal area.
  if (outside.size() < n_cyst) throw std::invalid_argument("phantom: grid too small for the background annulus");
  std::stable_sort(outside.begin(), outside.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  ph.background = RegionMask{Grid<std::uint8_t>(grid.nz, grid.nx), "background"};
  for (std::size_t i = 0; i < n_cyst; ++i) ph.background.bits.values()[outside[i].second] = 1;
  return ph;
}

ComplexImage synth_speckle(const ScattererMap& s, const Psf& psf) {
  const Grid<cplx>& p = psf.patch.data;
  if (p.rows() > s.amps.rows() || p.cols() > s.amps.cols())
    throw std::invalid_argument("synth_speckle: PSF larger than scatterer map");
  return ComplexImage(fft::convolve_same(s.amps, p, psf.center), s.sampling);
}

}  // namespace psfr
