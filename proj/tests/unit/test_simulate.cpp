#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "psfr/fft.hpp"
#include "psfr/oracle.hpp"
#include "psfr/render.hpp"
#include "psfr/simulate.hpp"
#include "support.hpp"

using namespace psfr;

namespace {

const ArrayGeometry kGeom = ArrayGeometry::linear(64, 1.54e-4, 5e6, 1540.0, 40e6, {0.0, 0.025});
const Pulse kPulse{5e6, 0.6, Pulse::default_duration(5e6, 0.6)};

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// Full width where a symmetric autocorrelation sequence (lag >= 0) drops to 1/2.
double acf_fwhm(const std::vector<double>& acf) {
  for (std::size_t k = 1; k < acf.size(); ++k)
    if (acf[k] < 0.5) {
      const double frac = (acf[k - 1] - 0.5) / (acf[k - 1] - acf[k]);
      return 2.0 * (static_cast<double>(k - 1) + frac);
    }
  return 2.0 * static_cast<double>(acf.size());
}

double energy(const Grid<cplx>& g) {
  double e = 0.0;
  for (const auto& v : g.values()) e += std::norm(v);
  return e;
}

}  // namespace

TEST_CASE("presets") {
  CHECK(preset_settings(AberratorPreset::none).rms == 0.0);
  CHECK(preset_settings(AberratorPreset::mild).rms == doctest::Approx(25e-9));
  CHECK(preset_settings(AberratorPreset::moderate).rms == doctest::Approx(50e-9));
  CHECK(preset_settings(AberratorPreset::severe).rms == doctest::Approx(75e-9));
  CHECK(preset_settings(AberratorPreset::moderate).corr_len == 5.0);
  CHECK(parse_preset("severe") == AberratorPreset::severe);
  CHECK_THROWS_AS(parse_preset("extreme"), std::invalid_argument);
}

TEST_CASE("aberration profile with zero rms is all zero") {
  const auto p = make_aberration_profile(64, 0.0, 5.0, 7);
  CHECK(p.delays.size() == 64);
  CHECK(std::all_of(p.delays.begin(), p.delays.end(), [](double d) { return d == 0.0; }));
}

TEST_CASE("aberration profile statistics") {
  const auto p = make_aberration_profile(64, 50e-9, 5.0, 7);
  const double n = static_cast<double>(p.delays.size());
  const double mean = std::accumulate(p.delays.begin(), p.delays.end(), 0.0) / n;
  double ss = 0.0, mean_abs = 0.0;
  for (double d : p.delays) {
    ss += d * d;
    mean_abs += std::abs(d);
  }
  const double rms = std::sqrt(ss / n);
  CHECK(std::abs(mean) <= 1e-15);
  CHECK(std::abs(rms - 50e-9) <= 50e-9 * 1e-3);
  CHECK(mean_abs / n < rms);
  CHECK(p.rms_target == 50e-9);

  const auto again = make_aberration_profile(64, 50e-9, 5.0, 7);
  CHECK(again.delays == p.delays);
  const auto other = make_aberration_profile(64, 50e-9, 5.0, 8);
  CHECK(other.delays != p.delays);

  CHECK_THROWS_AS(make_aberration_profile(1, 50e-9, 5.0, 7), std::invalid_argument);
  CHECK_NOTHROW(make_aberration_profile(1, 0.0, 5.0, 7));
  CHECK_THROWS_AS(make_aberration_profile(64, -1e-9, 5.0, 7), std::invalid_argument);
  CHECK_THROWS_AS(make_aberration_profile(64, 1e-9, -1.0, 7), std::invalid_argument);
}

TEST_CASE("aberration profile correlation length") {
  // Brute-force autocorrelation, averaged over 100 seeds.
  const std::size_t n = 64, max_lag = 40;
  std::vector<double> acf(max_lag, 0.0);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto p = make_aberration_profile(n, 50e-9, 5.0, seed);
    for (std::size_t lag = 0; lag < max_lag; ++lag) {
      double s = 0.0;
      for (std::size_t i = 0; i + lag < n; ++i) s += p.delays[i] * p.delays[i + lag];
      acf[lag] += s / static_cast<double>(n - lag);
    }
  }
  for (std::size_t lag = max_lag; lag-- > 0;) acf[lag] /= acf[0];
  const double fwhm = acf_fwhm(acf);
  MESSAGE("autocorrelation FWHM " << fwhm << " elements");
  CHECK(fwhm >= 0.6 * 2.355 * 5.0);
  CHECK(fwhm <= 1.4 * 2.355 * 5.0);
}

TEST_CASE("empty scatterer list gives zero channel data") {
  const auto prof = zero_profile(64);
  const TimeWindow w{0.0, 512};
  const ChannelData ch = simulate_channel_data(kGeom, kPulse, {}, prof, w);
  CHECK(std::all_of(ch.rf.values().begin(), ch.rf.values().end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("single element echo arrives at the two-way time") {
  const double z0 = 0.02;
  const auto g = ArrayGeometry::linear(1, 1.54e-4, 5e6, 1540.0, 40e6, {0.0, z0});
  const std::vector<Scatterer> s{{0.0, z0, 1.0}};
  const auto prof = zero_profile(1);
  const TimeWindow w = covering_window(g, kPulse, s, prof);
  const ChannelData ch = simulate_channel_data(g, kPulse, s, prof, w);
  const Grid<cplx> iq = demodulate_channels(ch, g.f0);
  std::vector<double> env(iq.cols());
  for (std::size_t n = 0; n < iq.cols(); ++n) env[n] = std::abs(iq(0, n));
  const double t_peak = ch.t0 + static_cast<double>(argmax(env)) / ch.fs;
  CHECK(std::abs(t_peak - 2.0 * z0 / g.c0) <= 1.0 / ch.fs);
}

TEST_CASE("channel envelope peaks follow the focusing geometry") {
  const Point2 f = kGeom.tx_focus;
  const std::vector<Scatterer> s{{f.x, f.z, 1.0}};
  const auto prof = zero_profile(64);
  const TimeWindow w = covering_window(kGeom, kPulse, s, prof);
  const ChannelData ch = simulate_channel_data(kGeom, kPulse, s, prof, w);
  const Grid<cplx> iq = demodulate_channels(ch, kGeom.f0);
  int misses = 0;
  for (std::size_t e = 0; e < 64; ++e) {
    // Every transmit wave reaches the focus at |F|/c; the echo then travels
    // straight back to element e.
    const double dx = kGeom.element_x[e] - f.x;
    const double expected = std::hypot(f.x, f.z) / kGeom.c0 + std::hypot(dx, f.z) / kGeom.c0;
    std::vector<double> env(iq.cols());
    for (std::size_t n = 0; n < iq.cols(); ++n) env[n] = std::abs(iq(e, n));
    const double t_peak = ch.t0 + static_cast<double>(argmax(env)) / ch.fs;
    if (std::abs(t_peak - expected) > 1.0 / ch.fs) ++misses;
  }
  CHECK(misses == 0);
}

TEST_CASE("channel simulation is linear in the scatterer set") {
  const std::vector<Scatterer> a{{1e-3, 0.024, 1.0}, {-2e-3, 0.026, -0.5}};
  const std::vector<Scatterer> b{{0.5e-3, 0.025, 2.0}};
  std::vector<Scatterer> ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  const auto prof = make_aberration_profile(64, 30e-9, 5.0, 3);
  const TimeWindow w = covering_window(kGeom, kPulse, ab, prof);
  const ChannelData ca = simulate_channel_data(kGeom, kPulse, a, prof, w);
  const ChannelData cb = simulate_channel_data(kGeom, kPulse, b, prof, w);
  const ChannelData cab = simulate_channel_data(kGeom, kPulse, ab, prof, w);
  double peak = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < cab.rf.size(); ++i) {
    peak = std::max(peak, std::abs(cab.rf.values()[i]));
    worst = std::max(worst, std::abs(cab.rf.values()[i] - ca.rf.values()[i] - cb.rf.values()[i]));
  }
  CHECK(worst <= 1e-12 * peak);
}

TEST_CASE("a short time window is rejected") {
  const std::vector<Scatterer> s{{0.0, 0.025, 1.0}};
  CHECK_THROWS_AS(simulate_channel_data(kGeom, kPulse, s, zero_profile(64), TimeWindow{0.0, 100}),
                  std::invalid_argument);
}

TEST_CASE("beamforming zero data gives a zero image") {
  const ChannelData ch{Grid<double>(64, 800), 40e6, 3e-5};
  const GridSpec g = GridSpec::centered(kGeom.tx_focus, 9, 9, 1e-4, 5e-5);
  const ComplexImage img = beamform_das(ch, kGeom, g, kGeom.f0);
  CHECK(energy(img.data) == 0.0);
  CHECK_THROWS_AS(beamform_das(ch, kGeom, g, 0.0), std::invalid_argument);
}

TEST_CASE("beamformed point target peaks at the scatterer") {
  const Point2 f = kGeom.tx_focus;
  const std::vector<Scatterer> s{{f.x, f.z, 1.0}};
  const auto prof = zero_profile(64);
  const ChannelData ch = simulate_channel_data(kGeom, kPulse, s, prof, covering_window(kGeom, kPulse, s, prof));
  const GridSpec g = GridSpec::centered(f, 41, 61, 1e-4, 5e-5);
  const ComplexImage img = beamform_das(ch, kGeom, g, kGeom.f0);
  const EnvelopeImage env = envelope(img);
  const std::size_t i = argmax(env.env.values());
  const double x = g.sampling.x_at(i % g.nx), z = g.sampling.z_at(i / g.nx);
  CHECK(std::abs(x - f.x) <= g.sampling.dx);
  CHECK(std::abs(z - f.z) <= g.sampling.dz);
}

TEST_CASE("ideal PSF is deterministic and normalised") {
  const PsfSpec spec;
  const Psf a = simulate_psf(kGeom, kPulse, zero_profile(64), spec);
  const Psf b = simulate_psf(kGeom, kPulse, zero_profile(64), spec);
  CHECK(a.patch.data == b.patch.data);
  CHECK(a.patch.rows() == 65);
  CHECK(a.patch.cols() == 33);
  CHECK(a.center == Index2{32, 16});
  CHECK(std::abs(a.patch.data(32, 16)) == doctest::Approx(1.0));
  double peak = 0.0;
  for (const auto& v : a.patch.data.values()) peak = std::max(peak, std::abs(v));
  CHECK(peak == doctest::Approx(1.0));
  CHECK_THROWS_AS(simulate_psf(kGeom, kPulse, zero_profile(64), PsfSpec{32, 65}), std::invalid_argument);
}

TEST_CASE("aberration lowers the peak and widens the PSF") {
  const PsfSpec spec;
  const Psf ideal = simulate_psf(kGeom, kPulse, zero_profile(64), spec);
  const Psf aberr = simulate_psf(kGeom, kPulse, make_aberration_profile(64, 50e-9, 5.0, 1), spec);
  CHECK(aberr.gain < ideal.gain);

  const auto width = [](const Psf& p) {
    const EnvelopeImage env = envelope(p.patch);
    return profile_width(lateral_profile(env, p.patch.sampling.z_at(p.center.row)), -20.0);
  };
  CHECK(width(aberr) > width(ideal));

  const Psf other = simulate_psf(kGeom, kPulse, make_aberration_profile(64, 50e-9, 5.0, 2), spec);
  CHECK(test::max_abs_diff(other.patch.data, aberr.patch.data) > 0.0);
}

TEST_CASE("phantom construction") {
  const PhantomSpec spec{.width = 25e-3, .height = 12.5e-3};
  const GridSpec grid = GridSpec::centered({0.0, 0.025}, 256, 256, 1e-4, 5e-5);
  const Phantom ph = make_phantom(spec, grid, 4);
  const auto& s = grid.sampling;

  // Anechoic cyst: nothing lands inside the disk.
  for (std::size_t r = 0; r < grid.nz; ++r)
    for (std::size_t c = 0; c < grid.nx; ++c) {
      const double d = std::hypot(s.x_at(c) - spec.cyst_center.x, s.z_at(r) - spec.cyst_center.z);
      if (d <= spec.cyst_radius) CHECK(ph.scatterers.amps(r, c) == cplx(0.0));
    }

  const std::size_t n_in = ph.cyst.count(), n_out = ph.background.count();
  CHECK(n_in > 0);
  CHECK(std::abs(static_cast<double>(n_in) - static_cast<double>(n_out)) <= 0.02 * static_cast<double>(n_in));
  for (std::size_t i = 0; i < ph.cyst.bits.size(); ++i)
    CHECK_FALSE((ph.cyst.bits.values()[i] && ph.background.bits.values()[i]));

  const Phantom again = make_phantom(spec, grid, 4);
  CHECK(again.scatterers.amps == ph.scatterers.amps);
}

TEST_CASE("phantom scatterer count follows the Poisson bound") {
  const PhantomSpec spec{.width = 25e-3, .height = 12.5e-3};
  const GridSpec grid = GridSpec::centered({0.0, 0.025}, 256, 256, 1e-4, 5e-5);
  const double mean = spec.scatterer_density * 25.0 * 12.5;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Phantom ph = make_phantom(spec, grid, seed);
    CHECK(std::abs(static_cast<double>(ph.n_scatterers) - mean) <= 4.0 * std::sqrt(mean));
  }
}

TEST_CASE("phantom errors") {
  const GridSpec grid = GridSpec::centered({0.0, 0.025}, 256, 256, 1e-4, 5e-5);
  PhantomSpec outside{.width = 25e-3, .height = 12.5e-3};
  outside.cyst_center = {12e-3, 0.025};
  CHECK_THROWS_AS(make_phantom(outside, grid, 1), std::invalid_argument);
  PhantomSpec too_big{.width = 40e-3, .height = 12.5e-3};
  CHECK_THROWS_AS(make_phantom(too_big, grid, 1), std::invalid_argument);
}

TEST_CASE("synthesising a delta reproduces the PSF") {
  std::mt19937_64 rng(9);
  const Psf psf = test::as_psf(test::random_complex(5, 7, rng));
  ScattererMap s{Grid<cplx>(20, 20), Sampling{}};
  s.amps(8, 11) = 1.0;
  const ComplexImage out = synth_speckle(s, psf);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 7; ++c) CHECK(std::abs(out.data(8 - 2 + r, 11 - 3 + c) - psf.patch.data(r, c)) < 1e-12);
  double rest = energy(out.data);
  for (const auto& v : psf.patch.data.values()) rest -= std::norm(v);
  CHECK(std::abs(rest) < 1e-10);

  const ComplexImage zero = synth_speckle(ScattererMap{Grid<cplx>(20, 20), Sampling{}}, psf);
  CHECK(energy(zero.data) == 0.0);
  CHECK_THROWS_AS(synth_speckle(ScattererMap{Grid<cplx>(4, 4), Sampling{}}, psf), std::invalid_argument);
}

TEST_CASE("speckle synthesis matches direct convolution") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    const ScattererMap s{test::random_complex(16, 16, rng), Sampling{}};
    const Psf psf = test::as_psf(test::random_complex(5, 5, rng));
    const ComplexImage fast = synth_speckle(s, psf);
    const Grid<cplx> slow = oracle::convolve_same(s.amps, psf.patch.data, psf.center);
    CHECK(oracle::relative_l2(fast.data, slow) <= 1e-10);
  }
}
