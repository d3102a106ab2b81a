#include "psfr/selfcheck.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "psfr/coherence.hpp"
#include "psfr/fft.hpp"
#include "psfr/metrics.hpp"
#include "psfr/oracle.hpp"
#include "psfr/restore.hpp"
#include "psfr/simulate.hpp"

namespace psfr {

namespace {

Grid<cplx> random_complex(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Grid<cplx> g(rows, cols);
  for (auto& v : g.values()) v = {n(rng), n(rng)};
  return g;
}

Psf as_psf(Grid<cplx> g) {
  const Index2 c{g.rows() / 2, g.cols() / 2};
  return Psf{ComplexImage(std::move(g), Sampling{}), c, 1.0};
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

SelfcheckItem check_filter(bool perturb) {
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const Psf a = as_psf(random_complex(5, 5, rng));
    const Psf b = as_psf(random_complex(5, 5, rng));
    FilterDesign d{1e-2, 7, 7, 0.0};
    FilterKernel fast = design_filter(a, b, d);
    if (perturb) fast.taps(1, 2) += 0.05 * std::abs(fast.taps(fast.anchor.row, fast.anchor.col)) + 0.01;
    const FilterKernel dense = oracle::filter_normal_equations(a, b, d.eps, 7, 7);
    worst = std::max(worst, oracle::relative_l2(fast.taps, dense.taps));
  }
  return {"filter design vs dense normal equations", worst <= 1e-6, "max rel L2 " + fmt(worst)};
}

SelfcheckItem check_convolution() {
  std::mt19937_64 rng(12);
  const ScattererMap s{random_complex(16, 16, rng), Sampling{}};
  const Psf p = as_psf(random_complex(5, 5, rng));
  const ComplexImage fast = synth_speckle(s, p);
  const double err = oracle::relative_l2(fast.data, oracle::convolve_same(s.amps, p.patch.data, p.center));
  return {"FFT convolution vs direct summation", err <= 1e-10, "rel L2 " + fmt(err)};
}

SelfcheckItem check_coherence() {
  std::mt19937_64 rng(13);
  double worst = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const ComplexImage img(random_complex(8, 8, rng), Sampling{});
    const FilterKernel k(random_complex(3, 3, rng));
    for (std::size_t m0 = 0; m0 <= 1; ++m0) {
      const CoherenceMap w = coherence_map(img, k, {m0, CoherenceAxes::both});
      for (std::size_t z = 0; z < 8; ++z)
        for (std::size_t x = 0; x < 8; ++x)
          worst = std::max(worst, std::abs(w.w(z, x) - oracle::coherence_at(img.data, k, z, x, m0)));
    }
  }
  return {"coherence index vs explicit DFT", worst <= 1e-10, "max abs err " + fmt(worst)};
}

SelfcheckItem check_gcnr() {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = 2000;
  Grid<double> env(2, n);
  RegionMask in{Grid<std::uint8_t>(2, n), "in"};
  RegionMask out{Grid<std::uint8_t>(2, n), "out"};
  for (std::size_t c = 0; c < n; ++c) {
    in.bits(0, c) = 1;
    out.bits(1, c) = 1;
  }

  for (std::size_t c = 0; c < n; ++c) env(0, c) = env(1, n - 1 - c) = u(rng);
  const double identical = gcnr(EnvelopeImage(env, Sampling{}), in, out);

  for (std::size_t c = 0; c < n; ++c) {
    env(0, c) = 0.4 * u(rng);
    env(1, c) = 0.6 + 0.4 * u(rng);
  }
  const double disjoint = gcnr(EnvelopeImage(env, Sampling{}), in, out);

  const std::size_t big = 1000000;
  Grid<double> env2(2, big);
  RegionMask in2{Grid<std::uint8_t>(2, big), "in"};
  RegionMask out2{Grid<std::uint8_t>(2, big), "out"};
  for (std::size_t c = 0; c < big; ++c) {
    env2(0, c) = u(rng);
    env2(1, c) = 0.5 + u(rng);
    in2.bits(0, c) = 1;
    out2.bits(1, c) = 1;
  }
  const double half = gcnr(EnvelopeImage(std::move(env2), Sampling{}), in2, out2, 256);

  const bool ok = identical == 0.0 && disjoint == 1.0 && std::abs(half - 0.5) <= 0.01;
  return {"gCNR analytic cases", ok,
          "identical " + fmt(identical) + ", disjoint " + fmt(disjoint) + ", half-overlap " + fmt(half)};
}

}  // namespace

std::vector<SelfcheckItem> selfcheck(const SelfcheckOptions& opts) {
  std::vector<SelfcheckItem> items;
  const auto guarded = [&](const char* name, auto&& fn) {
    try {
      items.push_back(fn());
    } catch (const std::exception& e) {
      items.push_back({name, false, std::string("threw: ") + e.what()});
    }
  };
  guarded("filter design vs dense normal equations", [&] { return check_filter(opts.perturb_filter); });
  guarded("FFT convolution vs direct summation", check_convolution);
  guarded("coherence index vs explicit DFT", check_coherence);
  guarded("gCNR analytic cases", check_gcnr);
  return items;
}

bool print_report(const std::vector<SelfcheckItem>& items, std::ostream& out) {
  bool all = true;
  for (const auto& item : items) {
    out << (item.passed ? "PASS  " : "FAIL  ") << item.name << "  (" << item.detail << ")\n";
    all = all && item.passed;
  }
  return all;
}

}  // namespace psfr
