#include <cmath>

#include "doctest.h"
#include "psfr/coherence.hpp"
#include "psfr/oracle.hpp"
#include "support.hpp"

using namespace psfr;
using test::random_complex;

TEST_CASE("constant product has all its energy at DC") {
  const ComplexImage img(Grid<cplx>(9, 9, cplx(2.0, -1.0)), Sampling{});
  const FilterKernel k(Grid<cplx>(3, 3, cplx(0.5)));
  const CoherenceMap w = coherence_map(img, k, CoherenceOptions{0, CoherenceAxes::both});
  // Interior pixels see a full, constant product.
  for (std::size_t r = 2; r < 7; ++r)
    for (std::size_t c = 2; c < 7; ++c) CHECK(w.w(r, c) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("alternating product has an empty DC bin") {
  // Kernel taps alternate in sign and sum to zero; on a constant image the
  // product does too.
  Grid<cplx> taps(3, 3);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) taps(r, c) = ((r + c) % 2) ? 1.0 : -1.0;
  taps(1, 1) = 0.0;
  const ComplexImage img(Grid<cplx>(8, 8, cplx(1.0)), Sampling{});
  const CoherenceMap w = coherence_map(img, FilterKernel(taps), {0, CoherenceAxes::both});
  for (std::size_t r = 1; r < 7; ++r)
    for (std::size_t c = 1; c < 7; ++c) CHECK(w.w(r, c) <= 1e-15);
}

TEST_CASE("zero-energy pixels get zero weight") {
  const CoherenceMap w = coherence_map(ComplexImage(Grid<cplx>(6, 6), Sampling{}), FilterKernel::impulse(3, 3));
  for (double v : w.w.values()) CHECK(v == 0.0);
}

TEST_CASE("coherence matches the explicit DFT") {
  std::mt19937_64 rng(1);
  for (std::size_t m0 : {0u, 1u}) {
    const Grid<cplx> img = random_complex(8, 8, rng);
    const FilterKernel k(random_complex(3, 3, rng));
    const CoherenceMap w = coherence_map(ComplexImage(img, Sampling{}), k, {m0, CoherenceAxes::both});
    double worst = 0.0;
    for (std::size_t r = 0; r < 8; ++r)
      for (std::size_t c = 0; c < 8; ++c)
        worst = std::max(worst, std::abs(w.w(r, c) - oracle::coherence_at(img, k, r, c, m0)));
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("coherence bounds, scale invariance and m0 monotonicity") {
  std::mt19937_64 rng(2);
  const Grid<cplx> img = random_complex(24, 20, rng);
  const FilterKernel k(random_complex(9, 7, rng));
  const ComplexImage im(img, Sampling{});
  for (auto axes : {CoherenceAxes::both, CoherenceAxes::lateral}) {
    CoherenceMap prev;
    for (std::size_t m0 = 0; m0 <= 3; ++m0) {
      const CoherenceMap w = coherence_map(im, k, {m0, axes});
      for (double v : w.w.values()) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
      if (m0 > 0)
        for (std::size_t i = 0; i < w.w.size(); ++i) CHECK(w.w.values()[i] >= prev.w.values()[i] - 1e-12);
      prev = w;
    }
  }

  const cplx c(-0.3, 2.2);
  Grid<cplx> img2 = img;
  for (auto& v : img2.values()) v *= c;
  Grid<cplx> taps2 = k.taps;
  for (auto& v : taps2.values()) v *= c;
  const CoherenceMap base = coherence_map(im, k);
  const CoherenceMap a = coherence_map(ComplexImage(img2, Sampling{}), k);
  const CoherenceMap b = coherence_map(im, FilterKernel(taps2));
  for (std::size_t i = 0; i < base.w.size(); ++i) {
    CHECK(std::abs(a.w.values()[i] - base.w.values()[i]) <= 1e-12);
    CHECK(std::abs(b.w.values()[i] - base.w.values()[i]) <= 1e-12);
  }
}

TEST_CASE("m0 beyond the kernel half-size is rejected") {
  const ComplexImage img(Grid<cplx>(10, 10, cplx(1.0)), Sampling{});
  CHECK_THROWS_AS(coherence_map(img, FilterKernel::impulse(3, 3), {2, CoherenceAxes::both}), std::invalid_argument);
  CHECK_THROWS_AS(coherence_map(img, FilterKernel::impulse(11, 3)), std::invalid_argument);
}

TEST_CASE("weighting") {
  std::mt19937_64 rng(3);
  const ComplexImage img(random_complex(6, 5, rng), Sampling{});
  CHECK(apply_weighting(img, CoherenceMap(Grid<double>(6, 5, 1.0))).data == img.data);
  const ComplexImage zero = apply_weighting(img, CoherenceMap(Grid<double>(6, 5, 0.0)), 1.0);
  for (const auto& v : zero.data.values()) CHECK(v == cplx(0.0));
  const CoherenceMap half(Grid<double>(6, 5, 0.25));
  CHECK(apply_weighting(img, half, 0.0).data == img.data);
  const ComplexImage sq = apply_weighting(img, half, 0.5);
  for (std::size_t i = 0; i < sq.data.size(); ++i) {
    CHECK(std::abs(sq.data.values()[i] - 0.5 * img.data.values()[i]) <= 1e-15);
  }
  CHECK_THROWS_AS(apply_weighting(img, CoherenceMap(Grid<double>(5, 5, 1.0))), std::invalid_argument);
  CHECK_THROWS_AS(apply_weighting(img, half, -1.0), std::invalid_argument);

  const EnvelopeImage env(Grid<double>(6, 5, 2.0), Sampling{});
  const EnvelopeImage we = apply_weighting(env, half, 1.0);
  for (double v : we.env.values()) CHECK(v == 0.5);
}
