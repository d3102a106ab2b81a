#include <cmath>
#include <fstream>
#include <iterator>

#include "doctest.h"
#include "psfr/render.hpp"
#include "support.hpp"

using namespace psfr;

TEST_CASE("envelope is the magnitude") {
  Grid<cplx> g(1, 2);
  g(0, 0) = {3.0, 4.0};
  const EnvelopeImage e = envelope(ComplexImage(g, Sampling{}));
  CHECK(e.env(0, 0) == 5.0);
  CHECK(e.env(0, 1) == 0.0);

  std::mt19937_64 rng(1);
  const Grid<cplx> r = test::random_complex(4, 4, rng);
  Grid<cplx> scaled = r;
  const cplx c(-1.5, 2.0);
  for (auto& v : scaled.values()) v *= c;
  const EnvelopeImage a = envelope(ComplexImage(r, Sampling{}));
  const EnvelopeImage b = envelope(ComplexImage(scaled, Sampling{}));
  for (std::size_t i = 0; i < a.env.size(); ++i)
    CHECK(b.env.values()[i] == doctest::Approx(std::abs(c) * a.env.values()[i]).epsilon(1e-14));
}

TEST_CASE("log compression levels") {
  const double dr = 60.0;
  Grid<double> g(1, 5);
  g(0, 0) = 1.0;
  g(0, 1) = 1e-3;                      // exactly -60 dB
  g(0, 2) = std::pow(10.0, -30.0 / 20.0);  // -30 dB midpoint
  g(0, 3) = 1e-5;                      // below the range
  g(0, 4) = 0.0;
  const auto b = log_compress(EnvelopeImage(g, Sampling{}), dr);
  CHECK(b(0, 0) == 255);
  CHECK(b(0, 1) == 0);
  CHECK(b(0, 2) == 128);
  CHECK(b(0, 3) == 0);
  CHECK(b(0, 4) == 0);

  const auto zero = log_compress(EnvelopeImage(Grid<double>(3, 3), Sampling{}), dr);
  for (auto v : zero.values()) CHECK(v == 0);
  CHECK_THROWS_AS(log_compress(EnvelopeImage(g, Sampling{}), 0.0), std::invalid_argument);
}

TEST_CASE("log compression is monotone") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Grid<double> lo(16, 16), hi(16, 16);
  for (std::size_t i = 0; i < lo.size(); ++i) {
    lo.values()[i] = std::pow(10.0, -4.0 * u(rng));
    hi.values()[i] = lo.values()[i] * (1.0 + u(rng));
  }
  // Pin the maxima so both images share the normalisation.
  lo(0, 0) = hi(0, 0) = 4.0;
  const auto bl = log_compress(EnvelopeImage(lo, Sampling{}));
  const auto bh = log_compress(EnvelopeImage(hi, Sampling{}));
  for (std::size_t i = 0; i < bl.size(); ++i) CHECK(bh.values()[i] >= bl.values()[i]);
}

TEST_CASE("PGM output") {
  test::TempDir dir("pgm");
  Grid<std::uint8_t> b(2, 2);
  b(0, 0) = 0;
  b(0, 1) = 64;
  b(1, 0) = 128;
  b(1, 1) = 255;
  write_image(b, dir / "x.pgm");
  std::ifstream in(dir / "x.pgm", std::ios::binary);
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  CHECK(bytes == std::string("P5\n2 2\n255\n") + std::string("\x00\x40\x80\xff", 4));
  CHECK(read_pgm(dir / "x.pgm") == b);

  Grid<std::uint8_t> wide(3, 7, 9);
  write_image(wide, dir / "w.pgm");
  CHECK(read_pgm(dir / "w.pgm") == wide);

  CHECK_THROWS_AS(write_image(b, dir / "missing" / "x.pgm"), IoError);
  CHECK_THROWS_AS(write_image(b, dir / "x.png", ImageFormat::png), IoError);
  CHECK(parse_image_format("a/B.PNG") == ImageFormat::png);
  CHECK(parse_image_format("a/b.pgm") == ImageFormat::pgm);
}

TEST_CASE("lateral profile") {
  Grid<double> g(3, 5);
  g(1, 3) = 2.0;
  const Sampling s{0.5, 1.0, -1.0, 10.0};
  const auto p = lateral_profile(g, s, 11.2);
  REQUIRE(p.size() == 5);
  CHECK(p[3].value == 0.0);
  CHECK(p[3].x == 0.5);
  for (std::size_t i : {0u, 1u, 2u, 4u}) CHECK(p[i].value == -std::numeric_limits<double>::infinity());
  const auto lin = lateral_profile(g, s, 11.0, true);
  CHECK(lin[3].value == 2.0);
  CHECK_THROWS_AS(lateral_profile(g, s, 20.0), std::invalid_argument);
  CHECK_THROWS_AS(lateral_profile(g, s, 9.0), std::invalid_argument);
}

TEST_CASE("symmetric row gives a symmetric profile") {
  Grid<double> g(1, 21);
  for (std::size_t c = 0; c < 21; ++c) {
    const double x = static_cast<double>(c) - 10.0;
    g(0, c) = std::exp(-x * x / 18.0) + 0.05 * (1.0 + std::cos(x));
  }
  const auto p = lateral_profile(g, Sampling{}, 0.0);
  for (std::size_t c = 0; c < 21; ++c) CHECK(std::abs(p[c].value - p[20 - c].value) <= 1e-9);
  // Gaussian part dominates; width at -6 dB lies near the analytic value.
  const double w = profile_width(p, -6.0);
  CHECK(w > 0.0);
  CHECK(w < 20.0);
}

TEST_CASE("profile width interpolates the crossing") {
  // Triangle peak: 0 dB at x = 0, linear in dB down to -12 at x = +-2.
  std::vector<ProfileSample> p;
  for (int i = -4; i <= 4; ++i) p.push_back({static_cast<double>(i), -6.0 * std::abs(i)});
  CHECK(profile_width(p, -6.0) == doctest::Approx(2.0));
  CHECK(profile_width(p, -9.0) == doctest::Approx(3.0));
}
