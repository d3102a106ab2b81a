#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "psfr/metrics.hpp"

using namespace psfr;

namespace {

// Left half of a 1 x (n_in + n_out) strip is "inside", the rest "outside".
struct Strip {
  EnvelopeImage env;
  RegionMask inside;
  RegionMask outside;
};

Strip strip(const std::vector<double>& in, const std::vector<double>& out) {
  const std::size_t n = in.size() + out.size();
  std::vector<double> v = in;
  v.insert(v.end(), out.begin(), out.end());
  Strip s{EnvelopeImage(Grid<double>(1, n, std::move(v)), Sampling{}), {Grid<std::uint8_t>(1, n), "in"},
          {Grid<std::uint8_t>(1, n), "out"}};
  for (std::size_t i = 0; i < n; ++i) (i < in.size() ? s.inside : s.outside).bits(0, i) = 1;
  return s;
}

std::vector<double> draw(std::size_t n, auto dist, std::mt19937_64& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = std::max(0.0, dist(rng));
  return v;
}

}  // namespace

TEST_CASE("contrast ratio") {
  const Strip same = strip({1.0, 2.0, 3.0}, {3.0, 2.0, 1.0});
  CHECK(contrast_ratio(same.env, same.inside, same.outside).value == 0.0);
  const Strip ten = strip({1.0, 1.0}, {10.0, 10.0});
  CHECK(contrast_ratio(ten.env, ten.inside, ten.outside).value == doctest::Approx(20.0));
  const Strip rev = strip({10.0, 10.0}, {1.0, 1.0});
  CHECK(contrast_ratio(rev.env, rev.inside, rev.outside).value == doctest::Approx(20.0));
  const Strip dark = strip({0.0, 0.0}, {1.0, 2.0});
  const MetricValue d = contrast_ratio(dark.env, dark.inside, dark.outside);
  CHECK(d.degenerate);
  CHECK(d.value == std::numeric_limits<double>::infinity());
}

TEST_CASE("cnr") {
  const Strip flat = strip({1.0, 1.0}, {1.0, 1.0});
  const CnrValue z = cnr(flat.env, flat.inside, flat.outside);
  CHECK(z.linear == 0.0);
  CHECK(z.db.degenerate);
  CHECK(z.db.value == -std::numeric_limits<double>::infinity());

  const Strip step = strip({1.0, 1.0}, {2.0, 2.0});
  const CnrValue inf = cnr(step.env, step.inside, step.outside);
  CHECK(inf.db.degenerate);
  CHECK(inf.db.value == std::numeric_limits<double>::infinity());

  std::mt19937_64 rng(1);
  const Strip g = strip(draw(100000, std::normal_distribution<double>(1.0, 0.1), rng),
                        draw(100000, std::normal_distribution<double>(2.0, 0.1), rng));
  const CnrValue c = cnr(g.env, g.inside, g.outside);
  CHECK(c.linear == doctest::Approx(1.0 / std::sqrt(0.02)).epsilon(0.02));
  CHECK(c.db.value == doctest::Approx(20.0 * std::log10(c.linear)));
}

TEST_CASE("gcnr analytic cases") {
  const std::vector<double> a{0.1, 0.5, 0.7, 0.9};
  std::vector<double> b = a;
  std::reverse(b.begin(), b.end());
  const Strip same = strip(a, b);
  CHECK(gcnr(same.env, same.inside, same.outside) == 0.0);
  const Strip apart = strip({0.1, 0.2, 0.3}, {0.7, 0.8, 1.0});
  CHECK(gcnr(apart.env, apart.inside, apart.outside) == 1.0);

  std::mt19937_64 rng(2);
  const Strip u = strip(draw(1000000, std::uniform_real_distribution<double>(0.0, 1.0), rng),
                        draw(1000000, std::uniform_real_distribution<double>(0.5, 1.5), rng));
  CHECK(gcnr(u.env, u.inside, u.outside, 256) == doctest::Approx(0.5).epsilon(0.02));
  CHECK(std::abs(gcnr(u.env, u.inside, u.outside, 256) - 0.5) <= 0.01);

  CHECK_THROWS_AS(gcnr(u.env, u.inside, u.outside, 1), std::invalid_argument);
}

TEST_CASE("metrics are scale and permutation invariant") {
  std::mt19937_64 rng(3);
  std::vector<double> in = draw(500, std::exponential_distribution<double>(2.0), rng);
  std::vector<double> out = draw(700, std::exponential_distribution<double>(0.7), rng);
  const Strip base = strip(in, out);
  const ImageMetrics m = evaluate(base.env, base.inside, base.outside);
  CHECK(m.gcnr >= 0.0);
  CHECK(m.gcnr <= 1.0);

  for (double c : {0.25, 3.0, 1e6}) {
    std::vector<double> si = in, so = out;
    for (auto& v : si) v *= c;
    for (auto& v : so) v *= c;
    const Strip s = strip(si, so);
    const ImageMetrics ms = evaluate(s.env, s.inside, s.outside);
    CHECK(ms.cr_db.value == doctest::Approx(m.cr_db.value).epsilon(1e-12));
    CHECK(ms.cnr.linear == doctest::Approx(m.cnr.linear).epsilon(1e-12));
    CHECK(ms.gcnr == m.gcnr);
  }

  std::shuffle(in.begin(), in.end(), rng);
  std::shuffle(out.begin(), out.end(), rng);
  const Strip p = strip(in, out);
  const ImageMetrics mp = evaluate(p.env, p.inside, p.outside);
  CHECK(mp.cr_db.value == doctest::Approx(m.cr_db.value).epsilon(1e-12));
  CHECK(mp.cnr.linear == doctest::Approx(m.cnr.linear).epsilon(1e-12));
  CHECK(mp.gcnr == m.gcnr);
}

TEST_CASE("mask errors") {
  const Strip s = strip({1.0}, {2.0});
  RegionMask empty{Grid<std::uint8_t>(1, 2), "empty"};
  CHECK_THROWS_AS(contrast_ratio(s.env, empty, s.outside), std::invalid_argument);
  RegionMask wrong{Grid<std::uint8_t>(2, 2, 1), "wrong"};
  CHECK_THROWS_AS(gcnr(s.env, s.inside, wrong), std::invalid_argument);
}
