#include "psfr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace psfr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_mask(const EnvelopeImage& env, const RegionMask& m) {
  if (!env.env.same_shape(m.bits)) throw std::invalid_argument("metrics: mask '" + m.label + "' shape mismatch");
  if (m.count() == 0) throw std::invalid_argument("metrics: mask '" + m.label + "' is empty");
}

}  // namespace

RegionStats region_stats(const EnvelopeImage& env, const RegionMask& mask) {
  check_mask(env, mask);
  RegionStats s;
  double sum = 0.0;
  for (std::size_t i = 0; i < env.env.size(); ++i)
    if (mask.bits.values()[i]) {
      sum += env.env.values()[i];
      ++s.count;
    }
  s.mean = sum / static_cast<double>(s.count);
  double ss = 0.0;
  for (std::size_t i = 0; i < env.env.size(); ++i)
    if (mask.bits.values()[i]) {
      const double d = env.env.values()[i] - s.mean;
      ss += d * d;
    }
  s.variance = ss / static_cast<double>(s.count);
  return s;
}

MetricValue contrast_ratio(const EnvelopeImage& env, const RegionMask& inside, const RegionMask& outside) {
  const RegionStats in = region_stats(env, inside);
  const RegionStats out = region_stats(env, outside);
  if (in.mean == 0.0 || out.mean == 0.0) return {kInf, true};
  return {std::abs(20.0 * std::log10(out.mean / in.mean)), false};
}

CnrValue cnr(const EnvelopeImage& env, const RegionMask& inside, const RegionMask& outside) {
  const RegionStats in = region_stats(env, inside);
  const RegionStats out = region_stats(env, outside);
  const double gap = std::abs(out.mean - in.mean);
  const double spread = std::sqrt(out.variance + in.variance);
  if (gap == 0.0) return {{-kInf, true}, 0.0};
  if (spread == 0.0) return {{kInf, true}, kInf};
  const double lin = gap / spread;
  return {{20.0 * std::log10(lin), false}, lin};
}

double gcnr(const EnvelopeImage& env, const RegionMask& inside, const RegionMask& outside, std::size_t n_bins) {
  check_mask(env, inside);
  check_mask(env, outside);
  if (n_bins < 2) throw std::invalid_argument("gcnr: n_bins must be >= 2");

  double top = 0.0;
  for (std::size_t i = 0; i < env.env.size(); ++i)
    if (inside.bits.values()[i] || outside.bits.values()[i]) top = std::max(top, env.env.values()[i]);

  std::vector<std::uint64_t> h_in(n_bins, 0);
  std::vector<std::uint64_t> h_out(n_bins, 0);
  const auto bin_of = [&](double v) -> std::size_t {
    if (!(top > 0.0)) return 0;
    const double pos = v / top * static_cast<double>(n_bins);
    return std::min(n_bins - 1, static_cast<std::size_t>(pos));
  };
  std::uint64_t n_in = 0;
  std::uint64_t n_out = 0;
  for (std::size_t i = 0; i < env.env.size(); ++i) {
    const double v = env.env.values()[i];
    if (inside.bits.values()[i]) {
      ++h_in[bin_of(v)];
      ++n_in;
    }
    if (outside.bits.values()[i]) {
      ++h_out[bin_of(v)];
      ++n_out;
    }
  }
  // Overlap in integer arithmetic: identical and disjoint histograms give
  // exactly 0 and 1.
  std::uint64_t shared = 0;
  for (std::size_t b = 0; b < n_bins; ++b) shared += std::min(h_in[b] * n_out, h_out[b] * n_in);
  const std::uint64_t total = n_in * n_out;
  return static_cast<double>(total - shared) / static_cast<double>(total);
}

ImageMetrics evaluate(const EnvelopeImage& env, const RegionMask& inside, const RegionMask& outside,
                      std::size_t n_bins) {
  return {contrast_ratio(env, inside, outside), cnr(env, inside, outside), gcnr(env, inside, outside, n_bins)};
}

}  // namespace psfr
