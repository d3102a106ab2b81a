#pragma once

#include "psfr/grid.hpp"

namespace psfr {

// A metric value that may be degenerate (a zero mean or zero variance).
// Degenerate values carry +-infinity and set the flag instead of throwing.
struct MetricValue {
  double value = 0.0;
  bool degenerate = false;
};

struct RegionStats {
  double mean = 0.0;
  double variance = 0.0;  // population variance
  std::size_t count = 0;
};

RegionStats region_stats(const EnvelopeImage& env, const RegionMask& mask);

// |20 log10(mu_out / mu_in)|.
MetricValue contrast_ratio(const EnvelopeImage& env, const RegionMask& inside, const RegionMask& outside);

struct CnrValue {
  MetricValue db;  // 20 log10 of the linear value
  double linear = 0.0;
};

// |mu_out - mu_in| / sqrt(var_out + var_in).
CnrValue cnr(const EnvelopeImage& env, const RegionMask& inside, const RegionMask& outside);

// 1 - histogram overlap on n_bins shared equal-width bins over
// [0, max(env over both masks)].
double gcnr(const EnvelopeImage& env, const RegionMask& inside, const RegionMask& outside, std::size_t n_bins = 256);

struct ImageMetrics {
  MetricValue cr_db;
  CnrValue cnr;
  double gcnr = 0.0;
};

ImageMetrics evaluate(const EnvelopeImage& env, const RegionMask& inside, const RegionMask& outside,
                      std::size_t n_bins = 256);

}  // namespace psfr
