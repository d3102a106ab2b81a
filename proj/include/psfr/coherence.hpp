#pragma once

#include "psfr/grid.hpp"

namespace psfr {

// Which spectrum of the sliding product feeds the coherence ratio.
enum class CoherenceAxes {
  both,     // 2D DFT over the kernel support, square low-frequency box
  lateral,  // 1D DFT along each kernel row, low lateral bins only
};

struct CoherenceOptions {
  std::size_t m0 = 1;
  CoherenceAxes axes = CoherenceAxes::both;
};

// Filter-derived coherence index. At every pixel the point-wise product
// P(i,j) = k(i,j) * img(z-i, x-j) over the kernel support (the terms the
// convolution would sum) is transformed, and
//     w = sum_{|u|,|v| <= m0} |Q(u,v)|^2 / (N * sum |P|^2)
// where Q is the DFT of P and N its size (Parseval for the denominator).
// Pixels whose product carries no energy get w = 0.
CoherenceMap coherence_map(const ComplexImage& img, const FilterKernel& k, const CoherenceOptions& opts = {});

// out = img * w^p, phase preserved.
ComplexImage apply_weighting(const ComplexImage& img, const CoherenceMap& w, double p = 1.0);

// Same weighting on a detected envelope.
EnvelopeImage apply_weighting(const EnvelopeImage& env, const CoherenceMap& w, double p = 1.0);

}  // namespace psfr
