#pragma once

#include "psfr/grid.hpp"

namespace psfr {

enum class FilterMethod {
  frequency,  // closed form on the padded grid, then cropped
  exact,      // dense normal equations of the finite-support problem
};

struct FilterDesign {
  double eps = 1e-2;          // ridge weight relative to the peak spectral power of the aberrated PSF
  std::size_t kernel_nx = 21;  // lateral taps
  std::size_t kernel_nz = 41;  // axial taps
  double taper = 0.2;          // raised-cosine fraction at each crop edge, 0 disables
  FilterMethod method = FilterMethod::frequency;
};

// Regularised least-squares restoration filter K with psf_a * K ~ psf_i.
//
// Both PSFs are zero-padded to (psf + kernel - 1) per axis and the ridge
// problem
//     min_K ||psf_a (*) K - psf_i||^2 + eps * max|A|^2 * ||K||^2
// (periodic convolution on the padded grid, A the DFT of psf_a) is solved
// bin by bin:
//     K = I conj(A) / (|A|^2 + eps * max|A|^2).
// The inverse transform is rolled so zero lag sits on the kernel centre,
// cropped to the kernel dims and optionally edge-tapered.
//
// FilterMethod::exact instead minimises the same objective over kernels of
// the requested support with linear (not periodic) convolution, by solving
// the (kz*kx)^2 normal equations directly. No crop, so no taper. Slower, and
// the fit is better because nothing is lost at the crop.
FilterKernel design_filter(const Psf& psf_a, const Psf& psf_i, const FilterDesign& design = {});

FilterMethod parse_filter_method(const std::string& name);
const char* to_string(FilterMethod m);

// Separable raised-cosine edge taper for an nz x nx kernel.
Grid<double> kernel_taper(std::size_t nz, std::size_t nx, double fraction);

// Same-size convolution of an image with an anchored kernel (zero padding).
ComplexImage apply_filter(const ComplexImage& img, const FilterKernel& k);

// Full linear convolution psf * k, (psf + kernel - 1) per axis. The psf
// centre lands on (center + anchor).
Grid<cplx> restored_response(const Psf& psf, const FilterKernel& k);

// ||psf_a * k - psf_i|| / ||psf_i|| over the full convolution support.
double restoration_residual(const Psf& psf_a, const Psf& psf_i, const FilterKernel& k);

}  // namespace psfr
