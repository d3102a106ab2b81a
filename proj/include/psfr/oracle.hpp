#pragma once

// Brute-force reference computations. Nothing here goes through the FFT
// wrapper; these exist to cross-check the fast paths in selfcheck and tests.

#include "psfr/grid.hpp"
#include "psfr/restore.hpp"

namespace psfr::oracle {

// Unnormalised 2D DFT by direct summation.
Grid<cplx> dft2(const Grid<cplx>& g);

// Restoration filter from the dense normal equations
//     (A^H A + lambda I) k = A^H b
// where A is the periodic convolution matrix of psf_a on the
// (psf + kernel - 1) grid and lambda = eps * max|DFT(psf_a)|^2. Rolled and
// cropped like design_filter, without a taper.
FilterKernel filter_normal_equations(const Psf& psf_a, const Psf& psf_i, double eps, std::size_t kernel_nz,
                                     std::size_t kernel_nx);

// Same-size anchored convolution by direct summation.
Grid<cplx> convolve_same(const Grid<cplx>& img, const Grid<cplx>& kernel, Index2 anchor);

// Coherence index at one pixel via an explicit full 2D DFT of the sliding
// product.
double coherence_at(const Grid<cplx>& img, const FilterKernel& k, std::size_t z, std::size_t x, std::size_t m0);

double relative_l2(const Grid<cplx>& a, const Grid<cplx>& b);

}  // namespace psfr::oracle
