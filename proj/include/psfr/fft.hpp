#pragma once

#include "psfr/grid.hpp"

namespace psfr::fft {

// Unnormalised forward 2D DFT, in place.
void forward(Grid<cplx>& g);
// Inverse 2D DFT including the 1/N factor, in place.
void inverse(Grid<cplx>& g);

// Copy `src` into the top-left corner of a zero rows x cols grid.
Grid<cplx> zero_pad(const Grid<cplx>& src, std::size_t rows, std::size_t cols);

// Linear convolution out(r,c) = sum_{i,j} k(i,j) * img(r-i+a_r, c-j+a_c),
// zero outside img, returned on img's lattice. Evaluated as a product of
// spectra on a (img + k - 1) padded grid.
Grid<cplx> convolve_same(const Grid<cplx>& img, const Grid<cplx>& kernel, Index2 anchor);

// Full linear convolution, (a + b - 1) per axis, evaluated directly.
Grid<cplx> convolve_full_direct(const Grid<cplx>& a, const Grid<cplx>& b);

}  // namespace psfr::fft
