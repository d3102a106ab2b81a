#include "psfr/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>

namespace psfr::fft {

namespace {

// The FFTW planner is not re-entrant; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void transform(Grid<cplx>& g, int sign) {
  const auto rows = static_cast<int>(g.rows());
  const auto cols = static_cast<int>(g.cols());
  if (rows == 0 || cols == 0) return;
  const std::size_t n = g.size();

  fftw_complex* buf = fftw_alloc_complex(n);
  if (buf == nullptr) throw std::bad_alloc();
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    // ESTIMATE keeps the chosen algorithm, and hence the rounding, fixed
    // from run to run.
    plan = fftw_plan_dft_2d(rows, cols, buf, buf, sign, FFTW_ESTIMATE);
  }
  std::memcpy(buf, g.values().data(), n * sizeof(fftw_complex));
  fftw_execute(plan);
  std::memcpy(static_cast<void*>(g.values().data()), buf, n * sizeof(fftw_complex));
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
}

}  // namespace

void forward(Grid<cplx>& g) { transform(g, FFTW_FORWARD); }

void inverse(Grid<cplx>& g) {
  transform(g, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(g.size());
  for (auto& v : g.values()) v *= scale;
}

Grid<cplx> zero_pad(const Grid<cplx>& src, std::size_t rows, std::size_t cols) {
  if (rows < src.rows() || cols < src.cols()) throw std::invalid_argument("zero_pad: target smaller than source");
  Grid<cplx> out(rows, cols);
  for (std::size_t r = 0; r < src.rows(); ++r) std::copy(src.row(r).begin(), src.row(r).end(), out.row(r).begin());
  return out;
}

Grid<cplx> convolve_same(const Grid<cplx>& img, const Grid<cplx>& kernel, Index2 anchor) {
  const std::size_t pr = img.rows() + kernel.rows() - 1;
  const std::size_t pc = img.cols() + kernel.cols() - 1;
  Grid<cplx> a = zero_pad(img, pr, pc);
  Grid<cplx> b = zero_pad(kernel, pr, pc);
  forward(a);
  forward(b);
  for (std::size_t i = 0; i < a.size(); ++i) a.values()[i] *= b.values()[i];
  inverse(a);

  Grid<cplx> out(img.rows(), img.cols());
  for (std::size_t r = 0; r < img.rows(); ++r)
    for (std::size_t c = 0; c < img.cols(); ++c) out(r, c) = a(r + anchor.row, c + anchor.col);
  return out;
}

Grid<cplx> convolve_full_direct(const Grid<cplx>& a, const Grid<cplx>& b) {
  Grid<cplx> out(a.rows() + b.rows() - 1, a.cols() + b.cols() - 1);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const cplx av = a(i, j);
      if (av == cplx{}) continue;
      for (std::size_t k = 0; k < b.rows(); ++k) {
        auto dst = out.row(i + k).subspan(j, b.cols());
        auto src = b.row(k);
        for (std::size_t l = 0; l < src.size(); ++l) dst[l] += av * src[l];
      }
    }
  return out;
}

}  // namespace psfr::fft
