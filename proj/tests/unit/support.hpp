#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "psfr/grid.hpp"

namespace psfr::test {

inline Grid<cplx> random_complex(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Grid<cplx> g(rows, cols);
  for (auto& v : g.values()) {
    const double re = n(rng);
    const double im = n(rng);
    v = {re, im};
  }
  return g;
}

inline Psf as_psf(Grid<cplx> g) {
  Psf p;
  p.center = {g.rows() / 2, g.cols() / 2};
  p.patch = ComplexImage(std::move(g), Sampling{});
  return p;
}

inline double max_abs_diff(const Grid<cplx>& a, const Grid<cplx>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

// Per-test scratch directory under the system temp dir, removed on exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("psfr_unit_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace psfr::test
