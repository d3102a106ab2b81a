#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace psfr {

using cplx = std::complex<double>;

// Failure categories; the CLI maps each onto its own exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// Dense row-major 2D array. Rows run along depth (z), columns along the
// lateral axis (x).
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Grid(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) throw std::invalid_argument("Grid: data size does not match dims");
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  std::span<T> row(std::size_t r) { return std::span<T>(data_).subspan(r * cols_, cols_); }
  std::span<const T> row(std::size_t r) const { return std::span<const T>(data_).subspan(r * cols_, cols_); }

  bool same_shape(const auto& other) const noexcept {
    return rows_ == other.rows() && cols_ == other.cols();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

struct Index2 {
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const Index2&, const Index2&) = default;
};

struct Point2 {
  double x = 0.0;
  double z = 0.0;
};

// Physical sampling of an image lattice. Pixel (r, c) sits at
// (x0 + c*dx, z0 + r*dz).
struct Sampling {
  double dx = 1.0;
  double dz = 1.0;
  double x0 = 0.0;
  double z0 = 0.0;

  double x_at(std::size_t c) const noexcept { return x0 + static_cast<double>(c) * dx; }
  double z_at(std::size_t r) const noexcept { return z0 + static_cast<double>(r) * dz; }
};

// Lattice plus extent; the argument type for anything that samples a region.
struct GridSpec {
  std::size_t nx = 0;
  std::size_t nz = 0;
  Sampling sampling;

  // nz x nx grid whose centre pixel sits on `centre`.
  static GridSpec centered(Point2 centre, std::size_t nx, std::size_t nz, double dx, double dz);
  void validate() const;
};

struct ArrayGeometry {
  std::size_t n_elements = 64;
  double pitch = 1.54e-4;
  std::vector<double> element_x;
  double f0 = 5e6;
  double c0 = 1540.0;
  double fs = 40e6;
  Point2 tx_focus{0.0, 0.025};

  // Uniform linear array centred on x = 0.
  static ArrayGeometry linear(std::size_t n_elements, double pitch, double f0, double c0, double fs,
                              Point2 tx_focus);
  double wavelength() const noexcept { return c0 / f0; }
  double aperture() const noexcept { return static_cast<double>(n_elements) * pitch; }
  void validate() const;
};

// Gaussian-windowed sinusoid. The -6 dB fractional bandwidth sets the
// envelope width; samples outside +-duration/2 are zero.
struct Pulse {
  double f0 = 5e6;
  double fractional_bandwidth = 0.6;
  double duration = 1.2e-6;

  double envelope(double t) const noexcept;
  double operator()(double t) const noexcept;
  void validate() const;
  // Duration covering the envelope down to about -100 dB.
  static double default_duration(double f0, double fractional_bandwidth);
};

struct AberrationProfile {
  std::vector<double> delays;
  double rms_target = 0.0;
  double corr_len = 0.0;
  std::uint64_t seed = 0;

  void validate(std::size_t n_elements) const;
};

struct ComplexImage {
  Grid<cplx> data;
  Sampling sampling;

  ComplexImage() = default;
  ComplexImage(Grid<cplx> data, Sampling sampling);
  std::size_t rows() const noexcept { return data.rows(); }
  std::size_t cols() const noexcept { return data.cols(); }
};

struct Psf {
  ComplexImage patch;
  Index2 center;
  // Peak magnitude divided out during normalisation.
  double gain = 1.0;
};

struct FilterKernel {
  Grid<cplx> taps;
  Index2 anchor;

  FilterKernel() = default;
  explicit FilterKernel(Grid<cplx> taps);
  static FilterKernel impulse(std::size_t rows, std::size_t cols);
};

// Baseband scatterer amplitudes on the image lattice. Complex, so that the
// convolution model yields fully developed (circular) speckle.
struct ScattererMap {
  Grid<cplx> amps;
  Sampling sampling;
};

struct RegionMask {
  Grid<std::uint8_t> bits;
  std::string label;

  std::size_t count() const noexcept;
};

struct CoherenceMap {
  Grid<double> w;

  CoherenceMap() = default;
  explicit CoherenceMap(Grid<double> w);
};

struct EnvelopeImage {
  Grid<double> env;
  Sampling sampling;

  EnvelopeImage() = default;
  EnvelopeImage(Grid<double> env, Sampling sampling);
};

struct ChannelData {
  Grid<double> rf;  // n_elements x n_samples
  double fs = 40e6;
  double t0 = 0.0;
};

bool all_finite(std::span<const double> v) noexcept;
bool all_finite(std::span<const cplx> v) noexcept;

// Shift the envelope peak onto the centre of an odd-sized patch (zero fill)
// and scale the peak magnitude to 1.
Psf center_psf(const ComplexImage& raw);

// Crop or zero-extend a PSF to nz x nx (both odd) around its centre.
Psf crop_psf(const Psf& psf, std::size_t nz, std::size_t nx);

}  // namespace psfr
