#pragma once

#include <cstdint>
#include <filesystem>
#include <variant>

#include "psfr/grid.hpp"

namespace psfr {

// PSFK exchange format, little-endian:
//   offset 0   magic "PSFK"
//          4   u32 version (= 1)
//          8   u8  dtype code
//          9   u8  ndim (= 2)
//         10   6 reserved zero bytes
//         16   u64 dims[2] (rows, cols)
//         32   u64 payload byte count
//         40   row-major payload, complex values as interleaved (re, im)
enum class DType : std::uint8_t { f32 = 0, f64 = 1, c64 = 2, c128 = 3, u8 = 4, boolean = 5 };

inline constexpr std::size_t kPsfkHeaderBytes = 40;
inline constexpr std::uint32_t kPsfkVersion = 1;

std::size_t dtype_size(DType t);

// Any array the format can hold. u8 and bool share Grid<uint8_t>; the dtype
// tag tells them apart.
struct Array {
  using Storage = std::variant<Grid<float>, Grid<double>, Grid<std::complex<float>>, Grid<cplx>,
                               Grid<std::uint8_t>>;
  DType dtype = DType::f64;
  Storage grid;

  std::size_t rows() const;
  std::size_t cols() const;

  friend bool operator==(const Array&, const Array&) = default;
};

Array to_array(Grid<float> g);
Array to_array(Grid<double> g);
Array to_array(Grid<std::complex<float>> g);
Array to_array(Grid<cplx> g);
Array to_array(Grid<std::uint8_t> g, bool as_bool = false);

class FormatError : public IoError {
 public:
  enum class Kind { bad_magic, version_mismatch, truncated, bad_header, dimension };
  FormatError(Kind kind, const std::string& what) : IoError(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

void write_array(const std::filesystem::path& path, const Array& array);
Array read_array(const std::filesystem::path& path);

// Typed conveniences over read_array/write_array. Readers widen f32/c64
// payloads and accept real arrays where complex ones are expected.
void write_complex(const std::filesystem::path& path, const Grid<cplx>& g);
void write_real(const std::filesystem::path& path, const Grid<double>& g);
void write_mask(const std::filesystem::path& path, const RegionMask& mask);
Grid<cplx> read_complex(const std::filesystem::path& path);
Grid<double> read_real(const std::filesystem::path& path);
RegionMask read_mask(const std::filesystem::path& path);

}  // namespace psfr
