#include "psfr/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

namespace psfr {

namespace {

constexpr std::array<char, 4> kMagic{'P', 'S', 'F', 'K'};

template <typename T>
struct Scalar {
  using type = T;
};
template <typename T>
struct Scalar<std::complex<T>> {
  using type = T;
};

template <typename T>
void put_le(std::vector<char>& buf, std::size_t offset, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[offset + i] = static_cast<char>((value >> (8 * i)) & 0xFF);
}

template <typename T>
T get_le(const char* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

void swap_scalars(char* bytes, std::size_t n_bytes, std::size_t scalar_size) {
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i + scalar_size <= n_bytes; i += scalar_size) std::reverse(bytes + i, bytes + i + scalar_size);
  } else {
    (void)bytes;
    (void)n_bytes;
    (void)scalar_size;
  }
}

template <typename T>
std::vector<char> payload_of(const Grid<T>& g) {
  std::vector<char> out(g.size() * sizeof(T));
  if (!out.empty()) std::memcpy(out.data(), g.values().data(), out.size());
  swap_scalars(out.data(), out.size(), sizeof(typename Scalar<T>::type));
  return out;
}

template <typename T>
Grid<T> grid_from(std::size_t rows, std::size_t cols, std::vector<char>& bytes) {
  swap_scalars(bytes.data(), bytes.size(), sizeof(typename Scalar<T>::type));
  std::vector<T> values(rows * cols);
  if (!values.empty()) std::memcpy(values.data(), bytes.data(), bytes.size());
  return Grid<T>(rows, cols, std::move(values));
}

}  // namespace

std::size_t dtype_size(DType t) {
  switch (t) {
    case DType::f32: return 4;
    case DType::f64: return 8;
    case DType::c64: return 8;
    case DType::c128: return 16;
    case DType::u8: return 1;
    case DType::boolean: return 1;
  }
  throw std::invalid_argument("unknown dtype");
}

std::size_t Array::rows() const {
  return std::visit([](const auto& g) { return g.rows(); }, grid);
}

std::size_t Array::cols() const {
  return std::visit([](const auto& g) { return g.cols(); }, grid);
}

Array to_array(Grid<float> g) { return Array{DType::f32, std::move(g)}; }
Array to_array(Grid<double> g) { return Array{DType::f64, std::move(g)}; }
Array to_array(Grid<std::complex<float>> g) { return Array{DType::c64, std::move(g)}; }
Array to_array(Grid<cplx> g) { return Array{DType::c128, std::move(g)}; }
Array to_array(Grid<std::uint8_t> g, bool as_bool) {
  return Array{as_bool ? DType::boolean : DType::u8, std::move(g)};
}

void write_array(const std::filesystem::path& path, const Array& array) {
  const std::size_t rows = array.rows();
  const std::size_t cols = array.cols();
  if (rows == 0 || cols == 0)
    throw FormatError(FormatError::Kind::dimension, "write_array: zero-size dimension");
  constexpr std::size_t kMaxDim = std::size_t{1} << 32;
  if (rows > kMaxDim || cols > kMaxDim)
    throw FormatError(FormatError::Kind::dimension, "write_array: dimension exceeds 2^32");

  std::vector<char> payload = std::visit([](const auto& g) { return payload_of(g); }, array.grid);
  if (payload.size() != rows * cols * dtype_size(array.dtype))
    throw std::invalid_argument("write_array: dtype tag does not match storage");

  std::vector<char> header(kPsfkHeaderBytes, 0);
  std::copy(kMagic.begin(), kMagic.end(), header.begin());
  put_le<std::uint32_t>(header, 4, kPsfkVersion);
  header[8] = static_cast<char>(array.dtype);
  header[9] = 2;
  put_le<std::uint64_t>(header, 16, rows);
  put_le<std::uint64_t>(header, 24, cols);
  put_le<std::uint64_t>(header, 32, payload.size());

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

Array read_array(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());

  std::vector<char> header(kPsfkHeaderBytes);
  in.read(header.data(), static_cast<std::streamsize>(header.size()));
  const auto got = static_cast<std::size_t>(in.gcount());
  if (got < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), header.begin()))
    throw FormatError(FormatError::Kind::bad_magic, "bad magic in " + path.string());
  if (got < kPsfkHeaderBytes) throw FormatError(FormatError::Kind::truncated, "truncated header in " + path.string());

  const auto version = get_le<std::uint32_t>(header.data() + 4);
  if (version != kPsfkVersion)
    throw FormatError(FormatError::Kind::version_mismatch,
                      "unsupported PSFK version " + std::to_string(version) + " in " + path.string());

  const auto code = static_cast<std::uint8_t>(header[8]);
  if (code > static_cast<std::uint8_t>(DType::boolean))
    throw FormatError(FormatError::Kind::bad_header, "unknown dtype code " + std::to_string(code));
  if (header[9] != 2) throw FormatError(FormatError::Kind::bad_header, "only 2D arrays are supported");
  const auto dtype = static_cast<DType>(code);

  const auto rows = get_le<std::uint64_t>(header.data() + 16);
  const auto cols = get_le<std::uint64_t>(header.data() + 24);
  const auto n_bytes = get_le<std::uint64_t>(header.data() + 32);
  if (rows == 0 || cols == 0) throw FormatError(FormatError::Kind::dimension, "zero-size dimension");
  const std::uint64_t cap = std::numeric_limits<std::uint64_t>::max() / dtype_size(dtype);
  if (rows > cap / cols || n_bytes != rows * cols * dtype_size(dtype))
    throw FormatError(FormatError::Kind::bad_header, "payload size does not match dims");

  std::vector<char> payload(n_bytes);
  in.read(payload.data(), static_cast<std::streamsize>(n_bytes));
  if (static_cast<std::uint64_t>(in.gcount()) != n_bytes)
    throw FormatError(FormatError::Kind::truncated, "truncated payload in " + path.string());

  switch (dtype) {
    case DType::f32: return Array{dtype, grid_from<float>(rows, cols, payload)};
    case DType::f64: return Array{dtype, grid_from<double>(rows, cols, payload)};
    case DType::c64: return Array{dtype, grid_from<std::complex<float>>(rows, cols, payload)};
    case DType::c128: return Array{dtype, grid_from<cplx>(rows, cols, payload)};
    case DType::u8:
    case DType::boolean: return Array{dtype, grid_from<std::uint8_t>(rows, cols, payload)};
  }
  throw FormatError(FormatError::Kind::bad_header, "unknown dtype");
}

void write_complex(const std::filesystem::path& path, const Grid<cplx>& g) { write_array(path, to_array(g)); }
void write_real(const std::filesystem::path& path, const Grid<double>& g) { write_array(path, to_array(g)); }

void write_mask(const std::filesystem::path& path, const RegionMask& mask) {
  write_array(path, to_array(mask.bits, true));
}

namespace {

template <typename Out, typename In>
Grid<Out> convert(const Grid<In>& g) {
  Grid<Out> out(g.rows(), g.cols());
  auto src = g.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if constexpr (std::is_same_v<Out, cplx>) {
      dst[i] = cplx(src[i]);
    } else {
      dst[i] = static_cast<Out>(src[i]);
    }
  }
  return out;
}

}  // namespace

Grid<cplx> read_complex(const std::filesystem::path& path) {
  Array a = read_array(path);
  return std::visit(
      [&](auto& g) -> Grid<cplx> {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, Grid<cplx>>) {
          return std::move(g);
        } else if constexpr (std::is_same_v<G, Grid<std::uint8_t>>) {
          throw IoError("expected a numeric array in " + path.string());
        } else {
          return convert<cplx>(g);
        }
      },
      a.grid);
}

Grid<double> read_real(const std::filesystem::path& path) {
  Array a = read_array(path);
  return std::visit(
      [&](auto& g) -> Grid<double> {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, Grid<double>>) {
          return std::move(g);
        } else if constexpr (std::is_same_v<G, Grid<float>> || std::is_same_v<G, Grid<std::uint8_t>>) {
          return convert<double>(g);
        } else {
          // Complex input: take the magnitude, which is what callers of a
          // real reader (metrics, render) want from baseband data.
          Grid<double> out(g.rows(), g.cols());
          for (std::size_t i = 0; i < g.size(); ++i) out.values()[i] = std::abs(cplx(g.values()[i]));
          return out;
        }
      },
      a.grid);
}

RegionMask read_mask(const std::filesystem::path& path) {
  Array a = read_array(path);
  if (a.dtype != DType::boolean && a.dtype != DType::u8)
    throw IoError("expected a bool/u8 mask in " + path.string());
  RegionMask m{std::get<Grid<std::uint8_t>>(std::move(a.grid)), path.stem().string()};
  for (auto& b : m.bits.values()) b = b ? 1 : 0;
  return m;
}

}  // namespace psfr
