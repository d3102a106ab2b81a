#include "psfr/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace psfr {

EnvelopeImage envelope(const ComplexImage& img) {
  Grid<double> env(img.rows(), img.cols());
  for (std::size_t i = 0; i < env.size(); ++i) env.values()[i] = std::abs(img.data.values()[i]);
  return EnvelopeImage(std::move(env), img.sampling);
}

Grid<std::uint8_t> log_compress(const EnvelopeImage& env, double dynamic_range_db) {
  if (!(dynamic_range_db > 0.0) || !std::isfinite(dynamic_range_db))
    throw std::invalid_argument("log_compress: dynamic range must be > 0");
  Grid<std::uint8_t> out(env.env.rows(), env.env.cols());
  const auto values = env.env.values();
  const double top = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
  if (!(top > 0.0)) return out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0)) continue;
    const double db = std::clamp(20.0 * std::log10(values[i] / top), -dynamic_range_db, 0.0);
    out.values()[i] = static_cast<std::uint8_t>(std::round((db + dynamic_range_db) / dynamic_range_db * 255.0));
  }
  return out;
}

ImageFormat parse_image_format(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") return ImageFormat::png;
  return ImageFormat::pgm;
}

void write_image(const Grid<std::uint8_t>& bytes, const std::filesystem::path& path, ImageFormat format) {
  if (format == ImageFormat::png) throw IoError("PNG output is not built in; write a .pgm instead");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "P5\n" << bytes.cols() << ' ' << bytes.rows() << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.values().data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

Grid<std::uint8_t> read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::string magic;
  std::size_t w = 0;
  std::size_t h = 0;
  int maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P5" || !in || maxval != 255 || w == 0 || h == 0) throw IoError("not an 8-bit P5 PGM: " + path.string());
  in.get();  // single whitespace before the raster
  std::vector<std::uint8_t> data(w * h);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (static_cast<std::size_t>(in.gcount()) != data.size()) throw IoError("truncated PGM: " + path.string());
  return Grid<std::uint8_t>(h, w, std::move(data));
}

std::vector<ProfileSample> lateral_profile(const Grid<double>& values, const Sampling& sampling, double depth_z,
                                           bool linear) {
  if (values.rows() == 0) throw std::invalid_argument("lateral_profile: empty image");
  const double pos = (depth_z - sampling.z0) / sampling.dz;
  const double last = static_cast<double>(values.rows() - 1);
  if (!std::isfinite(pos) || pos < -0.5 || pos > last + 0.5)
    throw std::invalid_argument("lateral_profile: depth outside the grid");
  const auto r = static_cast<std::size_t>(std::clamp(std::round(pos), 0.0, last));
  const auto row = values.row(r);

  std::vector<ProfileSample> out(row.size());
  const double top = *std::max_element(row.begin(), row.end());
  for (std::size_t c = 0; c < row.size(); ++c) {
    out[c].x = sampling.x_at(c);
    if (linear) {
      out[c].value = row[c];
    } else if (row[c] > 0.0 && top > 0.0) {
      out[c].value = 20.0 * std::log10(row[c] / top);
    } else {
      out[c].value = -std::numeric_limits<double>::infinity();
    }
  }
  return out;
}

std::vector<ProfileSample> lateral_profile(const EnvelopeImage& env, double depth_z) {
  return lateral_profile(env.env, env.sampling, depth_z, false);
}

double profile_width(const std::vector<ProfileSample>& p, double level_db) {
  if (p.empty()) throw std::invalid_argument("profile_width: empty profile");
  const auto peak = static_cast<std::size_t>(
      std::distance(p.begin(), std::max_element(p.begin(), p.end(), [](const auto& a, const auto& b) {
                      return a.value < b.value;
                    })));
  const double level = p[peak].value + level_db;
  // Walk outwards until the profile drops below the level, then
  // interpolate the crossing.
  const auto crossing = [&](int step) {
    std::size_t i = peak;
    while (true) {
      const auto next = static_cast<std::ptrdiff_t>(i) + step;
      if (next < 0 || next >= static_cast<std::ptrdiff_t>(p.size())) return p[i].x;
      const auto& a = p[i];
      const auto& b = p[static_cast<std::size_t>(next)];
      if (b.value < level) {
        if (!std::isfinite(b.value)) return b.x;
        const double f = (a.value - level) / (a.value - b.value);
        return a.x + f * (b.x - a.x);
      }
      i = static_cast<std::size_t>(next);
    }
  };
  return crossing(1) - crossing(-1);
}

}  // namespace psfr
