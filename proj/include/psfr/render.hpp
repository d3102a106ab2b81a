#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "psfr/grid.hpp"

namespace psfr {

EnvelopeImage envelope(const ComplexImage& img);

// Normalise by the maximum, clamp 20 log10(env/max) to [-dr, 0] dB and map
// linearly onto [0, 255], rounding half away from zero. A zero pixel or an
// all-zero image maps to 0.
Grid<std::uint8_t> log_compress(const EnvelopeImage& env, double dynamic_range_db = 60.0);

enum class ImageFormat { pgm, png };

ImageFormat parse_image_format(const std::filesystem::path& path);

// 8-bit grayscale export. Only binary PGM (P5) is built in; asking for PNG
// raises an IoError.
void write_image(const Grid<std::uint8_t>& bytes, const std::filesystem::path& path, ImageFormat format = ImageFormat::pgm);

Grid<std::uint8_t> read_pgm(const std::filesystem::path& path);

struct ProfileSample {
  double x = 0.0;
  double value = 0.0;  // dB re. row maximum, or linear
};

// Row of the envelope nearest depth z, normalised to its own maximum and in
// dB (zero pixels give -infinity). With `linear` set the raw row is
// returned, which suits coherence maps.
std::vector<ProfileSample> lateral_profile(const Grid<double>& values, const Sampling& sampling, double depth_z,
                                           bool linear = false);
std::vector<ProfileSample> lateral_profile(const EnvelopeImage& env, double depth_z);

// Full width of the profile's main peak at `level_db` below the maximum,
// with linear interpolation between samples.
double profile_width(const std::vector<ProfileSample>& profile_db, double level_db);

}  // namespace psfr
