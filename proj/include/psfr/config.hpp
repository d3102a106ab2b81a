#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "psfr/coherence.hpp"
#include "psfr/restore.hpp"
#include "psfr/simulate.hpp"

namespace psfr {

enum class PsfSource { oracle, external };
enum class WeightTarget { complex, envelope };

// One experiment, fully resolved. Every field has a default, so "{}" is a
// valid document describing the reference cyst phantom with no aberrator.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "psfr_out";

  ArrayGeometry geometry = ArrayGeometry::linear(64, 1.54e-4, 5e6, 1540.0, 40e6, {0.0, 0.025});
  Pulse pulse{5e6, 0.6, Pulse::default_duration(5e6, 0.6)};

  std::string aberrator_preset = "none";
  AberratorSettings aberrator = preset_settings(AberratorPreset::none);
  std::optional<std::uint64_t> aberrator_seed;  // derived from `seed` when absent

  PhantomSpec phantom{.width = 25e-3, .height = 12.5e-3};
  GridSpec image = GridSpec::centered({0.0, 0.025}, 256, 256, 1e-4, 5e-5);
  PsfSpec psf;
  FilterDesign filter;
  CoherenceOptions coherence;
  double weight_exponent = 1.0;
  WeightTarget weight_target = WeightTarget::complex;
  double dynamic_range_db = 60.0;
  std::size_t gcnr_bins = 256;

  PsfSource psf_source = PsfSource::oracle;
  std::filesystem::path psf_path;

  std::uint64_t resolved_aberrator_seed() const;
  std::uint64_t phantom_seed() const;
  void validate() const;
};

// Reads a config document (nested or flat). Unknown keys and ill-typed values raise
// ConfigError naming the offending key.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

// A document without any nested section is read in flat form: geometry,
// pulse, aberrator (rms_s, rms_ns, corr_len, preset) and phantom keys at top
// level, psf_nx/psf_nz for the patch, and `seed` also seeding the screen.
nlohmann::json nest_flat_document(const nlohmann::json& doc);

// "21x41" -> {21, 41} (lateral x axial).
std::pair<std::size_t, std::size_t> parse_dims(const std::string& text);

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace psfr
