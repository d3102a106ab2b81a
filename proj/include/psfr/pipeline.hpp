#pragma once

#include <filesystem>

#include "json.hpp"
#include "psfr/config.hpp"
#include "psfr/metrics.hpp"

namespace psfr {

// Everything one experiment produces, in memory.
struct PipelineResult {
  AberrationProfile profile;
  Psf psf_ideal;
  Psf psf_aberrated;  // simulated with the true screen; drives the data
  Psf psf_design;     // what the filter was designed from (oracle or external)
  FilterKernel kernel;
  Phantom phantom;
  ComplexImage img_ideal;
  ComplexImage img_aberrated;
  ComplexImage img_restored;
  CoherenceMap w;
  ComplexImage img_weighted;  // envelope-mode weighting keeps a zero phase
  double residual = 0.0;

  struct Row {
    const char* name;
    ImageMetrics metrics;
  };
  std::vector<Row> table;  // ideal, aberrated, restored, weighted
};

PipelineResult run_pipeline(const ExperimentConfig& cfg);

// Metrics table as written to metrics.json.
nlohmann::json metrics_json(const PipelineResult& result);

// Writes PSFK arrays, PGM renders, metrics.json and the resolved config into
// `out_dir` (created if missing).
void write_artifacts(const PipelineResult& result, const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

// load -> run -> write; returns the artifact directory.
std::filesystem::path run_pipeline_file(const std::filesystem::path& config_path,
                                        const std::filesystem::path& out_override = {});

}  // namespace psfr
