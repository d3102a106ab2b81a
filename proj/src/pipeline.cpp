#include "psfr/pipeline.hpp"

#include <cmath>
#include <fstream>

#include "psfr/io.hpp"
#include "psfr/render.hpp"

namespace psfr {

using nlohmann::json;

namespace {

Psf external_psf(const ExperimentConfig& cfg) {
  if (!std::filesystem::exists(cfg.psf_path))
    throw IoError("external PSF file not found: " + cfg.psf_path.string() +
                  " (write the estimator output as a PSFK complex array)");
  Grid<cplx> raw = read_complex(cfg.psf_path);
  if (!all_finite(raw.values())) throw NumericalError("external PSF contains non-finite values");
  Sampling s{cfg.psf.dx, cfg.psf.dz, 0.0, 0.0};
  return crop_psf(center_psf(ComplexImage(std::move(raw), s)), cfg.psf.nz, cfg.psf.nx);
}

json metric_value(const MetricValue& v) { return v.degenerate ? json(nullptr) : json(v.value); }

}  // namespace

PipelineResult run_pipeline(const ExperimentConfig& cfg) {
  cfg.validate();
  PipelineResult r;
  r.profile = make_aberration_profile(cfg.geometry.n_elements, cfg.aberrator.rms, cfg.aberrator.corr_len,
                                      cfg.resolved_aberrator_seed());

  r.psf_ideal = simulate_psf(cfg.geometry, cfg.pulse, zero_profile(cfg.geometry.n_elements), cfg.psf);
  r.psf_aberrated = simulate_psf(cfg.geometry, cfg.pulse, r.profile, cfg.psf);
  r.psf_design = cfg.psf_source == PsfSource::oracle ? r.psf_aberrated : external_psf(cfg);

  r.phantom = make_phantom(cfg.phantom, cfg.image, cfg.phantom_seed());
  r.img_ideal = synth_speckle(r.phantom.scatterers, r.psf_ideal);
  r.img_aberrated = synth_speckle(r.phantom.scatterers, r.psf_aberrated);

  r.kernel = design_filter(r.psf_design, r.psf_ideal, cfg.filter);
  r.residual = restoration_residual(r.psf_aberrated, r.psf_ideal, r.kernel);
  r.img_restored = apply_filter(r.img_aberrated, r.kernel);

  // The coherence index comes from the same sliding products the
  // restoration convolution sums.
  r.w = coherence_map(r.img_aberrated, r.kernel, cfg.coherence);
  if (cfg.weight_target == WeightTarget::complex) {
    r.img_weighted = apply_weighting(r.img_restored, r.w, cfg.weight_exponent);
  } else {
    const EnvelopeImage env = apply_weighting(envelope(r.img_restored), r.w, cfg.weight_exponent);
    Grid<cplx> as_complex(env.env.rows(), env.env.cols());
    for (std::size_t i = 0; i < env.env.size(); ++i) as_complex.values()[i] = env.env.values()[i];
    r.img_weighted = ComplexImage(std::move(as_complex), env.sampling);
  }

  const auto score = [&](const ComplexImage& img) {
    return evaluate(envelope(img), r.phantom.cyst, r.phantom.background, cfg.gcnr_bins);
  };
  r.table = {{"ideal", score(r.img_ideal)},
             {"aberrated", score(r.img_aberrated)},
             {"restored", score(r.img_restored)},
             {"weighted", score(r.img_weighted)}};
  return r;
}

json metrics_json(const PipelineResult& result) {
  json j;
  for (const auto& row : result.table) {
    j[row.name] = {{"cr_db", metric_value(row.metrics.cr_db)},
                   {"cnr_db", metric_value(row.metrics.cnr.db)},
                   {"cnr_linear", std::isfinite(row.metrics.cnr.linear) ? json(row.metrics.cnr.linear) : json(nullptr)},
                   {"gcnr", row.metrics.gcnr}};
  }
  j["restoration_residual"] = result.residual;
  j["psf_gain_ideal"] = result.psf_ideal.gain;
  j["psf_gain_aberrated"] = result.psf_aberrated.gain;
  return j;
}

void write_artifacts(const PipelineResult& r, const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());

  write_complex(out_dir / "psf_ideal.psfk", r.psf_ideal.patch.data);
  write_complex(out_dir / "psf_aberrated.psfk", r.psf_aberrated.patch.data);
  if (cfg.psf_source == PsfSource::external) write_complex(out_dir / "psf_design.psfk", r.psf_design.patch.data);
  write_complex(out_dir / "kernel.psfk", r.kernel.taps);
  write_complex(out_dir / "img_ideal.psfk", r.img_ideal.data);
  write_complex(out_dir / "img_aberrated.psfk", r.img_aberrated.data);
  write_complex(out_dir / "img_restored.psfk", r.img_restored.data);
  write_real(out_dir / "w.psfk", r.w.w);
  write_complex(out_dir / "img_weighted.psfk", r.img_weighted.data);
  write_complex(out_dir / "scatterers.psfk", r.phantom.scatterers.amps);
  write_mask(out_dir / "cyst.psfk", r.phantom.cyst);
  write_mask(out_dir / "background.psfk", r.phantom.background);
  write_real(out_dir / "profile.psfk", Grid<double>(1, r.profile.delays.size(), r.profile.delays));

  for (const auto& [name, img] : {std::pair{"img_ideal", &r.img_ideal}, std::pair{"img_aberrated", &r.img_aberrated},
                                  std::pair{"img_restored", &r.img_restored}, std::pair{"img_weighted", &r.img_weighted}})
    write_image(log_compress(envelope(*img), cfg.dynamic_range_db), out_dir / (std::string(name) + ".pgm"));

  const auto dump = [&](const std::filesystem::path& p, const json& j) {
    std::ofstream out(p, std::ios::trunc);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + p.string());
  };
  dump(out_dir / "metrics.json", metrics_json(r));
  json resolved = to_json(cfg);
  resolved["out_dir"] = out_dir.string();
  dump(out_dir / "config.json", resolved);
}

std::filesystem::path run_pipeline_file(const std::filesystem::path& config_path,
                                        const std::filesystem::path& out_override) {
  ExperimentConfig cfg = load_config(config_path);
  if (!out_override.empty()) cfg.out_dir = out_override;
  const PipelineResult r = run_pipeline(cfg);
  write_artifacts(r, cfg, cfg.out_dir);
  return cfg.out_dir;
}

}  // namespace psfr
