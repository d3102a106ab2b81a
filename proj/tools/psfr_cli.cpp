// psfr: command-line front end. Each subcommand reads PSFK arrays or a JSON
// config, calls one library operation and writes PSFK/JSON/PGM output.
//
// Exit codes: 0 success, 2 config/usage error, 3 IO error, 4 numerical failure.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <tuple>
#include <iostream>
#include <string>

#include "json.hpp"
#include "psfr/coherence.hpp"
#include "psfr/config.hpp"
#include "psfr/io.hpp"
#include "psfr/metrics.hpp"
#include "psfr/pipeline.hpp"
#include "psfr/render.hpp"
#include "psfr/restore.hpp"
#include "psfr/selfcheck.hpp"
#include "psfr/simulate.hpp"

namespace {

using nlohmann::json;
using psfr::cplx;
using psfr::Grid;

enum ExitCode : int { kOk = 0, kConfig = 2, kIo = 3, kNumerical = 4 };

psfr::ComplexImage load_image(const std::string& path) {
  return psfr::ComplexImage(psfr::read_complex(path), psfr::Sampling{});
}

psfr::Psf load_psf(const std::string& path) { return psfr::center_psf(load_image(path)); }

psfr::FilterKernel load_kernel(const std::string& path) { return psfr::FilterKernel(psfr::read_complex(path)); }

json metric_json(const psfr::MetricValue& v) { return v.degenerate ? json(nullptr) : json(v.value); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"psfr - PSF restoration filtering and coherence weighting for aberrated ultrasound data"};
  app.require_subcommand(1);

  // simulate-psf
  std::string cfg_path;
  std::string out_path;
  bool ideal = false;
  std::string profile_out;
  auto* sim = app.add_subcommand("simulate-psf", "Simulate the point response at the transmit focus");
  sim->add_option("--config", cfg_path, "Experiment or flat simulator JSON")->required();
  sim->add_flag("--ideal", ideal, "Ignore the aberrator (aberration-free PSF)");
  sim->add_option("--profile-out", profile_out, "Also write the phase-screen delays (1 x n, seconds)");
  sim->add_option("-o,--out", out_path, "Output PSFK (complex)")->required();

  // make-phantom
  std::string cyst_out;
  std::string bg_out;
  auto* phantom = app.add_subcommand("make-phantom", "Build the scatterer map and evaluation masks");
  phantom->add_option("--config", cfg_path, "Experiment JSON")->required();
  phantom->add_option("-o,--out", out_path, "Scatterer map PSFK (complex)")->required();
  phantom->add_option("--cyst", cyst_out, "Cyst mask PSFK (bool)")->required();
  phantom->add_option("--background", bg_out, "Background mask PSFK (bool)")->required();

  // synth
  std::string scat_path;
  std::string psf_path;
  auto* synth = app.add_subcommand("synth", "Convolve a scatterer map with a PSF");
  synth->add_option("--scatterers", scat_path, "Scatterer map PSFK")->required();
  synth->add_option("--psf", psf_path, "PSF PSFK")->required();
  synth->add_option("-o,--out", out_path, "Output image PSFK")->required();

  // design-filter
  std::string psf_a_path;
  std::string psf_i_path;
  psfr::FilterDesign design;
  std::string kernel_dims = "21x41";
  std::string method = "frequency";
  auto* dfilt = app.add_subcommand("design-filter", "Design the PSF restoration filter");
  dfilt->add_option("--psf-aberrated", psf_a_path, "Aberrated PSF PSFK")->required();
  dfilt->add_option("--psf-ideal", psf_i_path, "Ideal PSF PSFK")->required();
  dfilt->add_option("--eps", design.eps, "Relative ridge weight")->capture_default_str();
  dfilt->add_option("--kernel", kernel_dims, "Kernel dims, lateral x axial")->capture_default_str();
  dfilt->add_option("--taper", design.taper, "Raised-cosine edge fraction (0 = none)")->capture_default_str();
  dfilt->add_option("--method", method, "frequency or exact")
      ->check(CLI::IsMember({"frequency", "exact"}))
      ->capture_default_str();
  dfilt->add_option("-o,--out", out_path, "Kernel PSFK")->required();

  // apply
  std::string in_path;
  std::string kernel_path;
  auto* apply = app.add_subcommand("apply", "Apply a restoration filter to a baseband image");
  apply->add_option("--in", in_path, "Input image PSFK")->required();
  apply->add_option("--kernel", kernel_path, "Kernel PSFK")->required();
  apply->add_option("-o,--out", out_path, "Output image PSFK")->required();

  // coherence
  std::size_t m0 = 1;
  std::string axes = "2d";
  auto* coh = app.add_subcommand("coherence", "Filter-derived coherence index map");
  coh->add_option("--in", in_path, "Input (unfiltered) image PSFK")->required();
  coh->add_option("--kernel", kernel_path, "Kernel PSFK")->required();
  coh->add_option("--m0", m0, "Low-frequency cutoff in DFT bins")->capture_default_str();
  coh->add_option("--axes", axes, "2d or lateral")->check(CLI::IsMember({"2d", "lateral"}))->capture_default_str();
  coh->add_option("-o,--out", out_path, "Coherence map PSFK (real)")->required();

  // weight
  std::string w_path;
  double p = 1.0;
  bool envelope_mode = false;
  auto* weight = app.add_subcommand("weight", "Multiply an image by w^p");
  weight->add_option("--in", in_path, "Image PSFK")->required();
  weight->add_option("--w", w_path, "Coherence map PSFK")->required();
  weight->add_option("--p", p, "Exponent")->capture_default_str();
  weight->add_flag("--envelope", envelope_mode, "Weight the detected envelope and write a real array");
  weight->add_option("-o,--out", out_path, "Output PSFK")->required();

  // metrics
  std::string env_path;
  std::string inside_path;
  std::string outside_path;
  std::size_t bins = 256;
  bool as_json = false;
  auto* metrics = app.add_subcommand("metrics", "CR, CNR and gCNR over two region masks");
  metrics->add_option("--env", env_path, "Envelope PSFK (complex input is detected)")->required();
  metrics->add_option("--inside", inside_path, "Inside (cyst) mask PSFK")->required();
  metrics->add_option("--outside", outside_path, "Outside (background) mask PSFK")->required();
  metrics->add_option("--bins", bins, "gCNR histogram bins")->capture_default_str();
  metrics->add_flag("--json", as_json, "Print JSON (default prints a table)");

  // render
  double dr = 60.0;
  auto* render = app.add_subcommand("render", "Log-compressed 8-bit grayscale image");
  render->add_option("--in", in_path, "Image PSFK")->required();
  render->add_option("--dr", dr, "Dynamic range in dB")->capture_default_str();
  render->add_option("-o,--out", out_path, "Output .pgm")->required();

  // profile
  const psfr::ExperimentConfig defaults;
  double z_mm = 25.0;
  double dx_mm = defaults.image.sampling.dx * 1e3;
  double dz_mm = defaults.image.sampling.dz * 1e3;
  double x0_mm = defaults.image.sampling.x0 * 1e3;
  double z0_mm = defaults.image.sampling.z0 * 1e3;
  bool linear = false;
  auto* prof = app.add_subcommand("profile", "Lateral profile at a depth");
  prof->add_option("--in", in_path, "Image or coherence PSFK")->required();
  prof->add_option("--z-mm", z_mm, "Depth in mm")->capture_default_str();
  prof->add_option("--config", cfg_path, "Take the image lattice from an experiment JSON");
  prof->add_option("--dx-mm", dx_mm, "Lateral pixel size")->capture_default_str();
  prof->add_option("--dz-mm", dz_mm, "Axial pixel size")->capture_default_str();
  prof->add_option("--x0-mm", x0_mm, "Lateral position of column 0")->capture_default_str();
  prof->add_option("--z0-mm", z0_mm, "Depth of row 0")->capture_default_str();
  prof->add_flag("--linear", linear, "Raw values instead of dB (coherence maps)");
  prof->add_flag("--json", as_json, "Print JSON (default prints x, value columns)");

  // run
  auto* run = app.add_subcommand("run", "Run the full experiment described by a config");
  run->add_option("--config", cfg_path, "Experiment JSON")->required();
  run->add_option("-o,--out", out_path, "Override out_dir");

  // selfcheck
  std::string fault;
  auto* check = app.add_subcommand("selfcheck", "Run the small-instance oracle suite");
  check->add_option("--inject-fault", fault)->group("")->check(CLI::IsMember({"filter"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*sim) {
      psfr::ExperimentConfig cfg = psfr::load_config(cfg_path);
      const psfr::AberrationProfile profile =
          ideal ? psfr::zero_profile(cfg.geometry.n_elements)
                : psfr::make_aberration_profile(cfg.geometry.n_elements, cfg.aberrator.rms, cfg.aberrator.corr_len,
                                                cfg.resolved_aberrator_seed());
      const psfr::Psf psf = psfr::simulate_psf(cfg.geometry, cfg.pulse, profile, cfg.psf);
      psfr::write_complex(out_path, psf.patch.data);
      if (!profile_out.empty())
        psfr::write_real(profile_out, Grid<double>(1, profile.delays.size(), profile.delays));
      std::cout << json{{"gain", psf.gain}, {"nz", psf.patch.rows()}, {"nx", psf.patch.cols()}}.dump() << '\n';
    } else if (*phantom) {
      const psfr::ExperimentConfig cfg = psfr::load_config(cfg_path);
      const psfr::Phantom ph = psfr::make_phantom(cfg.phantom, cfg.image, cfg.phantom_seed());
      psfr::write_complex(out_path, ph.scatterers.amps);
      psfr::write_mask(cyst_out, ph.cyst);
      psfr::write_mask(bg_out, ph.background);
      std::cout << json{{"scatterers", ph.n_scatterers}, {"cyst_pixels", ph.cyst.count()},
                        {"background_pixels", ph.background.count()}}
                       .dump()
                << '\n';
    } else if (*synth) {
      const psfr::ScattererMap s{psfr::read_complex(scat_path), psfr::Sampling{}};
      psfr::write_complex(out_path, psfr::synth_speckle(s, load_psf(psf_path)).data);
    } else if (*dfilt) {
      std::tie(design.kernel_nx, design.kernel_nz) = psfr::parse_dims(kernel_dims);
      design.method = psfr::parse_filter_method(method);
      const psfr::Psf a = load_psf(psf_a_path);
      const psfr::Psf i = load_psf(psf_i_path);
      const psfr::FilterKernel k = psfr::design_filter(a, i, design);
      psfr::write_complex(out_path, k.taps);
      std::cout << json{{"restoration_residual", psfr::restoration_residual(a, i, k)}}.dump() << '\n';
    } else if (*apply) {
      psfr::write_complex(out_path, psfr::apply_filter(load_image(in_path), load_kernel(kernel_path)).data);
    } else if (*coh) {
      const psfr::CoherenceOptions opts{m0, axes == "2d" ? psfr::CoherenceAxes::both : psfr::CoherenceAxes::lateral};
      psfr::write_real(out_path, psfr::coherence_map(load_image(in_path), load_kernel(kernel_path), opts).w);
    } else if (*weight) {
      const psfr::CoherenceMap w(psfr::read_real(w_path));
      if (envelope_mode) {
        const psfr::EnvelopeImage env(psfr::read_real(in_path), psfr::Sampling{});
        psfr::write_real(out_path, psfr::apply_weighting(env, w, p).env);
      } else {
        psfr::write_complex(out_path, psfr::apply_weighting(load_image(in_path), w, p).data);
      }
    } else if (*metrics) {
      const psfr::EnvelopeImage env(psfr::read_real(env_path), psfr::Sampling{});
      const psfr::ImageMetrics m =
          psfr::evaluate(env, psfr::read_mask(inside_path), psfr::read_mask(outside_path), bins);
      const json j{{"cr_db", metric_json(m.cr_db)},
                   {"cnr_db", metric_json(m.cnr.db)},
                   {"cnr_linear", std::isfinite(m.cnr.linear) ? json(m.cnr.linear) : json(nullptr)},
                   {"gcnr", m.gcnr}};
      if (as_json) {
        std::cout << j.dump() << '\n';
      } else {
        for (const auto& [k, v] : j.items()) std::cout << k << '\t' << v.dump() << '\n';
      }
    } else if (*render) {
      const psfr::EnvelopeImage env(psfr::read_real(in_path), psfr::Sampling{});
      psfr::write_image(psfr::log_compress(env, dr), out_path, psfr::parse_image_format(out_path));
    } else if (*prof) {
      psfr::Sampling s{dx_mm * 1e-3, dz_mm * 1e-3, x0_mm * 1e-3, z0_mm * 1e-3};
      if (!cfg_path.empty()) s = psfr::load_config(cfg_path).image.sampling;
      const auto samples = psfr::lateral_profile(psfr::read_real(in_path), s, z_mm * 1e-3, linear);
      if (as_json) {
        json j = json::array();
        for (const auto& sm : samples)
          j.push_back({{"x_mm", sm.x * 1e3}, {linear ? "value" : "db", std::isfinite(sm.value) ? json(sm.value) : json(nullptr)}});
        std::cout << j.dump() << '\n';
      } else {
        for (const auto& sm : samples) std::cout << sm.x * 1e3 << '\t' << sm.value << '\n';
      }
    } else if (*run) {
      const auto dir = psfr::run_pipeline_file(cfg_path, out_path);
      std::ifstream metrics_file(dir / "metrics.json");
      std::cout << metrics_file.rdbuf();
    } else if (*check) {
      const auto items = psfr::selfcheck({fault == "filter"});
      return psfr::print_report(items, std::cout) ? kOk : kNumerical;
    }
  } catch (const psfr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kConfig;
  } catch (const psfr::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
  return kOk;
}
