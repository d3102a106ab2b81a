// numpy-facing bindings. Images are 2D arrays indexed [z, x]; complex data is
// complex128, masks are bool.

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

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

namespace py = pybind11;
using psfr::cplx;
using psfr::Grid;

namespace {

template <typename T>
using Array2 = py::array_t<T, py::array::c_style | py::array::forcecast>;

template <typename T>
Grid<T> to_grid(const Array2<T>& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2D array");
  Grid<T> g(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::memcpy(static_cast<void*>(g.values().data()), a.data(), g.size() * sizeof(T));
  return g;
}

template <typename T>
py::array_t<T> to_numpy(const Grid<T>& g) {
  py::array_t<T> a({g.rows(), g.cols()});
  std::memcpy(a.mutable_data(), g.values().data(), g.size() * sizeof(T));
  return a;
}

py::array_t<bool> mask_to_numpy(const psfr::RegionMask& m) {
  py::array_t<bool> a({m.bits.rows(), m.bits.cols()});
  bool* out = a.mutable_data();
  for (std::size_t i = 0; i < m.bits.size(); ++i) out[i] = m.bits.values()[i] != 0;
  return a;
}

psfr::RegionMask to_mask(const Array2<bool>& a, const char* label) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2D mask");
  psfr::RegionMask m{Grid<std::uint8_t>(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1))),
                     label};
  const bool* in = a.data();
  for (std::size_t i = 0; i < m.bits.size(); ++i) m.bits.values()[i] = in[i] ? 1 : 0;
  return m;
}

psfr::ComplexImage to_image(const Array2<cplx>& a) { return psfr::ComplexImage(to_grid(a), psfr::Sampling{}); }

// A patch taken as is: odd dims, anchored at its middle, no renormalisation.
psfr::Psf to_psf(const Array2<cplx>& a) {
  psfr::Psf p;
  p.patch = to_image(a);
  if (p.patch.rows() % 2 == 0 || p.patch.cols() % 2 == 0) throw std::invalid_argument("PSF dims must be odd");
  p.center = {p.patch.rows() / 2, p.patch.cols() / 2};
  return p;
}

psfr::ExperimentConfig config_from(const std::string& text) {
  return psfr::parse_config(nlohmann::json::parse(text.empty() ? "{}" : text));
}

py::object json_to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

psfr::CoherenceAxes parse_axes(const std::string& s) {
  if (s == "2d") return psfr::CoherenceAxes::both;
  if (s == "lateral") return psfr::CoherenceAxes::lateral;
  throw std::invalid_argument("axes must be '2d' or 'lateral'");
}

py::dict metrics_dict(const psfr::ImageMetrics& m) {
  const auto val = [](const psfr::MetricValue& v) { return v.degenerate ? py::object(py::none()) : py::float_(v.value); };
  py::dict d;
  d["cr_db"] = val(m.cr_db);
  d["cnr_db"] = val(m.cnr.db);
  d["cnr_linear"] = m.cnr.linear;
  d["gcnr"] = m.gcnr;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "PSF restoration filtering and filter-derived coherence weighting";

  py::register_exception<psfr::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<psfr::IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<psfr::NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("parse_config", [](const std::string& text) { return json_to_py(psfr::to_json(config_from(text))); },
        py::arg("config_json") = "{}", "Resolve a config document, filling defaults.");

  m.def(
      "aberration_profile",
      [](std::size_t n, double rms, double corr_len, std::uint64_t seed) {
        return psfr::make_aberration_profile(n, rms, corr_len, seed).delays;
      },
      py::arg("n_elements"), py::arg("rms"), py::arg("corr_len"), py::arg("seed"));

  m.def(
      "simulate_psf",
      [](const std::string& config_json, bool ideal) {
        const psfr::ExperimentConfig cfg = config_from(config_json);
        const psfr::AberrationProfile profile =
            ideal ? psfr::zero_profile(cfg.geometry.n_elements)
                  : psfr::make_aberration_profile(cfg.geometry.n_elements, cfg.aberrator.rms,
                                                  cfg.aberrator.corr_len, cfg.resolved_aberrator_seed());
        psfr::Psf psf;
        {
          py::gil_scoped_release release;
          psf = psfr::simulate_psf(cfg.geometry, cfg.pulse, profile, cfg.psf);
        }
        return py::make_tuple(to_numpy(psf.patch.data), psf.gain);
      },
      py::arg("config_json") = "{}", py::arg("ideal") = false,
      "Point response at the transmit focus, peak-normalised. Returns (patch, raw peak).");

  m.def(
      "center_psf",
      [](const Array2<cplx>& raw) {
        const psfr::Psf p = psfr::center_psf(to_image(raw));
        return py::make_tuple(to_numpy(p.patch.data), p.gain);
      },
      py::arg("raw"));

  m.def(
      "make_phantom",
      [](const std::string& config_json) {
        const psfr::ExperimentConfig cfg = config_from(config_json);
        const psfr::Phantom ph = psfr::make_phantom(cfg.phantom, cfg.image, cfg.phantom_seed());
        return py::make_tuple(to_numpy(ph.scatterers.amps), mask_to_numpy(ph.cyst), mask_to_numpy(ph.background));
      },
      py::arg("config_json") = "{}", "Returns (scatterers, cyst mask, background mask).");

  m.def(
      "synth_speckle",
      [](const Array2<cplx>& scatterers, const Array2<cplx>& psf) {
        return to_numpy(psfr::synth_speckle(psfr::ScattererMap{to_grid(scatterers), {}}, to_psf(psf)).data);
      },
      py::arg("scatterers"), py::arg("psf"));

  m.def(
      "design_filter",
      [](const Array2<cplx>& psf_a, const Array2<cplx>& psf_i, double eps, std::pair<std::size_t, std::size_t> kernel,
         double taper, const std::string& method) {
        const psfr::FilterDesign d{eps, kernel.first, kernel.second, taper, psfr::parse_filter_method(method)};
        return to_numpy(psfr::design_filter(to_psf(psf_a), to_psf(psf_i), d).taps);
      },
      py::arg("psf_aberrated"), py::arg("psf_ideal"), py::arg("eps") = 1e-2,
      py::arg("kernel") = std::pair<std::size_t, std::size_t>{21, 41}, py::arg("taper") = 0.2,
      py::arg("method") = "frequency", "Kernel dims are (lateral, axial); the returned array is [axial, lateral].");

  m.def(
      "apply_filter",
      [](const Array2<cplx>& img, const Array2<cplx>& kernel) {
        return to_numpy(psfr::apply_filter(to_image(img), psfr::FilterKernel(to_grid(kernel))).data);
      },
      py::arg("img"), py::arg("kernel"));

  m.def(
      "restoration_residual",
      [](const Array2<cplx>& psf_a, const Array2<cplx>& psf_i, const Array2<cplx>& kernel) {
        return psfr::restoration_residual(to_psf(psf_a), to_psf(psf_i), psfr::FilterKernel(to_grid(kernel)));
      },
      py::arg("psf_aberrated"), py::arg("psf_ideal"), py::arg("kernel"));

  m.def(
      "coherence_map",
      [](const Array2<cplx>& img, const Array2<cplx>& kernel, std::size_t m0, const std::string& axes) {
        const psfr::ComplexImage im = to_image(img);
        const psfr::FilterKernel k(to_grid(kernel));
        psfr::CoherenceMap w;
        {
          py::gil_scoped_release release;
          w = psfr::coherence_map(im, k, {m0, parse_axes(axes)});
        }
        return to_numpy(w.w);
      },
      py::arg("img"), py::arg("kernel"), py::arg("m0") = 1, py::arg("axes") = "2d");

  m.def(
      "apply_weighting",
      [](const Array2<cplx>& img, const Array2<double>& w, double p) {
        return to_numpy(psfr::apply_weighting(to_image(img), psfr::CoherenceMap(to_grid(w)), p).data);
      },
      py::arg("img"), py::arg("w"), py::arg("p") = 1.0);

  m.def(
      "envelope", [](const Array2<cplx>& img) { return to_numpy(psfr::envelope(to_image(img)).env); },
      py::arg("img"));

  m.def(
      "log_compress",
      [](const Array2<double>& env, double dr) {
        return to_numpy(psfr::log_compress(psfr::EnvelopeImage(to_grid(env), {}), dr));
      },
      py::arg("env"), py::arg("dynamic_range_db") = 60.0);

  m.def(
      "metrics",
      [](const Array2<double>& env, const Array2<bool>& inside, const Array2<bool>& outside, std::size_t bins) {
        return metrics_dict(psfr::evaluate(psfr::EnvelopeImage(to_grid(env), {}), to_mask(inside, "inside"),
                                           to_mask(outside, "outside"), bins));
      },
      py::arg("env"), py::arg("inside"), py::arg("outside"), py::arg("n_bins") = 256,
      "CR (dB), CNR (dB and linear) and gCNR of an envelope over two masks.");

  m.def(
      "read_psfk",
      [](const std::string& path) -> py::object {
        const psfr::Array a = psfr::read_array(path);
        return std::visit(
            [&](const auto& g) -> py::object {
              if constexpr (std::is_same_v<std::decay_t<decltype(g)>, Grid<std::uint8_t>>) {
                if (a.dtype == psfr::DType::boolean) {
                  py::array_t<bool> out({g.rows(), g.cols()});
                  for (std::size_t i = 0; i < g.size(); ++i) out.mutable_data()[i] = g.values()[i] != 0;
                  return out;
                }
              }
              return to_numpy(g);
            },
            a.grid);
      },
      py::arg("path"));

  m.def(
      "write_psfk",
      [](const std::string& path, const py::array& arr) {
        const py::dtype dt = arr.dtype();
        if (dt.is(py::dtype::of<bool>())) {
          psfr::write_mask(path, to_mask(arr.cast<Array2<bool>>(), ""));
        } else if (dt.kind() == 'c') {
          psfr::write_complex(path, to_grid(arr.cast<Array2<cplx>>()));
        } else if (dt.is(py::dtype::of<std::uint8_t>())) {
          psfr::write_array(path, psfr::to_array(to_grid(arr.cast<Array2<std::uint8_t>>())));
        } else {
          psfr::write_real(path, to_grid(arr.cast<Array2<double>>()));
        }
      },
      py::arg("path"), py::arg("array"));

  m.def(
      "run_pipeline",
      [](const std::string& config_json, const std::string& out_dir) {
        const psfr::ExperimentConfig cfg = config_from(config_json);
        psfr::PipelineResult r;
        {
          py::gil_scoped_release release;
          r = psfr::run_pipeline(cfg);
          if (!out_dir.empty()) psfr::write_artifacts(r, cfg, out_dir);
        }
        py::dict d;
        d["metrics"] = json_to_py(psfr::metrics_json(r));
        d["psf_ideal"] = to_numpy(r.psf_ideal.patch.data);
        d["psf_aberrated"] = to_numpy(r.psf_aberrated.patch.data);
        d["kernel"] = to_numpy(r.kernel.taps);
        d["img_ideal"] = to_numpy(r.img_ideal.data);
        d["img_aberrated"] = to_numpy(r.img_aberrated.data);
        d["img_restored"] = to_numpy(r.img_restored.data);
        d["w"] = to_numpy(r.w.w);
        d["img_weighted"] = to_numpy(r.img_weighted.data);
        d["cyst"] = mask_to_numpy(r.phantom.cyst);
        d["background"] = mask_to_numpy(r.phantom.background);
        return d;
      },
      py::arg("config_json") = "{}", py::arg("out_dir") = "",
      "Full experiment; also writes the artifact directory when out_dir is given.");

  m.def(
      "selfcheck",
      []() {
        py::list out;
        for (const auto& item : psfr::selfcheck()) out.append(py::make_tuple(item.name, item.passed, item.detail));
        return out;
      },
      "Small-instance oracle suite: list of (name, passed, detail).");
}
