#include "psfr/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace psfr {

using nlohmann::json;

namespace {

// Typed access to one JSON object; rejects keys nobody asked about.
class Section {
 public:
  Section(const json& doc, std::string path, std::set<std::string> allowed) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw ConfigError(where() + " must be a JSON object");
    for (const auto& [key, _] : doc_.items())
      if (!allowed.contains(key)) throw ConfigError("unknown key '" + join(key) + "'");
  }

  bool has(const std::string& key) const { return doc_.contains(key) && !doc_.at(key).is_null(); }
  const json& raw(const std::string& key) const { return doc_.at(key); }
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const json& v = doc_.at(key);
    if (!v.is_number()) throw ConfigError("'" + join(key) + "' must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError("'" + join(key) + "' must be finite");
    return d;
  }

  std::uint64_t count(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = doc_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      throw ConfigError("'" + join(key) + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const json& v = doc_.at(key);
    if (!v.is_string()) throw ConfigError("'" + join(key) + "' must be a string");
    return v.get<std::string>();
  }

  Point2 point(const std::string& key, Point2 fallback) const {
    if (!has(key)) return fallback;
    const json& v = doc_.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw ConfigError("'" + join(key) + "' must be [x, z] in metres");
    return {v[0].get<double>(), v[1].get<double>()};
  }

 private:
  std::string where() const { return path_.empty() ? "config" : "'" + path_ + "'"; }

  const json& doc_;
  std::string path_;
};

const json& child(const json& doc, const std::string& key) {
  static const json empty = json::object();
  return doc.contains(key) && !doc.at(key).is_null() ? doc.at(key) : empty;
}

ArrayGeometry geometry_from(const Section& s, const ArrayGeometry& base) {
  const auto n = s.count("n_elements", base.n_elements);
  const double f0 = s.number("f0_hz", base.f0);
  const double c0 = s.number("c0_mps", base.c0);
  // Without an explicit pitch, a changed wavelength keeps the array at lambda/2.
  const double pitch = s.has("pitch_m")                         ? s.number("pitch_m", base.pitch)
                       : (s.has("f0_hz") || s.has("c0_mps")) ? 0.5 * c0 / f0
                                                                : base.pitch;
  try {
    return ArrayGeometry::linear(static_cast<std::size_t>(n), pitch, f0, c0, s.number("fs_hz", base.fs),
                                 s.point("tx_focus_m", base.tx_focus));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

Pulse pulse_from(const Section& s, double f0) {
  const double bw = s.number("fractional_bandwidth", 0.6);
  Pulse p{f0, bw, 0.0};
  if (!(bw > 0.0) || bw > 1.0) throw ConfigError("'fractional_bandwidth' must lie in (0, 1]");
  p.duration = s.number("duration_s", Pulse::default_duration(f0, bw));
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

const std::set<std::string> kGeometryKeys{"n_elements", "pitch_m", "f0_hz", "c0_mps", "fs_hz", "tx_focus_m"};
const std::set<std::string> kPulseKeys{"fractional_bandwidth", "duration_s"};

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finaliser over (seed, stream)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t ExperimentConfig::resolved_aberrator_seed() const {
  return aberrator_seed.value_or(derive_seed(seed, 1));
}

std::uint64_t ExperimentConfig::phantom_seed() const { return derive_seed(seed, 2); }

void ExperimentConfig::validate() const {
  try {
    geometry.validate();
    pulse.validate();
    phantom.validate();
    image.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(aberrator.rms >= 0.0)) throw ConfigError("'aberrator.rms' must be >= 0");
  if (!(aberrator.corr_len >= 0.0)) throw ConfigError("'aberrator.corr_len' must be >= 0");
  if (psf.nx % 2 == 0 || psf.nz % 2 == 0 || psf.nx == 0 || psf.nz == 0) throw ConfigError("'psf' dims must be odd");
  if (!(psf.dx > 0.0) || !(psf.dz > 0.0)) throw ConfigError("'psf' spacing must be > 0");
  if (filter.kernel_nx % 2 == 0 || filter.kernel_nz % 2 == 0) throw ConfigError("'filter.kernel' dims must be odd");
  if (!(filter.eps > 0.0)) throw ConfigError("'filter.eps' must be > 0");
  if (filter.taper < 0.0 || filter.taper > 1.0) throw ConfigError("'filter.taper' must lie in [0, 1]");
  if (filter.kernel_nx > image.nx || filter.kernel_nz > image.nz) throw ConfigError("'filter.kernel' exceeds the image");
  if (psf.nx > image.nx || psf.nz > image.nz) throw ConfigError("'psf' patch exceeds the image");
  const std::size_t m0_limit = coherence.axes == CoherenceAxes::both
                                   ? std::min(filter.kernel_nz / 2, filter.kernel_nx / 2)
                                   : filter.kernel_nx / 2;
  if (coherence.m0 > m0_limit) throw ConfigError("'coherence.m0' exceeds the kernel half-size");
  if (!(weight_exponent >= 0.0)) throw ConfigError("'coherence.p' must be >= 0");
  if (!(dynamic_range_db > 0.0)) throw ConfigError("'render.dr_db' must be > 0");
  if (gcnr_bins < 2) throw ConfigError("'metrics.gcnr_bins' must be >= 2");
  if (psf_source == PsfSource::external && psf_path.empty())
    throw ConfigError("'psf_path' is required when psf_source is \"external\"");
}

std::pair<std::size_t, std::size_t> parse_dims(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw ConfigError("dims '" + text + "' must look like 21x41");
  try {
    std::size_t used_a = 0;
    std::size_t used_b = 0;
    const auto a = std::stoul(text.substr(0, x), &used_a);
    const auto b = std::stoul(text.substr(x + 1), &used_b);
    if (used_a != x || used_b != text.size() - x - 1) throw std::invalid_argument("trailing characters");
    return {a, b};
  } catch (const std::exception&) {
    throw ConfigError("dims '" + text + "' must look like 21x41");
  }
}

json nest_flat_document(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> nested{"geometry", "pulse", "aberrator", "phantom", "image", "psf",
                                            "filter", "coherence", "render", "metrics"};
  for (const auto& [key, _] : doc.items())
    if (nested.contains(key)) return doc;

  static const std::set<std::string> aberrator_keys{"preset", "rms_ns", "rms_s", "corr_len"};
  static const std::set<std::string> phantom_keys{"width_m",       "height_m",      "center_m",
                                                  "cyst_center_m", "cyst_radius_m", "cyst_amp",
                                                  "point_targets", "density_per_mm2", "background_gap_m"};
  json out = json::object();
  for (const auto& [key, value] : doc.items()) {
    if (kGeometryKeys.contains(key)) out["geometry"][key] = value;
    else if (kPulseKeys.contains(key)) out["pulse"][key] = value;
    else if (aberrator_keys.contains(key)) out["aberrator"][key] = value;
    else if (phantom_keys.contains(key)) out["phantom"][key] = value;
    else if (key == "psf_nx") out["psf"]["nx"] = value;
    else if (key == "psf_nz") out["psf"]["nz"] = value;
    else out[key] = value;
  }
  // In the flat form the one seed also drives the phase screen directly.
  if (doc.contains("seed")) out["aberrator"]["seed"] = doc.at("seed");
  return out;
}

ExperimentConfig parse_config(const json& input) {
  const json doc = nest_flat_document(input);
  ExperimentConfig cfg;
  const Section top(doc, "",
                    {"seed", "out_dir", "geometry", "pulse", "aberrator", "phantom", "image", "psf", "filter",
                     "coherence", "render", "metrics", "psf_source", "psf_path"});
  cfg.seed = top.count("seed", cfg.seed);
  cfg.out_dir = top.text("out_dir", cfg.out_dir.string());

  cfg.geometry = geometry_from(Section(child(doc, "geometry"), "geometry", kGeometryKeys), cfg.geometry);
  cfg.pulse = pulse_from(Section(child(doc, "pulse"), "pulse", kPulseKeys), cfg.geometry.f0);

  {
    const Section s(child(doc, "aberrator"), "aberrator", {"preset", "rms_ns", "rms_s", "corr_len", "seed"});
    cfg.aberrator_preset = s.text("preset", s.has("rms_ns") || s.has("rms_s") ? "custom" : "none");
    if (cfg.aberrator_preset != "custom") {
      try {
        cfg.aberrator = preset_settings(parse_preset(cfg.aberrator_preset));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string(e.what()) + " (expected none, mild, moderate or severe)");
      }
    }
    if (s.has("rms_ns") && s.has("rms_s")) throw ConfigError("give only one of 'aberrator.rms_ns' and 'aberrator.rms_s'");
    if (s.has("rms_ns")) cfg.aberrator.rms = s.number("rms_ns", 0.0) * 1e-9;
    if (s.has("rms_s")) cfg.aberrator.rms = s.number("rms_s", 0.0);
    cfg.aberrator.corr_len = s.number("corr_len", cfg.aberrator.corr_len);
    if (s.has("seed")) cfg.aberrator_seed = s.count("seed", 0);
  }

  {
    const Section s(child(doc, "phantom"), "phantom",
                    {"width_m", "height_m", "center_m", "cyst_center_m", "cyst_radius_m", "cyst_amp", "point_targets",
                     "density_per_mm2", "background_gap_m"});
    PhantomSpec& p = cfg.phantom;
    p.width = s.number("width_m", p.width);
    p.height = s.number("height_m", p.height);
    p.center = s.point("center_m", p.center);
    p.cyst_center = s.point("cyst_center_m", p.cyst_center);
    p.cyst_radius = s.number("cyst_radius_m", p.cyst_radius);
    p.cyst_amp = s.number("cyst_amp", p.cyst_amp);
    p.scatterer_density = s.number("density_per_mm2", p.scatterer_density);
    p.background_gap = s.number("background_gap_m", p.background_gap);
    if (s.has("point_targets")) {
      const json& pts = s.raw("point_targets");
      if (!pts.is_array()) throw ConfigError("'phantom.point_targets' must be a list of [x, z, amp]");
      p.point_targets.clear();
      for (const json& t : pts) {
        if (!t.is_array() || t.size() != 3 || !t[0].is_number() || !t[1].is_number() || !t[2].is_number())
          throw ConfigError("'phantom.point_targets' entries must be [x, z, amp]");
        p.point_targets.push_back({t[0].get<double>(), t[1].get<double>(), t[2].get<double>()});
      }
    }
  }

  {
    const Section s(child(doc, "image"), "image", {"nx", "nz", "dx_m", "dz_m", "center_m"});
    const auto nx = s.count("nx", cfg.image.nx);
    const auto nz = s.count("nz", cfg.image.nz);
    const double dx = s.number("dx_m", cfg.image.sampling.dx);
    const double dz = s.number("dz_m", cfg.image.sampling.dz);
    const Point2 centre = s.point("center_m", {0.0, cfg.geometry.tx_focus.z});
    cfg.image = GridSpec::centered(centre, static_cast<std::size_t>(nx), static_cast<std::size_t>(nz), dx, dz);
    cfg.psf.dx = dx;
    cfg.psf.dz = dz;
  }

  {
    const Section s(child(doc, "psf"), "psf", {"nx", "nz"});
    cfg.psf.nx = static_cast<std::size_t>(s.count("nx", cfg.psf.nx));
    cfg.psf.nz = static_cast<std::size_t>(s.count("nz", cfg.psf.nz));
  }

  {
    const Section s(child(doc, "filter"), "filter", {"eps", "kernel", "taper", "method"});
    try {
      cfg.filter.method = parse_filter_method(s.text("method", "frequency"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("'filter.method': ") + e.what());
    }
    cfg.filter.eps = s.number("eps", cfg.filter.eps);
    cfg.filter.taper = s.number("taper", cfg.filter.taper);
    if (s.has("kernel")) {
      const json& k = s.raw("kernel");
      if (k.is_string()) {
        std::tie(cfg.filter.kernel_nx, cfg.filter.kernel_nz) = parse_dims(k.get<std::string>());
      } else if (k.is_array() && k.size() == 2 && k[0].is_number_unsigned() && k[1].is_number_unsigned()) {
        cfg.filter.kernel_nx = k[0].get<std::size_t>();
        cfg.filter.kernel_nz = k[1].get<std::size_t>();
      } else {
        throw ConfigError("'filter.kernel' must be \"21x41\" or [21, 41] (lateral x axial)");
      }
    }
  }

  {
    const Section s(child(doc, "coherence"), "coherence", {"m0", "p", "axes", "apply_to"});
    cfg.coherence.m0 = static_cast<std::size_t>(s.count("m0", cfg.coherence.m0));
    cfg.weight_exponent = s.number("p", cfg.weight_exponent);
    const std::string axes = s.text("axes", "2d");
    if (axes == "2d") cfg.coherence.axes = CoherenceAxes::both;
    else if (axes == "lateral") cfg.coherence.axes = CoherenceAxes::lateral;
    else throw ConfigError("'coherence.axes' must be \"2d\" or \"lateral\"");
    const std::string target = s.text("apply_to", "complex");
    if (target == "complex") cfg.weight_target = WeightTarget::complex;
    else if (target == "envelope") cfg.weight_target = WeightTarget::envelope;
    else throw ConfigError("'coherence.apply_to' must be \"complex\" or \"envelope\"");
  }

  cfg.dynamic_range_db = Section(child(doc, "render"), "render", {"dr_db"}).number("dr_db", cfg.dynamic_range_db);
  cfg.gcnr_bins = static_cast<std::size_t>(
      Section(child(doc, "metrics"), "metrics", {"gcnr_bins"}).count("gcnr_bins", cfg.gcnr_bins));

  const std::string source = top.text("psf_source", "oracle");
  if (source == "oracle") cfg.psf_source = PsfSource::oracle;
  else if (source == "external") cfg.psf_source = PsfSource::external;
  else throw ConfigError("'psf_source' must be \"oracle\" or \"external\"");
  cfg.psf_path = top.text("psf_path", "");

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  ExperimentConfig cfg = parse_config(doc);
  // A relative external PSF path is taken relative to the config file.
  if (cfg.psf_source == PsfSource::external && cfg.psf_path.is_relative())
    cfg.psf_path = path.parent_path() / cfg.psf_path;
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir.string();
  j["geometry"] = {{"n_elements", cfg.geometry.n_elements}, {"pitch_m", cfg.geometry.pitch},
                   {"f0_hz", cfg.geometry.f0},              {"c0_mps", cfg.geometry.c0},
                   {"fs_hz", cfg.geometry.fs},              {"tx_focus_m", {cfg.geometry.tx_focus.x, cfg.geometry.tx_focus.z}}};
  j["pulse"] = {{"fractional_bandwidth", cfg.pulse.fractional_bandwidth}, {"duration_s", cfg.pulse.duration}};
  j["aberrator"] = {{"rms_s", cfg.aberrator.rms},
                    {"corr_len", cfg.aberrator.corr_len},
                    {"seed", cfg.resolved_aberrator_seed()}};
  json targets = json::array();
  for (const auto& t : cfg.phantom.point_targets) targets.push_back({t.x, t.z, t.amp});
  j["phantom"] = {{"width_m", cfg.phantom.width},
                  {"height_m", cfg.phantom.height},
                  {"center_m", {cfg.phantom.center.x, cfg.phantom.center.z}},
                  {"cyst_center_m", {cfg.phantom.cyst_center.x, cfg.phantom.cyst_center.z}},
                  {"cyst_radius_m", cfg.phantom.cyst_radius},
                  {"cyst_amp", cfg.phantom.cyst_amp},
                  {"point_targets", targets},
                  {"density_per_mm2", cfg.phantom.scatterer_density},
                  {"background_gap_m", cfg.phantom.background_gap}};
  const Sampling& s = cfg.image.sampling;
  j["image"] = {{"nx", cfg.image.nx},
                {"nz", cfg.image.nz},
                {"dx_m", s.dx},
                {"dz_m", s.dz},
                {"center_m", {s.x_at(cfg.image.nx / 2), s.z_at(cfg.image.nz / 2)}}};
  j["psf"] = {{"nx", cfg.psf.nx}, {"nz", cfg.psf.nz}};
  j["filter"] = {{"eps", cfg.filter.eps},
                 {"kernel", {cfg.filter.kernel_nx, cfg.filter.kernel_nz}},
                 {"taper", cfg.filter.taper},
                 {"method", to_string(cfg.filter.method)}};
  j["coherence"] = {{"m0", cfg.coherence.m0},
                    {"p", cfg.weight_exponent},
                    {"axes", cfg.coherence.axes == CoherenceAxes::both ? "2d" : "lateral"},
                    {"apply_to", cfg.weight_target == WeightTarget::complex ? "complex" : "envelope"}};
  j["render"] = {{"dr_db", cfg.dynamic_range_db}};
  j["metrics"] = {{"gcnr_bins", cfg.gcnr_bins}};
  j["psf_source"] = cfg.psf_source == PsfSource::oracle ? "oracle" : "external";
  if (!cfg.psf_path.empty()) j["psf_path"] = cfg.psf_path.string();
  return j;
}

}  // namespace psfr
