#include "snls/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace snls {

namespace {

std::string join_violations(const std::vector<std::string>& v) {
  std::string out = "invalid configuration:";
  for (const auto& s : v) out += "\n  " + s;
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

using SectionMap = std::map<std::string, std::map<std::string, std::string>>;

// Collects typed lookups and every complaint along the way.
struct Reader {
  SectionMap data;
  std::vector<std::string> violations;
  std::set<std::string> consumed;

  void note(const std::string& path, const std::string& msg) {
    violations.push_back(path + ": " + msg);
  }

  const std::string* find(const std::string& section, const std::string& key) {
    auto s = data.find(section);
    if (s == data.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    consumed.insert(section + "." + key);
    return &k->second;
  }

  void get_double(const std::string& sec, const std::string& key, double& out) {
    const std::string* raw = find(sec, key);
    if (!raw) return;
    try {
      std::size_t used = 0;
      const double v = std::stod(*raw, &used);
      if (used != raw->size()) throw std::invalid_argument("trailing characters");
      out = v;
    } catch (const std::exception&) {
      note(sec + "." + key, "expected a number, got '" + *raw + "'");
    }
  }

  void get_int(const std::string& sec, const std::string& key, int& out) {
    const std::string* raw = find(sec, key);
    if (!raw) return;
    try {
      std::size_t used = 0;
      const long v = std::stol(*raw, &used);
      if (used != raw->size()) throw std::invalid_argument("trailing characters");
      out = static_cast<int>(v);
    } catch (const std::exception&) {
      note(sec + "." + key, "expected an integer, got '" + *raw + "'");
    }
  }

  void get_u64(const std::string& sec, const std::string& key, std::uint64_t& out) {
    const std::string* raw = find(sec, key);
    if (!raw) return;
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(*raw, &used);
      if (used != raw->size()) throw std::invalid_argument("trailing characters");
      out = v;
    } catch (const std::exception&) {
      note(sec + "." + key, "expected an unsigned integer, got '" + *raw + "'");
    }
  }

  void get_bool(const std::string& sec, const std::string& key, bool& out) {
    const std::string* raw = find(sec, key);
    if (!raw) return;
    if (*raw == "true" || *raw == "1" || *raw == "yes" || *raw == "on")
      out = true;
    else if (*raw == "false" || *raw == "0" || *raw == "no" || *raw == "off")
      out = false;
    else
      note(sec + "." + key, "expected a boolean, got '" + *raw + "'");
  }

  void get_doubles(const std::string& sec, const std::string& key,
                   std::vector<double>& out) {
    const std::string* raw = find(sec, key);
    if (!raw) return;
    std::vector<double> parsed;
    std::istringstream in(*raw);
    std::string token;
    while (in >> token) {
      try {
        std::size_t used = 0;
        parsed.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        note(sec + "." + key, "expected numbers, got '" + token + "'");
        return;
      }
    }
    out = std::move(parsed);
  }

  void get_ints(const std::string& sec, const std::string& key, std::vector<int>& out) {
    std::vector<double> parsed;
    const std::size_t before = violations.size();
    get_doubles(sec, key, parsed);
    if (violations.size() != before || (parsed.empty() && !find(sec, key))) return;
    if (parsed.empty()) return;
    std::vector<int> ints;
    for (double v : parsed) {
      if (v != std::floor(v)) {
        note(sec + "." + key, "expected integers");
        return;
      }
      ints.push_back(static_cast<int>(v));
    }
    out = std::move(ints);
  }

  void get_string(const std::string& sec, const std::string& key, std::string& out) {
    const std::string* raw = find(sec, key);
    if (raw) out = *raw;
  }

  void flag_unknown_keys() {
    for (const auto& [sec, keys] : data)
      for (const auto& [key, value] : keys)
        if (!consumed.count(sec + "." + key)) note(sec + "." + key, "unknown key");
  }
};

SectionMap tokenize(const std::string& text, std::vector<std::string>& violations) {
  SectionMap out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) {
        violations.push_back("line " + std::to_string(lineno) + ": malformed section header");
        continue;
      }
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      violations.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (section.empty() || key.empty()) {
      violations.push_back("line " + std::to_string(lineno) + ": key outside a section");
      continue;
    }
    if (out[section].count(key)) {
      violations.push_back(section + "." + key + ": duplicate key");
      continue;
    }
    out[section][key] = value;
  }
  return out;
}

bool power_of_two(int n) { return n >= 1 && (n & (n - 1)) == 0; }

void validate(ExperimentConfig& cfg, Reader& r) {
  auto& note = r.violations;

  if (cfg.dim != 1 && cfg.dim != 2) note.push_back("grid.dim: must be 1 or 2");
  if (!power_of_two(cfg.n) || cfg.n < 4)
    note.push_back("grid.n: must be a power of two, at least 4");
  if (!(cfg.length > 0.0) || !std::isfinite(cfg.length))
    note.push_back("grid.length: must be positive and finite");

  if (!std::isfinite(cfg.lambda)) note.push_back("coefficients.lambda: must be finite");
  if (cfg.dim == 1 || cfg.dim == 2) {
    if (!(cfg.sigma > 0.0) || !(cfg.sigma < 2.0 / cfg.dim))
      note.push_back("coefficients.sigma: must lie in (0, 2/dim) for local well-posedness");
    else if (!admissible_pair_check(NonlinearitySpec::make(cfg.lambda, cfg.sigma, cfg.dim).lebesgue_p(),
                                    NonlinearitySpec::make(cfg.lambda, cfg.sigma, cfg.dim).lebesgue_r(),
                                    cfg.dim))
      note.push_back("coefficients.sigma: derived Lebesgue pair is not admissible");
  }
  if (cfg.channels < 1) note.push_back("coefficients.channels: must be at least 1");
  if (!(cfg.rho > 0.0)) note.push_back("coefficients.rho: must be positive");

  if (cfg.radial) {
    if (cfg.channels != 1) note.push_back("measure.radial: requires a single channel");
    if (!(cfg.radial_c > 0.0)) note.push_back("measure.c: must be positive");
    if (cfg.radial_alpha < 0.0) note.push_back("measure.alpha: must be nonnegative");
    if (!(cfg.radial_rmin > 0.0 && cfg.radial_rmin < cfg.radial_rmax && cfg.radial_rmax <= 1.0))
      note.push_back("measure.r_min/r_max: radial support must sit inside the unit ball");
  } else if (cfg.channels >= 1) {
    if (cfg.atom_components.empty() ||
        cfg.atom_components.size() % static_cast<std::size_t>(cfg.channels) != 0) {
      note.push_back("measure.atoms: component count must be a positive multiple of channels");
    } else {
      const std::size_t count = cfg.atom_components.size() / cfg.channels;
      for (std::size_t a = 0; a < count; ++a) {
        double norm2 = 0.0;
        for (int c = 0; c < cfg.channels; ++c) {
          const double z = cfg.atom_components[a * cfg.channels + c];
          norm2 += z * z;
        }
        if (!(norm2 > 0.0) || norm2 > 1.0 + 1e-15) {
          note.push_back("measure.atoms: marks must lie in the punctured unit ball");
          break;
        }
      }
      if (cfg.weights.size() != count)
        note.push_back("measure.weights: need one weight per atom");
      for (double w : cfg.weights)
        if (!(w > 0.0)) {
          note.push_back("measure.weights: must be positive");
          break;
        }
    }
  }

  if (!(cfg.amplitude >= 0.0) || !std::isfinite(cfg.amplitude))
    note.push_back("initial.amplitude: must be nonnegative and finite");
  if (!(cfg.width > 0.0)) note.push_back("initial.width: must be positive");

  if (!(cfg.dt > 0.0)) note.push_back("solver.dt: must be positive");
  if (cfg.snapshot_stride < 1) note.push_back("solver.snapshot_stride: must be at least 1");
  if (!(cfg.blowup_guard > 0.0)) note.push_back("solver.blowup_guard: must be positive");
  if (cfg.yosida_substeps < 1) note.push_back("solver.yosida_substeps: must be at least 1");
  for (std::size_t i = 0; i < cfg.mu_list.size(); ++i)
    if (!(cfg.mu_list[i] > 0.0) || (i > 0 && cfg.mu_list[i] <= cfg.mu_list[i - 1])) {
      note.push_back("solver.mu: must be positive and strictly increasing");
      break;
    }

  if (cfg.control_bins < 1) note.push_back("control.bins: must be at least 1");
  const std::size_t atom_count =
      cfg.channels >= 1 && !cfg.radial && cfg.atom_components.size() %
              static_cast<std::size_t>(std::max(cfg.channels, 1)) == 0
          ? cfg.atom_components.size() / std::max(cfg.channels, 1)
          : 0;
  if (cfg.control_columns != 1 &&
      static_cast<std::size_t>(cfg.control_columns) != atom_count)
    note.push_back("control.columns: must be 1 or match the atom count");
  if (!cfg.control_values.empty()) {
    if (cfg.control_values.size() !=
        static_cast<std::size_t>(cfg.control_bins) * cfg.control_columns)
      note.push_back("control.values: need bins x columns entries");
    for (double v : cfg.control_values)
      if (!(v >= 0.0)) {
        note.push_back("control.values: tilts must be nonnegative");
        break;
      }
  }

  if (!(cfg.horizon > 0.0)) note.push_back("experiment.horizon: must be positive");
  if (cfg.eps_list.empty()) note.push_back("experiment.eps: need at least one value");
  for (double e : cfg.eps_list)
    if (!(e > 0.0)) {
      note.push_back("experiment.eps: must be positive");
      break;
    }
  if (!(cfg.delta > 0.0)) note.push_back("experiment.delta: must be positive");
  if (cfg.samples < 1) note.push_back("experiment.samples: must be at least 1");
  if (!std::isfinite(cfg.level)) note.push_back("experiment.level: must be finite");
  for (double s : cfg.scales)
    if (!(s > 1.0)) {
      note.push_back("experiment.scales: must exceed 1");
      break;
    }
  for (int m : cfg.meshes)
    if (m < 1) {
      note.push_back("experiment.meshes: must be positive");
      break;
    }
  if (cfg.wz_paths < 1) note.push_back("experiment.wz_paths: must be at least 1");
  if (cfg.workers < 1) note.push_back("run.workers: must be at least 1");
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> v)
    : std::runtime_error(join_violations(v)), violations(std::move(v)) {}

ExperimentConfig parse_config_text(const std::string& text) {
  Reader r;
  r.data = tokenize(text, r.violations);

  ExperimentConfig cfg;
  r.get_int("grid", "dim", cfg.dim);
  r.get_int("grid", "n", cfg.n);
  r.get_double("grid", "length", cfg.length);

  r.get_double("coefficients", "lambda", cfg.lambda);
  r.get_double("coefficients", "sigma", cfg.sigma);
  r.get_int("coefficients", "channels", cfg.channels);
  r.get_double("coefficients", "rho", cfg.rho);
  std::string profile_tag;
  r.get_string("coefficients", "profile", profile_tag);
  if (!profile_tag.empty()) {
    try {
      cfg.profile = profile_from_name(profile_tag);
    } catch (const std::exception& e) {
      r.note("coefficients.profile", e.what());
    }
  }

  r.get_doubles("measure", "atoms", cfg.atom_components);
  r.get_doubles("measure", "weights", cfg.weights);
  r.get_bool("measure", "radial", cfg.radial);
  r.get_double("measure", "c", cfg.radial_c);
  r.get_double("measure", "alpha", cfg.radial_alpha);
  r.get_double("measure", "r_min", cfg.radial_rmin);
  r.get_double("measure", "r_max", cfg.radial_rmax);

  r.get_double("initial", "amplitude", cfg.amplitude);
  r.get_double("initial", "width", cfg.width);

  r.get_double("solver", "dt", cfg.dt);
  r.get_int("solver", "snapshot_stride", cfg.snapshot_stride);
  r.get_bool("solver", "dealias", cfg.dealias);
  r.get_double("solver", "blowup_guard", cfg.blowup_guard);
  r.get_int("solver", "yosida_substeps", cfg.yosida_substeps);
  r.get_doubles("solver", "mu", cfg.mu_list);

  r.get_int("control", "bins", cfg.control_bins);
  r.get_int("control", "columns", cfg.control_columns);
  r.get_doubles("control", "values", cfg.control_values);

  r.get_double("experiment", "horizon", cfg.horizon);
  r.get_doubles("experiment", "eps", cfg.eps_list);
  r.get_double("experiment", "delta", cfg.delta);
  r.get_int("experiment", "samples", cfg.samples);
  r.get_double("experiment", "level", cfg.level);
  r.get_doubles("experiment", "scales", cfg.scales);
  r.get_ints("experiment", "meshes", cfg.meshes);
  r.get_int("experiment", "wz_paths", cfg.wz_paths);

  r.get_u64("run", "seed", cfg.seed);
  r.get_int("run", "workers", cfg.workers);

  r.flag_unknown_keys();
  validate(cfg, r);
  if (!r.violations.empty()) throw ConfigError(std::move(r.violations));
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"config file not readable: " + path});
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

namespace {

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + fmt(v[i]);
  return out;
}

}  // namespace

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[grid]\n"
      << "dim = " << c.dim << "\n"
      << "n = " << c.n << "\n"
      << "length = " << fmt(c.length) << "\n\n";
  out << "[coefficients]\n"
      << "lambda = " << fmt(c.lambda) << "\n"
      << "sigma = " << fmt(c.sigma) << "\n"
      << "channels = " << c.channels << "\n"
      << "profile = " << profile_name(c.profile) << "\n"
      << "rho = " << fmt(c.rho) << "\n\n";
  out << "[measure]\n";
  if (c.radial) {
    out << "radial = true\n"
        << "c = " << fmt(c.radial_c) << "\n"
        << "alpha = " << fmt(c.radial_alpha) << "\n"
        << "r_min = " << fmt(c.radial_rmin) << "\n"
        << "r_max = " << fmt(c.radial_rmax) << "\n\n";
  } else {
    out << "atoms = " << fmt_list(c.atom_components) << "\n"
        << "weights = " << fmt_list(c.weights) << "\n\n";
  }
  out << "[initial]\n"
      << "amplitude = " << fmt(c.amplitude) << "\n"
      << "width = " << fmt(c.width) << "\n\n";
  out << "[solver]\n"
      << "dt = " << fmt(c.dt) << "\n"
      << "snapshot_stride = " << c.snapshot_stride << "\n"
      << "dealias = " << (c.dealias ? "true" : "false") << "\n"
      << "blowup_guard = " << fmt(c.blowup_guard) << "\n"
      << "yosida_substeps = " << c.yosida_substeps << "\n"
      << "mu = " << fmt_list(c.mu_list) << "\n\n";
  out << "[control]\n"
      << "bins = " << c.control_bins << "\n"
      << "columns = " << c.control_columns << "\n";
  if (!c.control_values.empty()) out << "values = " << fmt_list(c.control_values) << "\n";
  out << "\n[experiment]\n"
      << "horizon = " << fmt(c.horizon) << "\n"
      << "eps = " << fmt_list(c.eps_list) << "\n"
      << "delta = " << fmt(c.delta) << "\n"
      << "samples = " << c.samples << "\n"
      << "level = " << fmt(c.level) << "\n"
      << "scales = " << fmt_list(c.scales) << "\n"
      << "meshes =";
  for (int m : c.meshes) out << " " << m;
  out << "\n"
      << "wz_paths = " << c.wz_paths << "\n\n";
  out << "[run]\n"
      << "seed = " << c.seed << "\n"
      << "workers = " << c.workers << "\n";
  return out.str();
}

std::shared_ptr<const SpectralGrid> ExperimentConfig::make_grid() const {
  return SpectralGrid::make(dim, n, length);
}

NonlinearitySpec ExperimentConfig::make_spec() const {
  return NonlinearitySpec::make(lambda, sigma, dim);
}

SaturableFamily ExperimentConfig::make_family() const {
  return SaturableFamily::uniform(channels, profile, rho);
}

LevyMeasure ExperimentConfig::make_measure() const {
  if (radial) return LevyMeasure::radial(radial_c, radial_alpha, radial_rmin, radial_rmax);
  if (channels == 1) return LevyMeasure::discrete_scalar(atom_components, weights);
  std::vector<std::vector<double>> atoms;
  for (std::size_t a = 0; a < atom_components.size(); a += channels)
    atoms.emplace_back(atom_components.begin() + a, atom_components.begin() + a + channels);
  return LevyMeasure::discrete(std::move(atoms), weights);
}

SolverConfig ExperimentConfig::make_solver() const {
  SolverConfig s;
  s.dt = dt;
  s.snapshot_stride = snapshot_stride;
  s.dealias = dealias;
  s.blowup_guard = blowup_guard;
  s.yosida_substeps = yosida_substeps;
  return s;
}

Control ExperimentConfig::make_control() const {
  if (control_values.empty())
    return Control::constant(1.0, horizon, control_bins, control_columns);
  std::vector<double> edges;
  for (int i = 0; i <= control_bins; ++i) edges.push_back(horizon * i / control_bins);
  return Control(std::move(edges), control_columns, control_values);
}

ComplexField ExperimentConfig::make_initial(const std::shared_ptr<const SpectralGrid>& grid) const {
  const double a = amplitude, w2 = 2.0 * width * width;
  if (grid->dim() == 1)
    return ComplexField::from_function(
        grid, [a, w2](double x) { return cplx(a * std::exp(-x * x / w2), 0.0); });
  return ComplexField::from_function(grid, [a, w2](double x, double y) {
    return cplx(a * std::exp(-(x * x + y * y) / w2), 0.0);
  });
}

}  // namespace snls
