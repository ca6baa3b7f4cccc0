#include "experiments/config.hpp"

#include "fchern/error.hpp"
#include "fchern/propagator.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace fchern::cli {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double to_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError(what + ": '" + s + "' is not a finite number");
  }
  return v;
}

long to_long(const std::string& s, const std::string& what) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(what + ": '" + s + "' is not an integer");
  }
  return v;
}

bool to_bool(const std::string& s, const std::string& what) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(what + ": '" + s + "' is not a boolean");
}

struct RawValue {
  std::string value;
  int line = 0;  // 0 for flags
  bool from_flag = false;
  std::optional<std::string> shadowed;
  int shadowed_line = 0;
};

}  // namespace

const std::vector<std::pair<Experiment, std::string>>& experiment_names() {
  static const std::vector<std::pair<Experiment, std::string>> names = {
      {Experiment::transport_sweep, "transport-sweep"}, {Experiment::floquet_gaps, "floquet-gaps"},
      {Experiment::floquet_bands, "floquet-bands"},     {Experiment::winding_sweep, "winding-sweep"},
      {Experiment::chern_static, "chern-static"},       {Experiment::longtime, "longtime"},
      {Experiment::enclosure, "enclosure"},
  };
  return names;
}

std::string to_string(Experiment e) {
  for (const auto& [value, name] : experiment_names()) {
    if (value == e) return name;
  }
  return "unknown";
}

const std::vector<KeyInfo>& config_keys() {
  static const std::vector<KeyInfo> keys = {
      {"experiment", "", "one of the names printed by list-experiments (required)"},
      {"model", "", "harper:p=P,q=Q[,ell=L] | h1 | h2[:eps=E] | simon (required)"},
      {"tau_grid", "", "min:max:points:linear|log|adaptive, or a comma list of values"},
      {"band", "all", "band index (transport-sweep, longtime)"},
      {"epsilon", "", "overrides eps of the h2 model"},
      {"k_points", "128", "k quadrature / tracking nodes"},
      {"tol", "1e-9", "propagator tolerance, within [1e-12, 1e-4]"},
      {"out_dir", "out", "output directory"},
      {"emit_plot", "false", "also write a matplotlib script for the CSV"},
      {"seed", "1", "seed for randomized checks"},
      {"drive", "pulse", "transport-sweep drive: pulse or smooth_pulse"},
      {"grid", "64", "chern-static starting lattice size"},
      {"k", "0.3", "longtime: quasimomentum"},
      {"cesaro_steps", "10000", "longtime: number of Floquet periods averaged"},
      {"center", "", "enclosure: loop centre tau,k"},
      {"radius", "", "enclosure: loop radius"},
      {"loop_points", "128", "enclosure: nodes on the loop"},
      {"refine_minima", "6", "floquet-gaps: minima per gap polished in tau"},
      {"floquet_chern", "false", "winding-sweep: also report plaquette Floquet Chern numbers"},
  };
  return keys;
}

std::vector<double> TauGrid::values() const {
  if (spacing == Spacing::list) return listed;
  const int n = spacing == Spacing::adaptive ? std::max(8, points / 2) : points;
  std::vector<double> v;
  if (n == 1) return {min};
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    if (spacing == Spacing::log) {
      v.push_back(std::exp(std::log(min) + t * (std::log(max) - std::log(min))));
    } else {
      v.push_back(min + t * (max - min));
    }
  }
  v.front() = min;
  v.back() = max;
  return v;
}

TauGrid parse_tau_grid(std::string_view text) {
  TauGrid grid;
  const std::string s = trim(text);
  if (s.find(':') != std::string::npos) {
    const auto parts = split(s, ':');
    if (parts.size() != 4) throw ConfigError("tau_grid: expected min:max:points:spacing");
    grid.min = to_double(parts[0], "tau_grid min");
    grid.max = to_double(parts[1], "tau_grid max");
    const long points = to_long(parts[2], "tau_grid points");
    if (points < 1 || points > 100000) throw ConfigError("tau_grid: points must be in [1, 100000]");
    grid.points = static_cast<int>(points);
    if (parts[3] == "linear") {
      grid.spacing = Spacing::linear;
    } else if (parts[3] == "log") {
      grid.spacing = Spacing::log;
    } else if (parts[3] == "adaptive") {
      grid.spacing = Spacing::adaptive;
    } else {
      throw ConfigError("tau_grid: unknown spacing '" + parts[3] + "'");
    }
    if (!(grid.min > 0.0)) throw ConfigError("tau_grid: min must be positive");
    if (grid.max < grid.min) throw ConfigError("tau_grid: max must not be below min");
    if (grid.points > 1 && grid.max == grid.min) throw ConfigError("tau_grid: empty range for several points");
    return grid;
  }
  grid.spacing = Spacing::list;
  for (const std::string& part : split(s, ',')) {
    if (part.empty()) throw ConfigError("tau_grid: empty list entry");
    const double v = to_double(part, "tau_grid");
    if (!(v > 0.0)) throw ConfigError("tau_grid: values must be positive");
    grid.listed.push_back(v);
  }
  grid.points = static_cast<int>(grid.listed.size());
  grid.min = *std::min_element(grid.listed.begin(), grid.listed.end());
  grid.max = *std::max_element(grid.listed.begin(), grid.listed.end());
  return grid;
}

ModelSpec parse_model(std::string_view text) {
  ModelSpec spec;
  const std::string s = trim(text);
  const std::size_t colon = s.find(':');
  spec.kind = trim(s.substr(0, colon));
  if (colon != std::string::npos) {
    for (const std::string& part : split(s.substr(colon + 1), ',')) {
      const std::size_t eq = part.find('=');
      if (eq == std::string::npos) throw ConfigError("model: parameter '" + part + "' needs name=value");
      const std::string name = trim(part.substr(0, eq));
      if (spec.params.count(name)) throw ConfigError("model: parameter '" + name + "' given twice");
      spec.params[name] = to_double(trim(part.substr(eq + 1)), "model parameter " + name);
    }
  }
  auto allow = [&](std::initializer_list<const char*> names) {
    for (const auto& [name, value] : spec.params) {
      if (std::none_of(names.begin(), names.end(), [&](const char* n) { return name == n; })) {
        throw ConfigError("model: '" + spec.kind + "' has no parameter '" + name + "'");
      }
    }
  };
  if (spec.kind == "harper") {
    allow({"p", "q", "ell"});
    for (const char* req : {"p", "q"}) {
      if (!spec.params.count(req)) throw ConfigError(std::string("model: harper needs ") + req);
      const double v = spec.params[req];
      if (v != std::floor(v)) throw ConfigError(std::string("model: harper ") + req + " must be an integer");
    }
  } else if (spec.kind == "h2") {
    allow({"eps"});
    spec.params.try_emplace("eps", 0.0);
  } else if (spec.kind == "h1" || spec.kind == "simon") {
    allow({});
  } else {
    throw ConfigError("model: unknown model '" + spec.kind + "'");
  }
  // Surface invalid parameters (gcd, eps = +-1) as configuration errors.
  if (spec.has_family()) {
    try {
      (void)spec.family();
    } catch (const InvalidModelError& e) {
      throw ConfigError(std::string("model: ") + e.what());
    }
  }
  return spec;
}

ModelFamily ModelSpec::family() const {
  if (kind == "harper") {
    const double ell = params.count("ell") ? params.at("ell") : 0.0;
    return harper_family(static_cast<int>(params.at("p")), static_cast<int>(params.at("q")), ell);
  }
  if (kind == "h1") return h1_family();
  if (kind == "h2") return h2_family(params.at("eps"));
  throw ConfigError("model '" + kind + "' has no Hamiltonian family; it is defined by its Floquet operator only");
}

FloquetField ModelSpec::floquet(double tol) const {
  if (kind == "simon") return [](double tau, double k) { return simon_floquet(tau, k); };
  return floquet_field(family(), tol);
}

std::string ModelSpec::describe() const {
  std::ostringstream os;
  os << kind;
  char sep = ':';
  for (const auto& [name, value] : params) {
    os << sep << name << '=' << value;
    sep = ',';
  }
  return os.str();
}

ExperimentConfig parse_config(std::string_view text,
                              const std::vector<std::pair<std::string, std::string>>& overrides) {
  const auto& keys = config_keys();
  auto known = [&](const std::string& key) {
    return std::any_of(keys.begin(), keys.end(), [&](const KeyInfo& k) { return k.key == key; });
  };

  std::map<std::string, RawValue> raw;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    ++line_no;
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const std::size_t eq = content.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));
    if (key.empty()) throw ConfigError("missing key before '='", line_no);
    if (!known(key)) throw ConfigError("unknown key '" + key + "'", line_no);
    if (value.empty()) throw ConfigError("key '" + key + "' has an empty value", line_no);
    if (raw.count(key)) throw ConfigError("key '" + key + "' repeated (first on line " + std::to_string(raw[key].line) + ")", line_no);
    raw[key] = RawValue{value, line_no, false, std::nullopt, 0};
  }
  for (const auto& [key, value] : overrides) {
    if (!known(key)) throw ConfigError("unknown flag --" + key);
    RawValue v{trim(value), 0, true, std::nullopt, 0};
    if (auto it = raw.find(key); it != raw.end() && !it->second.from_flag) {
      v.shadowed = it->second.value;
      v.shadowed_line = it->second.line;
    }
    raw[key] = v;
  }

  ExperimentConfig cfg;
  // Resolves one key, rethrowing parse failures with the line or flag attached.
  auto with = [&](const std::string& key, auto&& apply) {
    auto it = raw.find(key);
    if (it == raw.end()) return false;
    try {
      apply(it->second.value);
    } catch (const ConfigError& e) {
      if (it->second.from_flag) throw ConfigError("flag --" + key + ": " + e.what());
      throw ConfigError(e.what(), it->second.line);
    }
    return true;
  };
  auto fail = [&](const std::string& key, const std::string& message) {
    auto it = raw.find(key);
    if (it == raw.end()) throw ConfigError(message);
    if (it->second.from_flag) throw ConfigError("flag --" + key + ": " + message);
    throw ConfigError(message, it->second.line);
  };

  if (!with("experiment", [&](const std::string& v) {
        for (const auto& [value, name] : experiment_names()) {
          if (name == v) {
            cfg.experiment = value;
            return;
          }
        }
        throw ConfigError("unknown experiment '" + v + "'");
      })) {
    throw ConfigError("missing required key 'experiment'");
  }
  if (!with("model", [&](const std::string& v) {
        cfg.model_text = v;
        cfg.model = parse_model(v);
      })) {
    throw ConfigError("missing required key 'model'");
  }
  with("epsilon", [&](const std::string& v) {
    if (cfg.model.kind != "h2") throw ConfigError("epsilon applies only to the h2 model");
    cfg.epsilon = to_double(v, "epsilon");
    if (std::abs(std::abs(*cfg.epsilon) - 1.0) < 1e-12) throw ConfigError("epsilon = +-1 closes the static gap");
    cfg.model.params["eps"] = *cfg.epsilon;
  });
  with("tau_grid", [&](const std::string& v) { cfg.tau_grid = parse_tau_grid(v); });
  with("band", [&](const std::string& v) {
    if (v == "all") return;
    const long b = to_long(v, "band");
    if (b < 0) throw ConfigError("band must be non-negative");
    cfg.band = static_cast<int>(b);
  });
  with("k_points", [&](const std::string& v) {
    const long k = to_long(v, "k_points");
    if (k < 32 || k > 65536) throw ConfigError("k_points must be in [32, 65536]");
    cfg.k_points = static_cast<int>(k);
  });
  with("tol", [&](const std::string& v) {
    cfg.tol = to_double(v, "tol");
    if (cfg.tol < 1e-12 || cfg.tol > 1e-4) throw ConfigError("tol must lie within [1e-12, 1e-4]");
  });
  with("out_dir", [&](const std::string& v) { cfg.out_dir = v; });
  with("emit_plot", [&](const std::string& v) { cfg.emit_plot = to_bool(v, "emit_plot"); });
  with("seed", [&](const std::string& v) {
    const long s = to_long(v, "seed");
    if (s < 0) throw ConfigError("seed must be non-negative");
    cfg.seed = static_cast<unsigned long>(s);
  });
  with("drive", [&](const std::string& v) {
    if (v != "pulse" && v != "smooth_pulse") throw ConfigError("drive must be pulse or smooth_pulse");
    cfg.drive = v;
  });
  with("grid", [&](const std::string& v) {
    const long g = to_long(v, "grid");
    if (g < 4 || g > 512) throw ConfigError("grid must be in [4, 512]");
    cfg.grid = static_cast<int>(g);
  });
  with("k", [&](const std::string& v) { cfg.k = to_double(v, "k"); });
  with("cesaro_steps", [&](const std::string& v) {
    cfg.cesaro_steps = to_long(v, "cesaro_steps");
    if (cfg.cesaro_steps < 1) throw ConfigError("cesaro_steps must be positive");
  });
  with("center", [&](const std::string& v) {
    const auto parts = split(v, ',');
    if (parts.size() != 2) throw ConfigError("center must be tau,k");
    cfg.center_tau = to_double(parts[0], "center tau");
    cfg.center_k = to_double(parts[1], "center k");
  });
  with("radius", [&](const std::string& v) {
    cfg.radius = to_double(v, "radius");
    if (!(cfg.radius > 0.0)) throw ConfigError("radius must be positive");
  });
  with("loop_points", [&](const std::string& v) {
    const long n = to_long(v, "loop_points");
    if (n < 16 || n > 65536) throw ConfigError("loop_points must be in [16, 65536]");
    cfg.loop_points = static_cast<int>(n);
  });
  with("refine_minima", [&](const std::string& v) {
    const long n = to_long(v, "refine_minima");
    if (n < 0 || n > 100) throw ConfigError("refine_minima must be in [0, 100]");
    cfg.refine_minima = static_cast<int>(n);
  });
  with("floquet_chern", [&](const std::string& v) { cfg.floquet_chern = to_bool(v, "floquet_chern"); });

  // Cross-key requirements.
  const Experiment e = cfg.experiment;
  const bool needs_tau = e != Experiment::chern_static && e != Experiment::enclosure;
  if (needs_tau && !cfg.tau_grid) throw ConfigError("missing required key 'tau_grid' for " + to_string(e));
  if (cfg.tau_grid && cfg.tau_grid->spacing == Spacing::adaptive && e != Experiment::floquet_gaps) {
    fail("tau_grid", "adaptive spacing is only available for floquet-gaps");
  }
  const bool needs_family = e == Experiment::transport_sweep || e == Experiment::chern_static ||
                            e == Experiment::longtime || (e == Experiment::winding_sweep && cfg.floquet_chern);
  if (needs_family && !cfg.model.has_family()) {
    fail("model", "experiment " + to_string(e) + " needs a Hamiltonian family; '" + cfg.model.kind +
                      "' only defines a Floquet operator");
  }
  if (cfg.band && cfg.model.has_family() && *cfg.band >= cfg.model.family().dim) {
    fail("band", "band " + std::to_string(*cfg.band) + " exceeds the model dimension");
  }
  const bool tracks = e == Experiment::floquet_gaps || e == Experiment::floquet_bands ||
                      e == Experiment::winding_sweep;
  if (tracks && cfg.k_points < 128) fail("k_points", "band tracking needs k_points >= 128");
  if (e == Experiment::enclosure) {
    if (!raw.count("center")) throw ConfigError("missing required key 'center' for enclosure");
    if (!raw.count("radius")) throw ConfigError("missing required key 'radius' for enclosure");
    if (cfg.center_tau - cfg.radius <= 0.0) fail("radius", "loop reaches tau <= 0");
  }

  for (const KeyInfo& info : keys) {
    SettingRecord rec;
    rec.key = info.key;
    if (auto it = raw.find(info.key); it != raw.end()) {
      rec.value = it->second.value;
      rec.source = it->second.from_flag ? "flag" : "file line " + std::to_string(it->second.line);
      if (it->second.shadowed) {
        rec.shadowed_file_value = *it->second.shadowed + " (file line " + std::to_string(it->second.shadowed_line) + ")";
      }
    } else {
      if (info.default_value.empty()) continue;
      rec.value = info.default_value;
      rec.source = "default";
    }
    cfg.settings.push_back(rec);
  }
  return cfg;
}

}  // namespace fchern::cli
