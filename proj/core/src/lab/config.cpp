#include "shrinker/lab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace shrinker::lab {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& s) {
  const std::string t = trim(s);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || end != t.data() + t.size() || t.empty() || !std::isfinite(v)) {
    throw std::invalid_argument("expected a finite number, got '" + t + "'");
  }
  return v;
}

std::uint64_t to_unsigned(const std::string& s) {
  const std::string t = trim(s);
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || end != t.data() + t.size() || t.empty()) {
    throw std::invalid_argument("expected a non-negative integer, got '" + t + "'");
  }
  return v;
}

int to_int(const std::string& s) {
  const std::string t = trim(s);
  int v = 0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || end != t.data() + t.size() || t.empty()) {
    throw std::invalid_argument("expected an integer, got '" + t + "'");
  }
  return v;
}

bool to_bool(const std::string& s) {
  const std::string t = trim(s);
  if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
  if (t == "false" || t == "no" || t == "off" || t == "0") return false;
  throw std::invalid_argument("expected true or false, got '" + t + "'");
}

Vec2 to_point(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 2) throw std::invalid_argument("expected 'x, y', got '" + s + "'");
  return {to_double(parts[0]), to_double(parts[1])};
}

std::vector<FourierTerm> to_terms(const std::string& s) {
  std::vector<FourierTerm> out;
  if (s.find_first_not_of(" \t") == std::string::npos) return out;
  for (const auto& item : split(s, ',')) {
    const auto kv = split(item, ':');
    if (kv.size() != 2) throw std::invalid_argument("expected 'k:amplitude', got '" + item + "'");
    out.push_back({to_int(kv[0]), to_double(kv[1])});
  }
  return out;
}

template <class T, class F>
std::vector<T> to_list(const std::string& s, F convert) {
  std::vector<T> out;
  for (const auto& item : split(s, ',')) out.push_back(static_cast<T>(convert(item)));
  return out;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + items[i];
  return out;
}

template <class T, class F>
std::string join_with(const std::vector<T>& items, F render) {
  std::vector<std::string> parts;
  for (const auto& x : items) parts.push_back(render(x));
  return join(parts);
}

std::string terms_text(const std::vector<FourierTerm>& terms) {
  return join_with(terms, [](const FourierTerm& t) { return std::to_string(t.k) + ":" + num(t.amplitude); });
}

std::string point_text(Vec2 p) { return num(p.x) + ", " + num(p.y); }

std::string kind_text(ShrinkerKind k) { return k == ShrinkerKind::circle ? "circle" : "sphere"; }

struct Field {
  const char* section;
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&)> parse;
  /// Empty optional when the value is unset and should not be written.
  std::function<std::optional<std::string>(const ExperimentConfig&)> emit;
};

#define SHRINKER_FIELD(section, key, member, from, to)                                  \
  Field {                                                                               \
    section, key, [](ExperimentConfig& c, const std::string& s) { c.member = from(s); }, \
        [](const ExperimentConfig& c) -> std::optional<std::string> { return to(c.member); } \
  }

#define SHRINKER_OPTIONAL(section, key, member, from, to)                               \
  Field {                                                                               \
    section, key, [](ExperimentConfig& c, const std::string& s) { c.member = from(s); }, \
        [](const ExperimentConfig& c) -> std::optional<std::string> {                   \
          if (!c.member) return std::nullopt;                                           \
          return to(*c.member);                                                         \
        }                                                                               \
  }

std::string self(const std::string& s) { return trim(s); }
std::string path_text(const std::filesystem::path& p) { return p.string(); }
std::string bool_text(bool b) { return b ? "true" : "false"; }
std::string size_text(std::size_t n) { return std::to_string(n); }
std::string int_text(int n) { return std::to_string(n); }
std::size_t to_size(const std::string& s) { return static_cast<std::size_t>(to_unsigned(s)); }

ShrinkerKind to_kind(const std::string& s) {
  const std::string t = trim(s);
  if (t == "circle") return ShrinkerKind::circle;
  if (t == "sphere" || t == "round-sphere") return ShrinkerKind::round_sphere;
  throw std::invalid_argument("expected circle or sphere, got '" + t + "'");
}

Generator to_generator(const std::string& s) {
  const std::string t = trim(s);
  if (t == "fourier") return Generator::fourier;
  if (t == "file") return Generator::file;
  throw std::invalid_argument("expected fourier or file, got '" + t + "'");
}

std::string generator_text(Generator g) { return g == Generator::fourier ? "fourier" : "file"; }

TimeScheme to_scheme(const std::string& s) {
  const std::string t = trim(s);
  if (t == "semi-implicit") return TimeScheme::semi_implicit;
  if (t == "rk4") return TimeScheme::rk4;
  throw std::invalid_argument("expected semi-implicit or rk4, got '" + t + "'");
}

std::string scheme_text(TimeScheme s) { return s == TimeScheme::rk4 ? "rk4" : "semi-implicit"; }

std::vector<std::string> to_names(const std::string& s) { return split(s, ','); }
std::vector<double> to_doubles(const std::string& s) { return to_list<double>(s, to_double); }
std::vector<std::size_t> to_sizes(const std::string& s) { return to_list<std::size_t>(s, to_unsigned); }
std::vector<int> to_ints(const std::string& s) { return to_list<int>(s, to_int); }
std::string doubles_text(const std::vector<double>& v) { return join_with(v, num); }
std::string sizes_text(const std::vector<std::size_t>& v) { return join_with(v, size_text); }
std::string ints_text(const std::vector<int>& v) { return join_with(v, int_text); }

const std::vector<Field>& fields() {
  static const std::vector<Field> all = {
      SHRINKER_FIELD("experiment", "presets", presets, to_names, join),
      SHRINKER_FIELD("experiment", "seed", seed, to_unsigned, size_text),
      SHRINKER_FIELD("experiment", "output", output, self, path_text),
      SHRINKER_FIELD("experiment", "plots", plots, to_bool, bool_text),

      SHRINKER_OPTIONAL("model", "kind", kind, to_kind, kind_text),
      SHRINKER_OPTIONAL("model", "dimension", dimension, to_int, int_text),
      SHRINKER_OPTIONAL("model", "nodes", nodes, to_size, size_text),
      SHRINKER_OPTIONAL("model", "graph_bound", graph_bound, to_double, num),

      SHRINKER_FIELD("initial", "generator", generator, to_generator, generator_text),
      SHRINKER_OPTIONAL("initial", "radius", radius, to_double, num),
      SHRINKER_FIELD("initial", "center", center, to_point, point_text),
      SHRINKER_OPTIONAL("initial", "cos", cos_terms, to_terms, terms_text),
      SHRINKER_OPTIONAL("initial", "sin", sin_terms, to_terms, terms_text),
      SHRINKER_FIELD("initial", "file", file, self, path_text),
      SHRINKER_FIELD("initial", "random_modes", random_modes, to_size, size_text),
      SHRINKER_FIELD("initial", "random_amplitude", random_amplitude, to_double, num),

      SHRINKER_OPTIONAL("rescaled", "dtau", dtau, to_double, num),
      SHRINKER_FIELD("rescaled", "tau_length", tau_length, to_double, num),
      SHRINKER_OPTIONAL("rescaled", "conv_tol", conv_tol, to_double, num),
      SHRINKER_FIELD("rescaled", "scheme", scheme, to_scheme, scheme_text),
      SHRINKER_OPTIONAL("rescaled", "snapshot_every", rescaled_snapshot_every, to_size, size_text),
      SHRINKER_FIELD("rescaled", "shoot", shoot, to_bool, bool_text),

      SHRINKER_FIELD("physical", "dt", dt, to_double, num),
      SHRINKER_FIELD("physical", "stop_area", stop_area, to_double, num),
      SHRINKER_FIELD("physical", "snapshot_every", physical_snapshot_every, to_size, size_text),

      SHRINKER_FIELD("extinction", "window_fraction", window_fraction, to_double, num),
      SHRINKER_FIELD("extinction", "exclude_fraction", exclude_fraction, to_double, num),
      SHRINKER_FIELD("extinction", "max_residual", max_residual, to_double, num),

      SHRINKER_FIELD("analysis", "gap_min", gap_min, to_double, num),
      SHRINKER_FIELD("analysis", "gap_max", gap_max, to_double, num),
      SHRINKER_FIELD("analysis", "min_samples", min_samples, to_size, size_text),
      SHRINKER_FIELD("analysis", "exponential_theta", exponential_theta, to_double, num),
      SHRINKER_FIELD("analysis", "lambda_bases", lambda_bases, to_doubles, doubles_text),
      SHRINKER_FIELD("analysis", "tolerance", tolerance, to_double, num),
      SHRINKER_OPTIONAL("analysis", "control_offset", control_offset, to_point, point_text),
      SHRINKER_FIELD("analysis", "route_window", route_window, to_double, num),

      SHRINKER_FIELD("convergence", "nodes", convergence_nodes, to_sizes, sizes_text),
      SHRINKER_FIELD("convergence", "dtaus", convergence_dtaus, to_doubles, doubles_text),
      SHRINKER_FIELD("convergence", "tau_length", convergence_tau_length, to_double, num),

      SHRINKER_FIELD("density", "dimensions", density_dimensions, to_ints, ints_text),
      SHRINKER_FIELD("density", "nodes", density_nodes, to_size, size_text),
  };
  return all;
}

#undef SHRINKER_FIELD
#undef SHRINKER_OPTIONAL

void require(bool ok, const char* key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "density-table", "circle-perturb", "sphere-perturb", "tangent-uniqueness",
      "convergence-order"};
  return names;
}

std::string preset_description(const std::string& preset) {
  if (preset == "density-table") return "Gaussian densities of the built-in shrinkers";
  if (preset == "circle-perturb") return "perturbed circle: extinction fit, rescaled flow, fits and bounds";
  if (preset == "sphere-perturb") return "perturbed round sphere (rotationally symmetric), same pipeline";
  if (preset == "tangent-uniqueness") return "parabolic rescalings of a physical flow about its extinction point";
  if (preset == "convergence-order") return "grid and step refinement of the residual invariants";
  return {};
}

ResolvedModel resolve(const ExperimentConfig& c, const std::string& preset) {
  ResolvedModel m;
  const bool sphere_preset = preset == "sphere-perturb";
  m.kind = c.kind.value_or(sphere_preset ? ShrinkerKind::round_sphere : ShrinkerKind::circle);
  const bool sphere = m.kind == ShrinkerKind::round_sphere;
  m.dimension = c.dimension.value_or(sphere ? 2 : 1);
  m.nodes = c.nodes.value_or(sphere ? 256 : 512);
  m.graph_bound = c.graph_bound;
  m.dtau = c.dtau.value_or(sphere ? 1e-3 : 1e-4);
  m.conv_tol = c.conv_tol.value_or(sphere ? 1e-5 : 1e-8);
  if (sphere) {
    m.cos_terms = c.cos_terms.value_or(std::vector<FourierTerm>{{2, 0.05}, {3, 0.03}});
    m.sin_terms = c.sin_terms.value_or(std::vector<FourierTerm>{});
  } else {
    m.cos_terms = c.cos_terms.value_or(std::vector<FourierTerm>{{2, 0.05}});
    m.sin_terms = c.sin_terms.value_or(std::vector<FourierTerm>{{3, 0.03}});
  }
  m.control_offset = c.control_offset.value_or(sphere ? Vec2{0.0, 0.1} : Vec2{0.1, 0.0});
  return m;
}

ExperimentConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("", "line " + std::to_string(e.line()) + ": " + e.message());
  }
  ExperimentConfig config;
  for (const auto& [section, body] : tree) {
    const auto& all = fields();
    if (!body.data().empty() ||
        std::none_of(all.begin(), all.end(), [&](const Field& f) { return f.section == section; })) {
      throw ConfigError(section, body.empty() ? "key outside of any section" : "unknown section");
    }
    for (const auto& [key, value] : body) {
      const std::string name = section + "." + key;
      const auto it = std::find_if(all.begin(), all.end(), [&](const Field& f) {
        return f.section == section && f.key == key;
      });
      if (it == all.end()) throw ConfigError(name, "unknown key");
      try {
        it->parse(config, value.data());
      } catch (const std::invalid_argument& e) {
        throw ConfigError(name, e.what());
      } catch (const std::out_of_range& e) {
        throw ConfigError(name, e.what());
      }
    }
  }
  validate(config);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  auto config = parse_config(text.str());
  if (config.generator == Generator::file && config.file.is_relative()) {
    config.file = path.parent_path() / config.file;
  }
  return config;
}

std::string to_ini(const ExperimentConfig& config) {
  std::ostringstream out;
  std::string current;
  for (const auto& f : fields()) {
    const auto value = f.emit(config);
    if (!value) continue;
    if (current != f.section) {
      out << (current.empty() ? "" : "\n") << '[' << f.section << "]\n";
      current = f.section;
    }
    out << f.key << " = " << *value << '\n';
  }
  return out.str();
}

void validate(const ExperimentConfig& c) {
  require(!c.presets.empty(), "experiment.presets", "no preset given");
  std::set<std::string> seen;
  for (const auto& p : c.presets) {
    const auto& names = preset_names();
    require(std::find(names.begin(), names.end(), p) != names.end(), "experiment.presets",
            "unknown preset '" + p + "' (see 'shrinker-lab presets')");
    require(seen.insert(p).second, "experiment.presets", "preset '" + p + "' listed twice");
  }
  require(!c.output.empty(), "experiment.output", "must not be empty");

  if (c.kind && c.dimension) {
    if (*c.kind == ShrinkerKind::circle) {
      require(*c.dimension == 1, "model.dimension", "the circle has dimension 1");
    } else {
      require(*c.dimension >= 2, "model.dimension", "the round sphere needs dimension >= 2");
    }
  }
  if (c.dimension) require(*c.dimension >= 1 && *c.dimension <= 16, "model.dimension", "must lie in [1, 16]");
  if (c.nodes) require(*c.nodes >= kMinGridNodes, "model.nodes", "must be at least 16");
  if (c.graph_bound) require(*c.graph_bound > 0.0, "model.graph_bound", "must be positive");
  for (const auto& p : c.presets) {
    if (p == "sphere-perturb") {
      require(!c.kind || *c.kind == ShrinkerKind::round_sphere, "model.kind",
              "sphere-perturb needs kind = sphere");
      require(!c.dimension || *c.dimension >= 2, "model.dimension",
              "sphere-perturb needs dimension >= 2");
    }
    if (p == "circle-perturb") {
      require(!c.kind || *c.kind == ShrinkerKind::circle, "model.kind",
              "circle-perturb needs kind = circle");
    }
  }

  if (c.radius) require(*c.radius > 0.0, "initial.radius", "must be positive");
  require(c.generator != Generator::file || !c.file.empty(), "initial.file",
          "generator = file needs a file");
  double total = c.random_amplitude * static_cast<double>(c.random_modes);
  for (const auto* terms : {&c.cos_terms, &c.sin_terms}) {
    if (!*terms) continue;
    for (const auto& t : **terms) {
      require(t.k >= 1, terms == &c.cos_terms ? "initial.cos" : "initial.sin",
              "mode numbers must be >= 1");
      total += std::abs(t.amplitude);
    }
  }
  require(total < 0.5, "initial.cos", "perturbation amplitudes must sum to less than 0.5");
  require(c.random_amplitude >= 0.0, "initial.random_amplitude", "must be non-negative");
  require(c.random_modes <= 64, "initial.random_modes", "at most 64");
  const bool sphere = c.kind.value_or(ShrinkerKind::circle) == ShrinkerKind::round_sphere ||
                      std::find(c.presets.begin(), c.presets.end(), "sphere-perturb") != c.presets.end();
  if (sphere) {
    require(!c.sin_terms || c.sin_terms->empty(), "initial.sin",
            "sine terms are not even across the poles of a profile");
    require(c.center.x == 0.0, "initial.center", "profiles are centred on the axis (x = 0)");
    if (c.control_offset) {
      require(c.control_offset->x == 0.0, "analysis.control_offset",
              "profiles can only be offset along the axis");
    }
  }

  if (c.dtau) require(*c.dtau > 0.0 && *c.dtau <= 0.1, "rescaled.dtau", "must lie in (0, 0.1]");
  require(c.tau_length > 0.0, "rescaled.tau_length", "must be positive");
  require(!c.conv_tol || *c.conv_tol > 0.0, "rescaled.conv_tol", "must be positive");
  if (c.rescaled_snapshot_every) {
    require(*c.rescaled_snapshot_every >= 1, "rescaled.snapshot_every", "must be >= 1");
  }

  require(c.dt > 0.0 && c.dt <= 0.1, "physical.dt", "must lie in (0, 0.1]");
  require(c.stop_area > 0.0, "physical.stop_area", "must be positive");
  require(c.physical_snapshot_every >= 1, "physical.snapshot_every", "must be >= 1");

  require(c.window_fraction > 0.0 && c.window_fraction < 1.0, "extinction.window_fraction",
          "must lie in (0, 1)");
  require(c.exclude_fraction >= 0.0 && c.exclude_fraction < c.window_fraction,
          "extinction.exclude_fraction", "must lie in [0, window_fraction)");
  require(c.max_residual > 0.0, "extinction.max_residual", "must be positive");

  require(c.gap_min > 0.0 && c.gap_min < c.gap_max, "analysis.gap_min",
          "need 0 < gap_min < gap_max");
  require(c.min_samples >= 2, "analysis.min_samples", "must be >= 2");
  require(c.exponential_theta > 0.0 && c.exponential_theta < 0.5, "analysis.exponential_theta",
          "must lie in (0, 1/2)");
  require(c.lambda_bases.size() >= 2, "analysis.lambda_bases", "need at least two sequences");
  for (double b : c.lambda_bases) require(b > 1.0, "analysis.lambda_bases", "bases must exceed 1");
  require(c.tolerance > 0.0, "analysis.tolerance", "must be positive");
  require(c.route_window > 0.0, "analysis.route_window", "must be positive");

  require(c.convergence_nodes.size() >= 2, "convergence.nodes", "need at least two grids");
  for (std::size_t i = 0; i < c.convergence_nodes.size(); ++i) {
    require(c.convergence_nodes[i] >= kMinGridNodes, "convergence.nodes", "grids need >= 16 nodes");
    require(i == 0 || c.convergence_nodes[i] > c.convergence_nodes[i - 1], "convergence.nodes",
            "must be increasing");
  }
  require(c.convergence_dtaus.size() >= 2, "convergence.dtaus", "need at least two steps");
  for (std::size_t i = 0; i < c.convergence_dtaus.size(); ++i) {
    require(c.convergence_dtaus[i] > 0.0, "convergence.dtaus", "must be positive");
    require(i == 0 || c.convergence_dtaus[i] < c.convergence_dtaus[i - 1], "convergence.dtaus",
            "must be decreasing");
  }
  require(c.convergence_tau_length > 0.0, "convergence.tau_length", "must be positive");

  require(!c.density_dimensions.empty(), "density.dimensions", "must not be empty");
  for (int n : c.density_dimensions) require(n >= 1 && n <= 16, "density.dimensions", "must lie in [1, 16]");
  require(c.density_nodes >= kMinGridNodes, "density.nodes", "must be at least 16");
}

}  // namespace shrinker::lab
