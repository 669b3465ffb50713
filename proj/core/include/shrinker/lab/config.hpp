#pragma once

// Experiment configuration: a strict INI schema with nested sections.
//
//   [experiment] presets, seed, output, plots
//   [model]      kind (circle | sphere), dimension, nodes, graph_bound
//   [initial]    generator (fourier | file), radius, center, cos, sin, file,
//                random_modes, random_amplitude
//   [rescaled]   dtau, tau_length, conv_tol, scheme (semi-implicit | rk4),
//                snapshot_every, shoot
//   [physical]   dt, stop_area, snapshot_every
//   [extinction] window_fraction, exclude_fraction, max_residual
//   [analysis]   gap_min, gap_max, min_samples, exponential_theta, lambda_bases,
//                tolerance, control_offset, route_window
//   [convergence] nodes, dtaus, tau_length
//   [density]    dimensions, nodes
//
// Lists are comma-separated. Fourier terms are "k:amplitude" pairs giving the
// radius R (1 + sum a_k cos k theta + sum b_k sin k theta) about center.
// Keys left out of [model] and [initial] take defaults that depend on the
// preset: the sphere preset uses the round sphere with n = 2.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "shrinker/flow.hpp"
#include "shrinker/geometry.hpp"

namespace shrinker::lab {

/// Parse or validation failure; key() names the offending entry as section.key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

struct FourierTerm {
  int k = 0;
  double amplitude = 0.0;
  bool operator==(const FourierTerm&) const = default;
};

enum class Generator { fourier, file };

struct ExperimentConfig {
  // [experiment]
  std::vector<std::string> presets = {"circle-perturb"};
  std::uint64_t seed = 0;
  std::filesystem::path output = "shrinker-lab-out";
  bool plots = true;

  // [model]
  std::optional<ShrinkerKind> kind;
  std::optional<int> dimension;
  std::optional<std::size_t> nodes;
  std::optional<double> graph_bound;

  // [initial]
  Generator generator = Generator::fourier;
  std::optional<double> radius;  // defaults to the model radius
  Vec2 center;
  std::optional<std::vector<FourierTerm>> cos_terms;
  std::optional<std::vector<FourierTerm>> sin_terms;
  std::filesystem::path file;
  std::size_t random_modes = 0;     // extra seeded modes k = 2..random_modes + 1
  double random_amplitude = 0.0;    // uniform in [-a, a]

  // [rescaled]
  std::optional<double> dtau;
  double tau_length = 40.0;  // run length after the start tau
  std::optional<double> conv_tol;  // default 1e-8 on circles, 1e-5 on spheres
  TimeScheme scheme = TimeScheme::semi_implicit;
  std::optional<std::size_t> rescaled_snapshot_every;  // default: every 0.01 in tau
  bool shoot = true;

  // [physical]
  double dt = 1e-4;
  double stop_area = 1e-4;
  std::size_t physical_snapshot_every = 10;

  // [extinction]
  double window_fraction = 0.3;
  double exclude_fraction = 0.05;
  double max_residual = 1e-3;

  // [analysis]
  double gap_min = 1e-10;
  double gap_max = 1e-3;
  std::size_t min_samples = 50;
  double exponential_theta = 0.45;
  std::vector<double> lambda_bases = {2.0, 3.0};
  double tolerance = 1e-3;
  std::optional<Vec2> control_offset;  // default 0.1 off centre, along the axis for spheres
  double route_window = 2.0;

  // [convergence]
  std::vector<std::size_t> convergence_nodes = {128, 256, 512, 1024};
  std::vector<double> convergence_dtaus = {4e-3, 2e-3, 1e-3};
  double convergence_tau_length = 1.0;

  // [density]
  std::vector<int> density_dimensions = {1, 2, 3, 4};
  std::size_t density_nodes = 512;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Settings of one preset with every preset-dependent default filled in.
struct ResolvedModel {
  ShrinkerKind kind = ShrinkerKind::circle;
  int dimension = 1;
  std::size_t nodes = 512;
  std::optional<double> graph_bound;
  double dtau = 1e-4;
  double conv_tol = 1e-8;
  std::vector<FourierTerm> cos_terms;
  std::vector<FourierTerm> sin_terms;
  Vec2 control_offset;
};

/// Built-in preset names in listing order, and a one-line description of each.
const std::vector<std::string>& preset_names();
std::string preset_description(const std::string& preset);

ResolvedModel resolve(const ExperimentConfig& config, const std::string& preset);

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// INI text that parse_config maps back to an equal config.
std::string to_ini(const ExperimentConfig& config);

/// Throws ConfigError on out-of-range values or inconsistent settings.
void validate(const ExperimentConfig& config);

}  // namespace shrinker::lab
