#pragma once

// The built-in presets and the pipeline they share:
//
//   initial curve -> physical flow -> extinction point (x0, T)
//     -> recentred section v0 over the model -> neutral shooting
//     -> rescaled flow to convergence -> Lojasiewicz fit, drift bounds, decay
//
// Every preset writes into its own directory: trajectory tables (CSV), a
// key = value summary, and SVG plots when enabled.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "shrinker/analysis.hpp"
#include "shrinker/error.hpp"
#include "shrinker/flow.hpp"
#include "shrinker/lab/config.hpp"
#include "shrinker/lab/output.hpp"
#include "shrinker/physical.hpp"

namespace shrinker::lab {

/// A library error annotated with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

ModelPtr build_model(const ResolvedModel& model);

/// Initial curve or profile from the [initial] section (Fourier generator,
/// seeded random modes, or a point-list file).
DiscreteSurface initial_surface(const ExperimentConfig& config, const ResolvedModel& model);

struct Pipeline {
  ModelPtr model;
  std::optional<DiscreteSurface> initial;
  PhysicalTrajectory physical;
  ExtinctionEstimate extinction;
  NormalSection start;  // recentred, rescaled initial section at tau0 = -log T
  std::optional<ShootingResult> shooting;
  Trajectory rescaled;
  /// max ||v(tau) - v'|| over the last unit of tau, v' the final state.
  double final_distance = 0.0;
  /// ||v' - projection of v' onto the unstable modes||: distance to a round limit.
  double roundness = 0.0;
  std::optional<LojasiewiczFit> fit;
  std::string fit_skipped;  // reason when fit is empty
  std::optional<BoundsReport> bounds;
  std::optional<DecayReport> decay;
  std::optional<RouteComparison> route;
};

/// Runs the whole pipeline. Each stage rethrows library errors as StageError.
Pipeline run_pipeline(const ExperimentConfig& config, const ResolvedModel& model,
                      bool compare_route = true);

/// Physical flow plus extinction fit of the configured initial data.
std::pair<PhysicalTrajectory, ExtinctionEstimate> run_physical_stage(
    const ExperimentConfig& config, const DiscreteSurface& initial);

struct ExperimentResult {
  std::string preset;
  int status = 0;  // 0 success, 2 runtime error or failed verdict
  std::string message;
  std::filesystem::path directory;
  Summary summary;
};

/// Runs one preset into directory/<preset>. Never throws for runtime failures;
/// they are reported through status and message.
ExperimentResult run_preset(const ExperimentConfig& config, const std::string& preset,
                            const std::filesystem::path& directory);

/// Runs every configured preset, up to jobs at a time. Results keep the
/// configured order.
std::vector<ExperimentResult> run_experiment(const ExperimentConfig& config,
                                             const std::filesystem::path& directory,
                                             unsigned jobs = 1);

}  // namespace shrinker::lab
