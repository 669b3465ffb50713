#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "shrinker/geometry.hpp"

namespace shrinker {

enum class RunStatus { running, converged, graph_overflow, step_limit };

std::string_view to_string(RunStatus status);

/// Diagnostics of one rescaled-flow state.
struct StepRecord {
  double tau = 0.0;
  double energy = 0.0;
  double gap = 0.0;          // energy - energy floor
  double grad_norm = 0.0;    // ||grad E||_{L^2(Sigma)}
  double dissipation = 0.0;  // int |H + x^perp/2|^2 rho
  double vdot_norm = 0.0;    // ||dv/dtau||_{L^2(Sigma)}
  double max_abs_v = 0.0;
  double gamma = 0.0;        // dissipation-chain constant of this state
};

/// A rescaled-flow run: scalar diagnostics at every step, sections at a stride.
struct Trajectory {
  ModelPtr model;
  double dtau = 0.0;
  double energy_floor = 0.0;
  std::vector<StepRecord> steps;
  std::vector<NormalSection> snapshots;       // ordered by tau
  std::vector<std::size_t> snapshot_steps;    // index into steps
  RunStatus status = RunStatus::running;
  std::optional<std::size_t> overflow_node;
  std::optional<double> overflow_tau;  // first tau at which the tube was left

  const NormalSection& final_state() const { return snapshots.back(); }
};

}  // namespace shrinker
