#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "rydagg/basis.hpp"
#include "rydagg/config.hpp"

namespace rydagg {

/// How a scenario picks its initial Born-Oppenheimer surface.
struct SurfaceSelection {
  enum class Rule { energy_index, reference_match };
  Rule rule = Rule::energy_index;
  int index = 1;  // 1-based, energy_index rule
  /// Reference vector in the scenario's basis (reference_match rule); the
  /// eigenstate of the mean geometry with the largest overlap wins.
  std::function<Eigen::VectorXd(const ExcitationBasis&)> reference;
  std::string description;
};

struct ScenarioSpec {
  std::string name;
  std::string summary;
  bool dynamical = true;
  AggregateConfig config;
  SurfaceSelection selection;
};

struct ResolvedScenario {
  ScenarioSpec spec;
  AggregateConfig config;    // initial_surface filled in
  double selection_fidelity = 1.0;  // overlap^2 with the reference, 1 for energy_index
};

std::vector<std::string> scenario_names();
/// Throws ConfigError for an unknown name.
ScenarioSpec scenario_spec(const std::string& name);

/// Resolve the initial surface of `spec` at its mean geometry.
ResolvedScenario resolve(const ScenarioSpec& spec);
ResolvedScenario resolve_scenario(const std::string& name);

/// Config file, optionally based on a built-in scenario (`scenario = name`).
/// An explicit `initial_surface` in the file overrides the scenario's rule.
ResolvedScenario resolve_config_file(const std::string& path);

/// Index (0-based) of the eigenvector with the largest |<v|reference>|^2.
int best_match(const Eigen::MatrixXd& eigenvectors, const Eigen::VectorXd& reference,
               double* fidelity = nullptr);

}  // namespace rydagg
