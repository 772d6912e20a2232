#include "rydagg/scenario.hpp"

#include <fstream>
#include <sstream>

#include "rydagg/decomposition.hpp"
#include "rydagg/errors.hpp"
#include "rydagg/hamiltonian.hpp"
#include "rydagg/spectrum.hpp"

namespace rydagg {

namespace {

constexpr double kLattice = 5.0;      // um
constexpr double kDislocation = 2.5;  // um

AggregateConfig chain_config(std::string name, std::vector<double> positions) {
  AggregateConfig c;
  c.name = std::move(name);
  c.n_atoms = static_cast<int>(positions.size());
  c.n_excitations = 2;
  c.positions_um = std::move(positions);
  return c;
}

ExcitonSpectrum spectrum_of(const AggregateConfig& c) {
  const ExcitationBasis basis(c.n_atoms, c.n_excitations);
  return diagonalize(build_hamiltonian(basis, c.positions(), c.couplings()), c.positions());
}

// k-th (1-based) bi-exciton of a reference configuration.
std::function<Eigen::VectorXd(const ExcitationBasis&)> eigenstate_of(AggregateConfig reference,
                                                                      int k) {
  return [reference = std::move(reference), k](const ExcitationBasis&) {
    return Eigen::VectorXd(spectrum_of(reference).vector(k - 1));
  };
}

// phi_A(k_a) (x) phi_B(k_b) of the isolated sub-chains of `config`.
std::function<Eigen::VectorXd(const ExcitationBasis&)> product_of(AggregateConfig config,
                                                                   std::vector<int> a_atoms, int k_a,
                                                                   int k_b) {
  return [config = std::move(config), a_atoms = std::move(a_atoms), k_a,
          k_b](const ExcitationBasis& basis) {
    AggregateConfig c = config;
    c.partition_a = a_atoms;
    const Partition p = c.partition();
    auto single = [&](const std::vector<int>& atoms) {
      Eigen::VectorXd r(static_cast<Eigen::Index>(atoms.size()));
      for (std::size_t i = 0; i < atoms.size(); ++i) r[i] = c.positions_um[atoms[i]];
      return diagonalize(build_hamiltonian(ExcitationBasis(static_cast<int>(atoms.size()), 1), r,
                                           c.couplings()));
    };
    return tensor_embed(single(p.a).vector(k_a - 1), single(p.b).vector(k_b - 1), p, basis);
  };
}

ScenarioSpec make_spec(const std::string& name) {
  const int n = 5;
  ScenarioSpec s;
  s.name = name;
  if (name == "homog5") {
    s.summary = "regular 5-atom chain, bi-exciton spectrum";
    s.dynamical = false;
    s.config = chain_config(name, regular_chain(n, kLattice));
  } else if (name == "disloc5") {
    s.summary = "5-atom chain with a dislocation at the end, bi-exciton decomposition";
    s.dynamical = false;
    s.config = chain_config(name, dislocated_end_chain(n, kLattice, kDislocation));
  } else if (name == "fixed-surface" || name == "fixed-surface-attractive") {
    const bool repulsive = name == "fixed-surface";
    s.summary = repulsive ? "regular chain on the all-same-sign (repulsive) surface"
                          : "regular chain on the lowest (attractive) surface";
    s.config = chain_config(name, regular_chain(n, kLattice));
    s.config.mode = Mode::fixed_surface;
    s.config.freeze_coefficients = true;
    s.config.sigma_um = 0.0;
    s.config.n_traj = 1;
    if (repulsive) {
      s.selection.rule = SurfaceSelection::Rule::reference_match;
      s.selection.reference = [](const ExcitationBasis& b) {
        return Eigen::VectorXd(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(b.size())).normalized());
      };
      s.selection.description = "all coefficients equal and positive";
    } else {
      s.selection.index = 1;
      s.selection.description = "lowest surface";
      // The first close approach and rebound happens near t = 3.5 us.
      s.config.t_final_us = 5.0;
    }
  } else if (name == "collision") {
    s.summary = "two exciton-motion pulses launched from dislocations at both ends";
    s.config = chain_config(name, doubly_dislocated_chain(n, kLattice, kDislocation));
    s.selection.rule = SurfaceSelection::Rule::reference_match;
    s.selection.reference = [](const ExcitationBasis& b) {
      // Top homogeneous-chain state with the centre atom's amplitude removed.
      Eigen::VectorXd v =
          spectrum_of(chain_config("homog5", regular_chain(5, kLattice))).vector(9);
      for (std::size_t st : b.states_with(2)) v[static_cast<Eigen::Index>(st)] = 0.0;
      return Eigen::VectorXd(v.normalized());
    };
    s.selection.description = "homog5 zeta_10 with suppressed centre atom";
  } else if (name == "gate-a" || name == "gate-b") {
    const bool reflect = name == "gate-a";
    s.summary = reflect ? "pulse on atoms 4-5 meeting gate exciton phi_2 on atoms 1-3"
                        : "pulse on atoms 4-5 meeting gate exciton phi_3 on atoms 1-3";
    s.config = chain_config(name, dislocated_end_chain(n, kLattice, kDislocation));
    s.selection.rule = SurfaceSelection::Rule::reference_match;
    s.selection.reference = product_of(s.config, {1, 2, 3}, reflect ? 2 : 3, 2);
    s.selection.description = reflect ? "phi^(3)_2 (x) phi^(2)_2 (zeta_9 type)"
                                      : "phi^(3)_3 (x) phi^(2)_2 (zeta_10 type)";
  } else if (name == "nonadiabatic") {
    s.summary = "zeta_9-like state on the doubly dislocated chain";
    s.config = chain_config(name, doubly_dislocated_chain(n, kLattice, kDislocation));
    s.selection.rule = SurfaceSelection::Rule::reference_match;
    s.selection.reference = eigenstate_of(chain_config("homog5", regular_chain(n, kLattice)), 9);
    s.selection.description = "homog5 zeta_9";
  } else {
    throw ConfigError("unknown scenario '" + name + "'", "scenario");
  }
  return s;
}

}  // namespace

std::vector<std::string> scenario_names() {
  return {"homog5",    "disloc5", "fixed-surface", "fixed-surface-attractive",
          "collision", "gate-a",  "gate-b",        "nonadiabatic"};
}

ScenarioSpec scenario_spec(const std::string& name) { return make_spec(name); }

int best_match(const Eigen::MatrixXd& eigenvectors, const Eigen::VectorXd& reference,
               double* fidelity) {
  const Eigen::VectorXd overlaps = (eigenvectors.transpose() * reference).cwiseAbs2();
  Eigen::Index best = 0;
  overlaps.maxCoeff(&best);
  if (fidelity) *fidelity = overlaps[best] / reference.squaredNorm();
  return static_cast<int>(best);
}

ResolvedScenario resolve(const ScenarioSpec& spec) {
  ResolvedScenario r{spec, spec.config, 1.0};
  if (spec.selection.rule == SurfaceSelection::Rule::energy_index) {
    r.config.initial_surface = spec.selection.index;
  } else {
    const ExcitationBasis basis(r.config.n_atoms, r.config.n_excitations);
    const Eigen::VectorXd reference = spec.selection.reference(basis);
    if (reference.size() != static_cast<Eigen::Index>(basis.size())) {
      throw ConfigError("scenario '" + spec.name +
                            "' picks its surface for N=5, q=2; set initial_surface explicitly",
                        "initial_surface");
    }
    r.config.initial_surface =
        best_match(spectrum_of(r.config).vectors, reference, &r.selection_fidelity) + 1;
  }
  r.config.validate();
  return r;
}

ResolvedScenario resolve_scenario(const std::string& name) { return resolve(scenario_spec(name)); }

ResolvedScenario resolve_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream text;
  text << in.rdbuf();

  std::istringstream scan(text.str());
  const std::string base_name = scenario_key(scan);
  ScenarioSpec spec;
  if (base_name.empty()) {
    spec.name = "custom";
    spec.summary = "configuration file " + path;
    spec.config.positions_um = regular_chain(spec.config.n_atoms, kLattice);
  } else {
    spec = scenario_spec(base_name);
  }

  std::istringstream body(text.str());
  AggregateConfig base = spec.config;
  base.initial_surface = 1;  // placeholder so validation passes before selection
  spec.config = parse_config(body, base);

  std::istringstream again(text.str());
  bool explicit_surface = false;
  for (std::string line; std::getline(again, line);) {
    line = line.substr(0, line.find('#'));
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t") + 1);
    if (key == "initial_surface") explicit_surface = true;
  }
  if (explicit_surface || base_name.empty()) {
    spec.selection = SurfaceSelection{SurfaceSelection::Rule::energy_index,
                                      spec.config.initial_surface, {}, "from config file"};
  }
  return resolve(spec);
}

}  // namespace rydagg
