#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "qhd/diff.hpp"
#include "qhd/schrodinger.hpp"

namespace qhd {

// Declarative run description, parsed from a JSON file (schema_version 1).
// Validation failures throw SchemaError with the offending field named.

struct SpaceSpec {
    int dim = 1;
    int n = 0;
    double x_min = 0.0, x_max = 0.0;
    Boundary boundary = Boundary::periodic;
};

struct PotentialSpec {
    std::string kind = "free";
    double omega = 0.0, center = 0.0, kappa = 0.0, height = 0.0, width = 0.0;
};

struct InitialSpec {
    std::string kind = "gaussian";
    GaussianSpec a;       // gaussian / first orbital
    GaussianSpec b;       // second orbital (product / symmetrized)
    int sign = +1;        // symmetrized
    double alpha_im = 0.5;  // coupled_mode_superposition amplitude (imaginary part)
};

struct EvolutionSpec {
    EvolveMethod method = EvolveMethod::split_step_spectral;
    double courant = 0.2;  // dt = courant * dx, one refinement parameter
    double t_eval = 0.5;   // evolve to here before extracting slabs
    int snapshot_stride = 10;
};

struct NoneqSpec {
    int steps = 1000;
    double t_final = 0.0;  // when positive, overrides steps via round(t_final / dt)
    double courant = 0.4;      // mode A: dt = courant * dx
    double dt_factor = 0.05;   // mode B: dt = dt_factor * dx^2 * m / hbar
    double perturbation = 0.0; // relative sine perturbation of the initial density
    double floor_rel = 1e-14;
    int trace_stride = 10;
};

struct PermSpec {
    int snapshots = 3;
    int stride = 20;
    int probes = 100;
};

struct Scenario {
    int schema_version = 1;
    std::string id;
    std::string description;
    std::uint64_t seed = 20250809;
    DiffScheme scheme = DiffScheme::spectral;
    SpaceSpec space;
    PhysParams physics;
    PotentialSpec potential;
    InitialSpec initial;
    EvolutionSpec evolution;
    std::vector<std::string> checks;
    std::vector<int> refinements;
    NoneqSpec noneq;
    PermSpec perm;
    nlohmann::json tolerances;  // per-check named numbers
    std::string output;         // bundle directory name (under the output root)
};

// Names accepted in `checks`: the ten equation ids plus the suite names.
bool is_known_check(const std::string& name);

Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario_file(const std::string& path);

// "a.b.c=value" overrides applied to the raw JSON before parsing; the value
// is parsed as JSON when possible, else taken as a string.
nlohmann::json apply_overrides(nlohmann::json doc, const std::vector<std::string>& overrides);

nlohmann::json scenario_to_json(const Scenario& s);

Grid make_grid(const SpaceSpec& space, int n_override = 0);
Potential make_potential(const PotentialSpec& spec);
QuantumState make_initial_state(const Scenario& s, const Grid& g, const Potential& pot);

}  // namespace qhd
