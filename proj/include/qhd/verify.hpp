#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qhd/madelung.hpp"

namespace qhd {

// One residual per hydrodynamic identity, single- and two-particle.
enum class EquationId {
    continuity_1p,
    hj_1p,
    momentum_1p,
    wave_1p,
    wave_equilibrium_1p,
    continuity_2p,
    hj_2p,
    momentum_2p_1,
    momentum_2p_2,
    wave_2p,
};

const char* to_string(EquationId eq);
std::optional<EquationId> equation_from_string(std::string_view name);
bool is_two_body(EquationId eq);

struct AssemblyOptions {
    DiffScheme scheme = DiffScheme::spectral;  // wavefunction-smooth fields
    // printed_forms assembles the conventionally printed variants (the 1/m
    // stress-divergence factor and the equal-mass velocity advection terms)
    // instead of the forms derived from the Hamilton-Jacobi layer.
    bool printed_forms = false;
    double interior_rel = 1e-10;  // residual norms restricted to rho above this (rel max)
    int halo = 2;
};

struct ResidualNorms {
    double l1 = 0.0, l2 = 0.0, linf = 0.0;
};

struct ResidualReport {
    EquationId eq{};
    ResidualNorms norms;
    int n = 0;
    double dx = 0.0, dt = 0.0;
    double interior_fraction = 0.0;
    std::string scenario_id;
    DiffScheme scheme = DiffScheme::spectral;
    bool printed_forms = false;
};

// LHS - RHS pointwise; no masking applied to the returned field.
RealField residual_field(EquationId eq, const HydroSlabs& s, const Potential& pot,
                         const AssemblyOptions& opts = {});
RealField residual_field(EquationId eq, const TwoBodySlabs& s, const Potential& pot,
                         const AssemblyOptions& opts = {});

// Cells excluded from residual norms: density below interior_rel (center
// slab), node cells of any slab, dilated by `halo`. Phase-sensitive
// equations additionally exclude unwrap-seam cells.
MaskField interior_exclusion(const HydroSlabs& s, const AssemblyOptions& opts,
                             bool phase_sensitive = false);
MaskField interior_exclusion(const TwoBodySlabs& s, const AssemblyOptions& opts,
                             bool phase_sensitive = false);

ResidualReport residual(EquationId eq, const HydroSlabs& s, const Potential& pot,
                        const AssemblyOptions& opts = {});
ResidualReport residual(EquationId eq, const TwoBodySlabs& s, const Potential& pot,
                        const AssemblyOptions& opts = {});

// Velocity-uniqueness probe: the equilibrium wave-equation residual with the
// extracted v, and again with v' = v + c/rho (the divergence-free addition,
// d_x(rho (v'-v)) = 0). Returns {clean, corrupted}.
std::pair<ResidualReport, ResidualReport> velocity_uniqueness_probe(const HydroSlabs& s,
                                                                    const Potential& pot,
                                                                    double c,
                                                                    const AssemblyOptions& opts = {});

// Inter-particle cross-term group vs the full two-body wave-equation RHS.
struct ClassicalityMetric {
    double cross_norm = 0.0;
    double total_norm = 0.0;
    double ratio = 0.0;
};
ClassicalityMetric classicality(const TwoBodySlabs& s, const AssemblyOptions& opts = {});

// Velocity-equation residuals derived from the two-body Hamilton-Jacobi
// layer, or the literal printed forms (whose advection term and mass factor
// hold for equal masses only). Used by the discrepancy report.
RealField velocity_equation_residual(int which, const TwoBodySlabs& s, const Potential& pot,
                                     bool literal, const AssemblyOptions& opts = {});

struct ConvergenceRow {
    int n = 0;
    double dx = 0.0, dt = 0.0;
    ResidualNorms norms;
    double observed_order_l2 = 0.0;  // vs previous level; 0 for the first row
    bool monotone = true;            // l2 decreased vs previous level
};

// Orders from successive norm ratios; non-monotone pairs are flagged, never
// averaged away.
std::vector<ConvergenceRow> convergence_table(const std::vector<ResidualReport>& by_level);

}  // namespace qhd
