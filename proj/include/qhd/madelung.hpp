#pragma once

#include <optional>

#include "qhd/schrodinger.hpp"

namespace qhd {

// Eq-level form switch for the quantum part of the stress field: the
// consistent (gradient-squared) form vs the literal printed one, kept for
// discrepancy reports.
enum class PiForm { quantum_stress, printed };

struct ExtractOptions {
    DiffScheme scheme = DiffScheme::spectral;
    double eps_node_rel = 1e-12;  // node threshold relative to max(rho)
    PiForm pi_form = PiForm::quantum_stress;
};

// Single-particle hydrodynamic fields. Ratio-derived fields (v, Q, Pi) are
// zeroed on node_mask cells; S is phase-unwrapped along grid lines from the
// density maximum and s_unreliable marks cells whose unwrap path crossed a
// node cell.
struct HydroFields {
    RealField rho, S, v, Q, Pi;
    ComplexField psi;  // the source state; phase-difference time derivatives
    MaskField node_mask;
    MaskField s_unreliable;
    double eps_node = 0.0;
    double t = 0.0;
    PhysParams params;
};

struct TwoBodyFields {
    RealField rho, S, v1, v2, Q, V;
    ComplexField psi;
    MaskField node_mask;
    MaskField s_unreliable;
    double eps_node = 0.0;
    double t = 0.0;
    PhysParams params;
};

HydroFields extract_1p(const QuantumState& s, const Potential& pot,
                       const ExtractOptions& opts = {},
                       std::optional<std::size_t> anchor = std::nullopt);
TwoBodyFields extract_2p(const QuantumState& s, const Potential& pot,
                         const ExtractOptions& opts = {},
                         std::optional<std::size_t> anchor = std::nullopt);

// Fields at t-dt, t, t+dt on one trajectory. The +- phases are unwrapped
// about the center anchor cell and branch-aligned to the center so d_t S is
// meaningful.
struct HydroSlabs {
    HydroFields prev, curr, next;
    double dt = 0.0;
};
struct TwoBodySlabs {
    TwoBodyFields prev, curr, next;
    double dt = 0.0;
};

HydroSlabs extract_slabs_1p(const QuantumState& s, const Potential& pot, double dt,
                            const ExtractOptions& eopts = {}, const EvolveOptions& vopts = {});
TwoBodySlabs extract_slabs_2p(const QuantumState& s, const Potential& pot, double dt,
                              const ExtractOptions& eopts = {}, const EvolveOptions& vopts = {});

// (d_t + v d_x) v from extracted velocity slabs; gradients of the bare
// velocity ratio always use compact sanitized stencils.
RealField material_derivative(const HydroSlabs& slabs);

// Linf of (1/m2) d2 v1 - (1/m1) d1 v2 off the node mask (2-cell halo).
// interior_rel > 0 additionally excludes cells with rho below that fraction
// of the peak: evolved multi-mode states carry under-resolved phase beats in
// the deep tails, where the pointwise v ratio is not a resolved field.
double mixed_velocity_residual(const TwoBodyFields& f, double interior_rel = 0.0);

// Q evaluated the two printed ways (sqrt-rho form and the bracketed-rho
// form), for the form-agreement check; `scheme` differentiates rho.
RealField quantum_potential_sqrt_form(const RealField& rho, double hbar, double mass,
                                      int axis, DiffScheme scheme);
RealField quantum_potential_bracket_form(const RealField& rho, double hbar, double mass,
                                         int axis, DiffScheme scheme);

// Compact fd4 derivative with node cells zeroed first. Ratio fields carry
// unbounded round-off in deep tails; a global transform would smear it over
// the whole domain while a local stencil keeps it inside the mask halo.
RealField ratio_diff(const RealField& f, const MaskField& node_mask, int axis, int order);

}  // namespace qhd
