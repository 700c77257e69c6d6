#pragma once

#include <vector>

#include "qhd/potential.hpp"

namespace qhd {

enum class NoneqMode { guided_transport, self_consistent };

// Density carried as w = ln rho, so rho = e^w stays positive by
// representation. Mass is monitored, never silently renormalized.
struct NoneqState {
    RealField w;
    RealField v;  // velocity field, self_consistent mode only
    double t = 0.0;
    NoneqMode mode = NoneqMode::guided_transport;
};

NoneqState noneq_from_density(const RealField& rho, NoneqMode mode, double floor_rel = 1e-14);
RealField noneq_density(const NoneqState& s);
double noneq_mass(const NoneqState& s);  // cell-weighted sum of e^w

// One guided-transport step of d_t w = -v d_x w - d_x v with the guidance
// velocity frozen over the step: monotone-clipped cubic semi-Lagrangian
// advection plus a trapezoidal compression source. Throws on CFL violation
// (|v| dt / dx > 1).
NoneqState step_guided(const NoneqState& s, const RealField& guidance_v, double dt);

// One explicit Heun step of the coupled system
//   d_t w = -v d_x w - d_x v
//   d_t v = -v d_x v - (1/m) d_x(V + Q[e^w]),
// Q recomputed from w at every stage. Throws on CFL violation or when the
// stage increment |dw| exceeds 2 anywhere (stiffness guard).
NoneqState step_self_consistent(const NoneqState& s, const Potential& pot,
                                const PhysParams& params, double dt);

struct DeviationEntry {
    double time = 0.0;
    double l1 = 0.0;
    double linf = 0.0;
    double ratio = 0.0;  // L1 relative to the trace's first nonzero L1
};

struct DeviationTrace {
    std::vector<DeviationEntry> entries;
    double baseline_l1 = 0.0;

    void append(DeviationEntry e) {
        if (baseline_l1 == 0.0 && e.l1 > 0.0) baseline_l1 = e.l1;
        e.ratio = baseline_l1 > 0.0 ? e.l1 / baseline_l1 : 0.0;
        entries.push_back(e);
    }
};

// L1/Linf distance between e^w and a reference density at matching times.
DeviationEntry deviation(const NoneqState& s, const RealField& rho_ref, double t_ref);

}  // namespace qhd
