#pragma once

#include <span>

#include "qhd/verify.hpp"

namespace qhd {

// Index interchange (x1, x2) -> (x2, x1); requires identical axes.
struct SwapMap {
    Grid2D grid;
    static SwapMap create(const Grid2D& g) {
        if (!(g.axis1 == g.axis2))
            throw std::invalid_argument("SwapMap: axes must be identical");
        return SwapMap{g};
    }
};

RealField swap_axes(const RealField& f, const SwapMap& map);
ComplexField swap_axes(const ComplexField& f, const SwapMap& map);
MaskField swap_axes(const MaskField& f, const SwapMap& map);

// Linear operator acting on a density field with the velocity data frozen:
//   L rho = sum_i [ d_i^2(v_i^2 rho) - d_i( rho (d_t + v_i d_i) v_i ) ]
//         + [ d1 v1 d2(rho v2) + v1 d1 d2(rho v2) + (1 <-> 2) ].
// Velocity slabs are captured by value; the time derivative inside uses the
// same centered difference as the residual engine.
class LambdaOperator {
  public:
    LambdaOperator(const TwoBodySlabs& slabs, const AssemblyOptions& opts = {});

    RealField apply(const RealField& rho) const;
    const Grid& grid() const { return v1_.grid(); }
    const MaskField& node_mask() const { return mask_; }
    const AssemblyOptions& options() const { return opts_; }

  private:
    RealField v1_, v2_;        // center-time velocities (sanitized)
    RealField v1_sq_, v2_sq_;  // pointwise squares
    RealField a1_, a2_;        // (d_t + v_i d_i) v_i per axis
    RealField d1v1_, d2v2_;    // own-axis velocity gradients
    MaskField mask_;
    AssemblyOptions opts_;
};

// max over probes of |swap(L rho) - L(swap rho)|_Linf / |L rho|_Linf,
// measured off the (swap-symmetrized, dilated) node mask.
double lambda_symmetry_defect(const LambdaOperator& op, std::span<const RealField> probes,
                              const SwapMap& map);

// Deterministic smooth probe fields for linearity/symmetry trials.
std::vector<RealField> random_probe_densities(const Grid& g, int count, std::uint64_t seed);

struct BornPermutationEntry {
    double t = 0.0;
    double delta_linf = 0.0;  // |rho - swap rho|
    double delta_l2 = 0.0;
    double rho_linf = 0.0;
    double eq21_linf = 0.0;  // |(d_t^2 - Lambda)(rho - swap rho)| off mask
    double eq21_l2 = 0.0;
};

struct BornPermutationReport {
    std::vector<BornPermutationEntry> entries;
    double max_delta_linf = 0.0;
    double max_eq21_linf = 0.0;
};

// Track the swap asymmetry of the density along an evolution, together with
// the wave-operator residual of the asymmetry itself.
BornPermutationReport born_permutation_test(const QuantumState& initial, const Potential& pot,
                                            double dt, int snapshots, int stride,
                                            const ExtractOptions& eopts = {},
                                            const EvolveOptions& vopts = {},
                                            const AssemblyOptions& aopts = {});

}  // namespace qhd
