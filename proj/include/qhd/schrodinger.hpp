#pragma once

#include <complex>

#include "qhd/potential.hpp"

namespace qhd {

// Wavefunction snapshot. Builders return unit-norm states (cell-weighted L2);
// evolution checks the norm and never renormalizes behind the caller's back.
struct QuantumState {
    ComplexField psi;
    double t = 0.0;
    PhysParams params;
};

struct GaussianSpec {
    double x0 = 0.0;
    double sigma = 1.0;
    double k0 = 0.0;
};

QuantumState make_gaussian(const Grid& g, const PhysParams& p, const GaussianSpec& spec);
// Exact ground state of `harmonic` (1D) or `coupled_harmonic` (2D, any masses).
QuantumState make_ho_ground(const Grid& g, const PhysParams& p, const Potential& pot);
QuantumState make_product(const Grid& g, const PhysParams& p, const GaussianSpec& a,
                          const GaussianSpec& b);
// (phi(x1) chi(x2) + sign phi(x2) chi(x1)) / norm, sign = +1 or -1.
QuantumState make_symmetrized(const Grid& g, const PhysParams& p, const GaussianSpec& a,
                              const GaussianSpec& b, int sign);
QuantumState make_custom(ComplexField psi, double t, const PhysParams& p);
// Equal-mass coupled-oscillator eigenmode superposition: ground state plus
// `rel_amplitude` times the first excited relative mode. A non-real amplitude
// keeps the density node-free.
QuantumState make_coupled_mode_superposition(const Grid& g, const PhysParams& p, double omega,
                                             double kappa, std::complex<double> rel_amplitude);

enum class EvolveMethod { split_step_spectral, crank_nicolson };

struct EvolveOptions {
    EvolveMethod method = EvolveMethod::split_step_spectral;
    // 2 = plain one-step scheme; 4 = symmetric triple-jump composition.
    int composition_order = 2;
    double norm_abort_tol = 1e-8;
};

QuantumState evolve(const QuantumState& s, const Potential& pot, double dt, int n_steps,
                    const EvolveOptions& opts = {});

struct StateTriplet {
    QuantumState prev, curr, next;
    double dt = 0.0;
};

// States at t-dt, t, t+dt. The backward leg runs the time-reversed scheme;
// both legs use the order-4 composition so second-time-difference residuals
// keep their centered O(dt^2) accuracy.
StateTriplet state_triplet(const QuantumState& s, const Potential& pot, double dt,
                           const EvolveOptions& opts = {});
TimeSlabs density_slabs(const QuantumState& s, const Potential& pot, double dt,
                        const EvolveOptions& opts = {});

RealField density(const QuantumState& s);
double state_norm(const QuantumState& s);
double energy_expectation(const QuantumState& s, const Potential& pot);

}  // namespace qhd
