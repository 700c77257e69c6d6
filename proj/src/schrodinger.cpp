#include "qhd/schrodinger.hpp"

#include <cmath>
#include <numbers>
#include <map>
#include <sstream>

#include "fft_detail.hpp"
#include "qhd/errors.hpp"

namespace qhd {

namespace {

using cplx = std::complex<double>;
constexpr cplx I{0.0, 1.0};

void normalize(ComplexField& psi) {
    const double n = l2_norm(psi, true);
    if (!(n > 1e-12)) throw std::invalid_argument("state normalization: zero norm");
    const double inv = 1.0 / n;
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= inv;
}

// Eight points across the +-sigma core of the packet.
void check_resolution(const Grid1D& ax, double sigma) {
    if (!(sigma > 0)) throw std::invalid_argument("gaussian: sigma must be positive");
    if (sigma < 4.0 * ax.dx())
        throw std::invalid_argument("gaussian: sigma under-resolved on this grid");
}

cplx gaussian_amplitude(double x, const GaussianSpec& s) {
    const double u = x - s.x0;
    return std::exp(cplx(-u * u / (4.0 * s.sigma * s.sigma), s.k0 * x));
}

std::vector<double> axis_wavenumbers(const Grid1D& ax) {
    const double k0 = 2.0 * std::numbers::pi / ax.length();
    std::vector<double> k(static_cast<std::size_t>(ax.n));
    for (int j = 0; j < ax.n; ++j) {
        const int m = j <= ax.n / 2 ? j : j - ax.n;
        k[static_cast<std::size_t>(j)] = k0 * m;
    }
    return k;
}

void fft_all_axes(ComplexField& f, int sign) {
    const Grid& g = f.grid();
    if (g.dim() == 1) {
        detail::fft_axis(f.data(), g.extent(0), 1, 1, g.extent(0), sign);
        return;
    }
    const int n1 = g.extent(0), n2 = g.extent(1);
    detail::fft_axis(f.data(), n2, n1, 1, n2, sign);  // along x2
    detail::fft_axis(f.data(), n1, n2, n2, 1, sign);  // along x1
}

// ---- split-step spectral ---------------------------------------------------

class SplitStepKernel {
  public:
    SplitStepKernel(const Grid& g, const PhysParams& p, const Potential& pot)
        : grid_(g), params_(p), pot_(&pot) {
        for (int a = 0; a < g.dim(); ++a) {
            auto k = axis_wavenumbers(g.axis(a));
            const double c = p.hbar / (2.0 * p.mass_for_axis(g.dim(), a));
            for (auto& v : k) v = c * v * v;  // kinetic phase rate per unit dt
            kin_rate_.push_back(std::move(k));
        }
        v_base_ = pot.sample_base(g, p);
    }

    // One Strang step of size dt starting at time t (dt may be negative).
    void step(ComplexField& psi, double t, double dt) const {
        apply_potential_phase(psi, t + 0.5 * dt, 0.5 * dt);
        fft_all_axes(psi, -1);
        apply_kinetic_phase(psi, dt);
        fft_all_axes(psi, +1);
        apply_potential_phase(psi, t + 0.5 * dt, 0.5 * dt);
    }

  private:
    // Phase tables are cached per step size; time-dependent potentials
    // bypass the potential-phase cache.
    void apply_potential_phase(ComplexField& psi, double t_sample, double tau) const {
        if (pot_->kind() == Potential::Kind::free && !pot_->time_dependent()) return;
        const double c = -tau / params_.hbar * pot_->multiplier(t_sample);
        if (pot_->time_dependent()) {
            for (std::size_t i = 0; i < psi.size(); ++i)
                psi[i] *= std::polar(1.0, c * v_base_[i]);
            return;
        }
        auto it = pot_phase_.find(c);
        if (it == pot_phase_.end()) {
            std::vector<cplx> tab(psi.size());
            for (std::size_t i = 0; i < psi.size(); ++i)
                tab[i] = std::polar(1.0, c * v_base_[i]);
            it = pot_phase_.emplace(c, std::move(tab)).first;
        }
        const auto& tab = it->second;
        for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= tab[i];
    }

    void apply_kinetic_phase(ComplexField& psi, double dt) const {
        auto it = kin_phase_.find(dt);
        if (it == kin_phase_.end()) {
            const double inv_n = 1.0 / static_cast<double>(grid_.size());
            std::vector<cplx> tab(psi.size());
            if (grid_.dim() == 1) {
                const auto& r = kin_rate_[0];
                for (std::size_t i = 0; i < tab.size(); ++i)
                    tab[i] = std::polar(inv_n, -dt * r[i]);
            } else {
                const int n1 = grid_.extent(0), n2 = grid_.extent(1);
                const auto& r1 = kin_rate_[0];
                const auto& r2 = kin_rate_[1];
                for (int i1 = 0; i1 < n1; ++i1)
                    for (int i2 = 0; i2 < n2; ++i2)
                        tab[static_cast<std::size_t>(i1) * n2 + i2] = std::polar(
                            inv_n, -dt * (r1[static_cast<std::size_t>(i1)] +
                                          r2[static_cast<std::size_t>(i2)]));
            }
            it = kin_phase_.emplace(dt, std::move(tab)).first;
        }
        const auto& tab = it->second;
        for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= tab[i];
    }

    Grid grid_;
    PhysParams params_;
    const Potential* pot_;
    std::vector<std::vector<double>> kin_rate_;
    RealField v_base_;
    mutable std::map<double, std::vector<cplx>> pot_phase_;
    mutable std::map<double, std::vector<cplx>> kin_phase_;
};

// ---- Crank-Nicolson (Cayley form, fd2 Laplacian) ---------------------------

void thomas_solve(std::vector<cplx>& diag, std::vector<cplx>& rhs, cplx off) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const cplx w = off / diag[i - 1];
        diag[i] -= w * off;
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - off * rhs[i + 1]) / diag[i];
}

// Cyclic tridiagonal (constant off-diagonal + periodic corners) via
// Sherman-Morrison.
void cyclic_solve(const std::vector<cplx>& diag, std::vector<cplx>& rhs, cplx off) {
    const std::size_t n = diag.size();
    const cplx gamma = -diag[0];
    std::vector<cplx> d(diag);
    d[0] -= gamma;
    d[n - 1] -= off * off / gamma;
    std::vector<cplx> u(n, cplx{});
    u[0] = gamma;
    u[n - 1] = off;

    std::vector<cplx> d1(d);
    thomas_solve(d1, rhs, off);
    std::vector<cplx> d2(d);
    thomas_solve(d2, u, off);

    const cplx num = rhs[0] + rhs[n - 1] * off / gamma;
    const cplx den = 1.0 + u[0] + u[n - 1] * off / gamma;
    const cplx f = num / den;
    for (std::size_t i = 0; i < n; ++i) rhs[i] -= f * u[i];
}

class CrankNicolsonKernel {
  public:
    CrankNicolsonKernel(const Grid& g, const PhysParams& p, const Potential& pot)
        : grid_(g), params_(p), pot_(&pot) {
        v_base_ = pot.sample_base(g, p);
    }

    void step(ComplexField& psi, double t, double dt) const {
        const double mul = pot_->multiplier(t + 0.5 * dt);
        if (grid_.dim() == 1) {
            cayley_axis(psi, 0, dt, mul, 1.0);
            return;
        }
        // symmetric split: half step along x2, full along x1, half along x2;
        // each factor carries half of V so the potential integrates to V dt
        cayley_axis(psi, 1, 0.5 * dt, mul, 0.5);
        cayley_axis(psi, 0, dt, mul, 0.5);
        cayley_axis(psi, 1, 0.5 * dt, mul, 0.5);
    }

  private:
    // (1 + i tau H /(2 hbar)) psi_new = (1 - i tau H /(2 hbar)) psi with
    // H = -hbar^2/(2m) d^2/dx_a^2 + v_share * V, applied line by line.
    void cayley_axis(ComplexField& psi, int axis, double tau, double v_mul,
                     double v_share) const {
        const Grid1D& ax = grid_.axis(axis);
        const int n = ax.n;
        const double dx = ax.dx();
        const double m = params_.mass_for_axis(grid_.dim(), axis);
        const double kin = params_.hbar * params_.hbar / (2.0 * m * dx * dx);
        const cplx lam = I * tau / (2.0 * params_.hbar);
        const cplx off = -lam * kin;  // implicit off-diagonal
        const bool periodic = ax.boundary == Boundary::periodic;

        const int n_lines = grid_.dim() == 1 ? 1 : grid_.extent(1 - axis);
        // dirichlet_zero pins the endpoint values; the solve runs over the
        // interior unknowns with zero ghosts
        const int j_lo = periodic ? 0 : 1;
        const int j_hi = periodic ? n : n - 1;
        const std::size_t n_sys = static_cast<std::size_t>(j_hi - j_lo);
        std::vector<cplx> line(static_cast<std::size_t>(n));
        std::vector<cplx> rhs(n_sys);
        std::vector<cplx> diag(n_sys);

        for (int l = 0; l < n_lines; ++l) {
            auto idx = [&](int j) {
                if (grid_.dim() == 1) return static_cast<std::size_t>(j);
                return axis == 0 ? grid_.index(j, l) : grid_.index(l, j);
            };
            for (int j = 0; j < n; ++j) line[static_cast<std::size_t>(j)] = psi[idx(j)];
            if (!periodic) line[0] = line[static_cast<std::size_t>(n - 1)] = cplx{};

            for (int j = j_lo; j < j_hi; ++j) {
                const double w = v_share * v_mul * v_base_[idx(j)];
                const cplx h_diag = 2.0 * kin + w;
                // explicit half: (1 - lam H) line
                cplx acc = (1.0 - lam * h_diag) * line[static_cast<std::size_t>(j)];
                const int jm = periodic ? (j + n - 1) % n : j - 1;
                const int jp = periodic ? (j + 1) % n : j + 1;
                if (jm >= 0) acc += lam * kin * line[static_cast<std::size_t>(jm)];
                if (jp < n) acc += lam * kin * line[static_cast<std::size_t>(jp)];
                rhs[static_cast<std::size_t>(j - j_lo)] = acc;
                diag[static_cast<std::size_t>(j - j_lo)] = 1.0 + lam * h_diag;
            }

            if (periodic)
                cyclic_solve(diag, rhs, off);
            else
                thomas_solve(diag, rhs, off);
            for (int j = j_lo; j < j_hi; ++j)
                psi[idx(j)] = rhs[static_cast<std::size_t>(j - j_lo)];
            if (!periodic) {
                psi[idx(0)] = cplx{};
                psi[idx(n - 1)] = cplx{};
            }
        }
    }

    Grid grid_;
    PhysParams params_;
    const Potential* pot_;
    RealField v_base_;
};

// Symmetric triple-jump composition of a 2nd-order one-step kernel.
template <typename Kernel>
void composed_step(const Kernel& k, ComplexField& psi, double& t, double dt, int order) {
    if (order == 2) {
        k.step(psi, t, dt);
        t += dt;
        return;
    }
    const double w1 = 1.0 / (2.0 - std::cbrt(2.0));
    const double w0 = 1.0 - 2.0 * w1;
    k.step(psi, t, w1 * dt);
    t += w1 * dt;
    k.step(psi, t, w0 * dt);
    t += w0 * dt;
    k.step(psi, t, w1 * dt);
    t += w1 * dt;
}

template <typename Kernel>
QuantumState run_steps(const Kernel& kernel, const QuantumState& s, double dt, int n_steps,
                       const EvolveOptions& opts) {
    QuantumState out = s;
    double prev_norm = l2_norm(out.psi, true);
    for (int step = 0; step < n_steps; ++step) {
        composed_step(kernel, out.psi, out.t, dt, opts.composition_order);
        const double n = l2_norm(out.psi, true);
        // per-step drift guards the step size; cumulative drift guards the run
        if (!(std::abs(n - prev_norm) < 1e-12)) {
            std::ostringstream msg;
            msg << "evolve: per-step norm drift " << std::abs(n - prev_norm) << " at step "
                << step + 1 << " (t=" << out.t << ", dt=" << dt << ")";
            throw NumericalAbort(msg.str());
        }
        if (!(std::abs(n - 1.0) < opts.norm_abort_tol)) {
            std::ostringstream msg;
            msg << "evolve: norm drift " << std::abs(n - 1.0) << " at step " << step + 1
                << " (t=" << out.t << ", dt=" << dt << ")";
            throw NumericalAbort(msg.str());
        }
        prev_norm = n;
    }
    return out;
}

}  // namespace

QuantumState make_gaussian(const Grid& g, const PhysParams& p, const GaussianSpec& spec) {
    p.validate();
    if (g.dim() != 1) throw std::invalid_argument("make_gaussian expects a 1D grid");
    check_resolution(g.axis(0), spec.sigma);
    ComplexField psi(g);
    for (int i = 0; i < g.extent(0); ++i) psi.at(i) = gaussian_amplitude(g.axis(0).point(i), spec);
    normalize(psi);
    return QuantumState{std::move(psi), 0.0, p};
}

QuantumState make_ho_ground(const Grid& g, const PhysParams& p, const Potential& pot) {
    p.validate();
    if (pot.kind() == Potential::Kind::harmonic) {
        if (g.dim() != 1) throw std::invalid_argument("harmonic ground state expects a 1D grid");
        const double sigma = std::sqrt(p.hbar / (2.0 * p.m * pot.omega()));
        return make_gaussian(g, p, GaussianSpec{pot.center(), sigma, 0.0});
    }
    if (pot.kind() != Potential::Kind::coupled_harmonic || g.dim() != 2)
        throw std::invalid_argument("make_ho_ground: harmonic (1D) or coupled_harmonic (2D)");

    // Quadratic Hamiltonian ground state exp(-x^T A x / (2 hbar)) with
    // A = M^{1/2} sqrt(M^{-1/2} K M^{-1/2}) M^{1/2}; the 2x2 principal square
    // root has the closed form (B + sqrt(det B) I) / sqrt(tr B + 2 sqrt(det B)).
    const double w2 = pot.omega() * pot.omega();
    const double kap = pot.kappa();
    const double k11 = p.m1 * w2 + 2.0 * kap;
    const double k12 = -2.0 * kap;
    const double b11 = k11 / p.m1, b22 = k11 / p.m2;
    const double b12 = k12 / std::sqrt(p.m1 * p.m2);
    const double det = b11 * b22 - b12 * b12;
    if (!(det > 0)) throw std::invalid_argument("coupled_harmonic: non-positive mode matrix");
    const double sdet = std::sqrt(det);
    const double denom = std::sqrt(b11 + b22 + 2.0 * sdet);
    const double s11 = (b11 + sdet) / denom, s22 = (b22 + sdet) / denom, s12 = b12 / denom;
    const double a11 = p.m1 * s11, a22 = p.m2 * s22, a12 = std::sqrt(p.m1 * p.m2) * s12;

    ComplexField psi(g);
    for (int i1 = 0; i1 < g.extent(0); ++i1)
        for (int i2 = 0; i2 < g.extent(1); ++i2) {
            const double x1 = g.axis(0).point(i1), x2 = g.axis(1).point(i2);
            const double q = a11 * x1 * x1 + 2.0 * a12 * x1 * x2 + a22 * x2 * x2;
            psi.at(i1, i2) = std::exp(-q / (2.0 * p.hbar));
        }
    normalize(psi);
    return QuantumState{std::move(psi), 0.0, p};
}

QuantumState make_product(const Grid& g, const PhysParams& p, const GaussianSpec& a,
                          const GaussianSpec& b) {
    p.validate();
    if (g.dim() != 2) throw std::invalid_argument("make_product expects a 2D grid");
    check_resolution(g.axis(0), a.sigma);
    check_resolution(g.axis(1), b.sigma);
    ComplexField psi(g);
    for (int i1 = 0; i1 < g.extent(0); ++i1)
        for (int i2 = 0; i2 < g.extent(1); ++i2)
            psi.at(i1, i2) = gaussian_amplitude(g.axis(0).point(i1), a) *
                             gaussian_amplitude(g.axis(1).point(i2), b);
    normalize(psi);
    return QuantumState{std::move(psi), 0.0, p};
}

QuantumState make_symmetrized(const Grid& g, const PhysParams& p, const GaussianSpec& a,
                              const GaussianSpec& b, int sign) {
    p.validate();
    if (g.dim() != 2) throw std::invalid_argument("make_symmetrized expects a 2D grid");
    if (sign != 1 && sign != -1) throw std::invalid_argument("make_symmetrized: sign must be +-1");
    check_resolution(g.axis(0), a.sigma);
    check_resolution(g.axis(1), b.sigma);
    ComplexField psi(g);
    for (int i1 = 0; i1 < g.extent(0); ++i1)
        for (int i2 = 0; i2 < g.extent(1); ++i2) {
            const double x1 = g.axis(0).point(i1), x2 = g.axis(1).point(i2);
            psi.at(i1, i2) = gaussian_amplitude(x1, a) * gaussian_amplitude(x2, b) +
                             static_cast<double>(sign) * gaussian_amplitude(x2, a) *
                                 gaussian_amplitude(x1, b);
        }
    const double n = l2_norm(psi, true);
    if (!(n > 1e-6))
        throw std::invalid_argument("make_symmetrized: zero-norm symmetrization");
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] /= n;
    return QuantumState{std::move(psi), 0.0, p};
}

QuantumState make_custom(ComplexField psi, double t, const PhysParams& p) {
    p.validate();
    normalize(psi);
    return QuantumState{std::move(psi), t, p};
}

QuantumState make_coupled_mode_superposition(const Grid& g, const PhysParams& p, double omega,
                                             double kappa, std::complex<double> rel_amplitude) {
    p.validate();
    if (g.dim() != 2) throw std::invalid_argument("mode superposition expects a 2D grid");
    if (std::abs(p.m1 - p.m2) > 1e-12 * p.m1)
        throw std::invalid_argument("mode superposition requires equal masses");
    const double m = p.m1;
    const double om_rel = std::sqrt(omega * omega + 4.0 * kappa / m);
    const double c_plus = m * omega / p.hbar;     // exponent rate, center-of-mass mode
    const double c_minus = m * om_rel / p.hbar;   // relative mode
    const double h1 = std::sqrt(2.0 * m * om_rel / p.hbar);  // Hermite scale for n=1

    ComplexField psi(g);
    for (int i1 = 0; i1 < g.extent(0); ++i1)
        for (int i2 = 0; i2 < g.extent(1); ++i2) {
            const double x1 = g.axis(0).point(i1), x2 = g.axis(1).point(i2);
            const double xp = (x1 + x2) / std::numbers::sqrt2;
            const double xm = (x1 - x2) / std::numbers::sqrt2;
            const double g0 = std::exp(-0.5 * (c_plus * xp * xp + c_minus * xm * xm));
            psi.at(i1, i2) = g0 * (1.0 + rel_amplitude * (h1 * xm));
        }
    normalize(psi);
    return QuantumState{std::move(psi), 0.0, p};
}

QuantumState evolve(const QuantumState& s, const Potential& pot, double dt, int n_steps,
                    const EvolveOptions& opts) {
    if (n_steps < 0) throw std::invalid_argument("evolve: negative step count");
    if (opts.method == EvolveMethod::split_step_spectral) {
        for (int a = 0; a < s.psi.grid().dim(); ++a)
            if (s.psi.grid().axis(a).boundary != Boundary::periodic)
                throw std::invalid_argument("split_step_spectral requires periodic boundaries");
        SplitStepKernel kernel(s.psi.grid(), s.params, pot);
        return run_steps(kernel, s, dt, n_steps, opts);
    }
    CrankNicolsonKernel kernel(s.psi.grid(), s.params, pot);
    return run_steps(kernel, s, dt, n_steps, opts);
}

StateTriplet state_triplet(const QuantumState& s, const Potential& pot, double dt,
                           const EvolveOptions& opts) {
    if (!(dt > 0)) throw std::invalid_argument("state_triplet: dt must be positive");
    EvolveOptions o = opts;
    o.composition_order = 4;
    StateTriplet out;
    out.curr = s;
    out.next = evolve(s, pot, dt, 1, o);
    out.prev = evolve(s, pot, -dt, 1, o);
    out.dt = dt;
    return out;
}

TimeSlabs density_slabs(const QuantumState& s, const Potential& pot, double dt,
                        const EvolveOptions& opts) {
    StateTriplet tri = state_triplet(s, pot, dt, opts);
    return make_time_slabs(density(tri.prev), density(tri.curr), density(tri.next), dt);
}

RealField density(const QuantumState& s) {
    RealField rho(s.psi.grid());
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(s.psi[i]);
    return rho;
}

double state_norm(const QuantumState& s) { return l2_norm(s.psi, true); }

double energy_expectation(const QuantumState& s, const Potential& pot) {
    const Grid& g = s.psi.grid();
    ComplexField hpsi(g);
    for (int a = 0; a < g.dim(); ++a) {
        ComplexField d2 = diff(s.psi, a, 2, DiffScheme::spectral);
        const double c = -s.params.hbar * s.params.hbar /
                         (2.0 * s.params.mass_for_axis(g.dim(), a));
        for (std::size_t i = 0; i < hpsi.size(); ++i) hpsi[i] += c * d2[i];
    }
    RealField v = pot.sample(g, s.params, s.t);
    for (std::size_t i = 0; i < hpsi.size(); ++i) hpsi[i] += v[i] * s.psi[i];
    double e = 0.0;
    for (std::size_t i = 0; i < hpsi.size(); ++i)
        e += (std::conj(s.psi[i]) * hpsi[i]).real();
    return e * g.cell_volume();
}

}  // namespace qhd
