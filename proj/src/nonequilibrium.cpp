#include "qhd/nonequilibrium.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "qhd/errors.hpp"

namespace qhd {

namespace {

void require_1d_periodic(const Grid& g, const char* who) {
    if (g.dim() != 1 || g.axis(0).boundary != Boundary::periodic)
        throw std::invalid_argument(std::string(who) + ": 1D periodic grid required");
}

void check_cfl(const RealField& v, double dt, double dx, const char* who) {
    double vmax = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) vmax = std::max(vmax, std::abs(v[i]));
    const double cfl = vmax * std::abs(dt) / dx;
    if (cfl > 1.0) {
        std::ostringstream msg;
        msg << who << ": CFL violation, |v| dt / dx = " << cfl << " (vmax=" << vmax
            << ", dt=" << dt << ", dx=" << dx << ")";
        throw NumericalAbort(msg.str());
    }
}

double mc_slope(double dm, double dp) {
    if (dm * dp <= 0.0) return 0.0;
    const double c = 0.5 * (dm + dp);
    const double lim = 2.0 * std::min(std::abs(dm), std::abs(dp));
    return std::copysign(std::min(std::abs(c), lim), c);
}

// One forward-Euler stage of the conservative MUSCL update for rho; mass
// telescopes to round-off on the periodic grid.
std::vector<double> muscl_stage(const std::vector<double>& rho, const RealField& v, int n,
                                double lam) {
    auto at = [&](int idx) { return rho[static_cast<std::size_t>((idx % n + n) % n)]; };
    std::vector<double> flux(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {  // face j+1/2
        const double vf = 0.5 * (v[static_cast<std::size_t>(j)] +
                                 v[static_cast<std::size_t>((j + 1) % n)]);
        double state;
        if (vf >= 0.0)
            state = at(j) + 0.5 * mc_slope(at(j) - at(j - 1), at(j + 1) - at(j));
        else
            state = at(j + 1) - 0.5 * mc_slope(at(j + 1) - at(j), at(j + 2) - at(j + 1));
        flux[static_cast<std::size_t>(j)] = vf * state;
    }
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
        out[static_cast<std::size_t>(j)] =
            at(j) - lam * (flux[static_cast<std::size_t>(j)] -
                           flux[static_cast<std::size_t>((j + n - 1) % n)]);
    return out;
}

// Q from w with compact stencils; local, ratio-free, exact for quadratic w.
RealField quantum_potential_from_w(const RealField& w, double hbar, double m) {
    RealField w1 = diff(w, 0, 1, DiffScheme::fd4);
    RealField w2 = diff(w, 0, 2, DiffScheme::fd4);
    RealField q(w.grid());
    const double c = -hbar * hbar / (4.0 * m);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = c * (w2[i] + 0.5 * w1[i] * w1[i]);
    return q;
}

}  // namespace

NoneqState noneq_from_density(const RealField& rho, NoneqMode mode, double floor_rel) {
    double rho_max = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) rho_max = std::max(rho_max, rho[i]);
    if (!(rho_max > 0.0)) throw std::invalid_argument("noneq_from_density: zero density");
    // additive background: log-density stays smooth where the physical
    // density dies out (a hard clamp leaves a slope corner that seeds
    // grid-scale noise in the self-consistent dynamics)
    const double floor = floor_rel * rho_max;
    NoneqState s;
    s.w = map(rho, [floor](double r) { return std::log(std::max(r, 0.0) + floor); });
    s.v = RealField(rho.grid());
    s.mode = mode;
    return s;
}

RealField noneq_density(const NoneqState& s) {
    return map(s.w, [](double w) { return std::exp(w); });
}

double noneq_mass(const NoneqState& s) {
    double m = 0.0;
    for (std::size_t i = 0; i < s.w.size(); ++i) m += std::exp(s.w[i]);
    return m * s.w.grid().cell_volume();
}

NoneqState step_guided(const NoneqState& s, const RealField& guidance_v, double dt) {
    if (s.mode != NoneqMode::guided_transport)
        throw std::invalid_argument("step_guided: state not in guided_transport mode");
    const Grid& g = s.w.grid();
    require_1d_periodic(g, "step_guided");
    if (guidance_v.grid() != g) throw std::invalid_argument("step_guided: grid mismatch");
    const int n = g.extent(0);
    const double dx = g.axis(0).dx();
    check_cfl(guidance_v, dt, dx, "step_guided");

    // conservative MUSCL update of rho = e^w with SSP-Heun staging; the
    // state stays in w so the density cannot leave the positive cone, and
    // mass telescopes instead of drifting with the interpolation error
    std::vector<double> rho(static_cast<std::size_t>(n));
    double rho_max = 0.0;
    for (int j = 0; j < n; ++j) {
        rho[static_cast<std::size_t>(j)] = std::exp(s.w[static_cast<std::size_t>(j)]);
        rho_max = std::max(rho_max, rho[static_cast<std::size_t>(j)]);
    }
    const double lam = dt / dx;
    std::vector<double> r1 = muscl_stage(rho, guidance_v, n, lam);
    std::vector<double> r2 = muscl_stage(r1, guidance_v, n, lam);

    const double floor = rho_max * 1e-18;
    NoneqState out = s;
    for (int j = 0; j < n; ++j) {
        const double rn = 0.5 * (rho[static_cast<std::size_t>(j)] +
                                 r2[static_cast<std::size_t>(j)]);
        out.w[static_cast<std::size_t>(j)] = std::log(std::max(rn, floor));
    }
    out.t = s.t + dt;
    return out;
}

NoneqState step_self_consistent(const NoneqState& s, const Potential& pot,
                                const PhysParams& params, double dt) {
    if (s.mode != NoneqMode::self_consistent)
        throw std::invalid_argument("step_self_consistent: state not in self_consistent mode");
    const Grid& g = s.w.grid();
    require_1d_periodic(g, "step_self_consistent");
    const double dx = g.axis(0).dx();
    check_cfl(s.v, dt, dx, "step_self_consistent");

    RealField vx_pot = pot.gradient(g, params, 0, s.t);

    // Near-vacuum handling: the quantum force is rolled off smoothly where
    // rho drops below ~1e-9 of its peak (the steep tail band convectively
    // amplifies whatever noise enters it, and Q there is physically
    // irrelevant at 1e-9 of the mass). v also carries a weak fourth-
    // difference damping that removes near-Nyquist junk at a fixed per-step
    // rate while perturbing smooth fields at O(dx^4 d4v / dt), below the
    // scheme's accuracy envelope for dt ~ dx^2.
    constexpr double hyper_damp = 0.025;
    const int n = g.extent(0);
    auto rhs = [&](const RealField& w, const RealField& v,
                   RealField& fw, RealField& fv) {
        RealField wx = diff(w, 0, 1, DiffScheme::fd4);
        RealField vx = diff(v, 0, 1, DiffScheme::fd4);
        RealField q = quantum_potential_from_w(w, params.hbar, params.m);
        RealField qx = diff(q, 0, 1, DiffScheme::fd4);
        double w_max = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < w.size(); ++i) w_max = std::max(w_max, w[i]);
        const double w_cut = w_max + std::log(1e-9);
        fw = RealField(g);
        fv = RealField(g);
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double u = std::exp(std::min(2.0 * (w_cut - w[i]), 500.0));
            const double chi = 1.0 / (1.0 + u);
            fw[i] = -v[i] * wx[i] - vx[i];
            fv[i] = -v[i] * vx[i] - (vx_pot[i] + chi * qx[i]) / params.m;
        }
        auto vat = [&](int j) { return v[static_cast<std::size_t>((j % n + n) % n)]; };
        for (int j = 0; j < n; ++j)
            fv[static_cast<std::size_t>(j)] -=
                hyper_damp / dt *
                (vat(j - 2) - 4.0 * vat(j - 1) + 6.0 * vat(j) - 4.0 * vat(j + 1) +
                 vat(j + 2));
    };

    RealField fw1, fv1;
    rhs(s.w, s.v, fw1, fv1);
    RealField w1(g), v1(g);
    for (std::size_t i = 0; i < w1.size(); ++i) {
        w1[i] = s.w[i] + dt * fw1[i];
        v1[i] = s.v[i] + dt * fv1[i];
    }
    RealField fw2, fv2;
    rhs(w1, v1, fw2, fv2);

    NoneqState out = s;
    double max_dw = 0.0;
    for (std::size_t i = 0; i < out.w.size(); ++i) {
        const double dw = 0.5 * dt * (fw1[i] + fw2[i]);
        max_dw = std::max(max_dw, std::abs(dw));
        out.w[i] = s.w[i] + dw;
        out.v[i] = s.v[i] + 0.5 * dt * (fv1[i] + fv2[i]);
    }
    if (max_dw > 2.0) {
        std::ostringstream msg;
        msg << "step_self_consistent: step rejected, |dw| = " << max_dw << " at t=" << s.t
            << " (stiffness guard)";
        throw NumericalAbort(msg.str());
    }
    out.t = s.t + dt;
    return out;
}

DeviationEntry deviation(const NoneqState& s, const RealField& rho_ref, double t_ref) {
    if (rho_ref.grid() != s.w.grid()) throw std::invalid_argument("deviation: grid mismatch");
    if (std::abs(s.t - t_ref) > 1e-9 * std::max(1.0, std::abs(t_ref)))
        throw std::invalid_argument("deviation: time mismatch");
    DeviationEntry e;
    e.time = s.t;
    const double dv = s.w.grid().cell_volume();
    for (std::size_t i = 0; i < s.w.size(); ++i) {
        const double d = std::abs(std::exp(s.w[i]) - rho_ref[i]);
        e.l1 += d * dv;
        e.linf = std::max(e.linf, d);
    }
    return e;
}

}  // namespace qhd
