#include "qhd/madelung.hpp"

#include <cmath>
#include <numbers>

namespace qhd {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double wrap_to_pi(double d) { return d - two_pi * std::round(d / two_pi); }

std::size_t argmax(const RealField& f) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < f.size(); ++i)
        if (f[i] > f[best]) best = i;
    return best;
}

// Unwrap arg(psi) marching away from the anchor cell along grid lines
// (anchor row first, then each column). Cells whose path crossed a node
// cell are flagged; the phase there is path-dependent garbage.
RealField unwrap_phase(const ComplexField& psi, std::size_t anchor, const MaskField& node_mask,
                       MaskField& unreliable) {
    const Grid& g = psi.grid();
    RealField theta(g);
    unreliable = MaskField(g);

    auto raw = [&](std::size_t i) { return std::arg(psi[i]); };

    if (g.dim() == 1) {
        const int n = g.extent(0);
        const int a = static_cast<int>(anchor);
        theta[anchor] = raw(anchor);
        bool crossed = node_mask[anchor] != 0;
        unreliable[anchor] = crossed ? 1 : 0;
        for (int j = a + 1; j < n; ++j) {
            theta[static_cast<std::size_t>(j)] =
                theta[static_cast<std::size_t>(j - 1)] +
                wrap_to_pi(raw(static_cast<std::size_t>(j)) - raw(static_cast<std::size_t>(j - 1)));
            crossed = crossed || node_mask[static_cast<std::size_t>(j)];
            unreliable[static_cast<std::size_t>(j)] = crossed ? 1 : 0;
        }
        crossed = node_mask[anchor] != 0;
        for (int j = a - 1; j >= 0; --j) {
            theta[static_cast<std::size_t>(j)] =
                theta[static_cast<std::size_t>(j + 1)] +
                wrap_to_pi(raw(static_cast<std::size_t>(j)) - raw(static_cast<std::size_t>(j + 1)));
            crossed = crossed || node_mask[static_cast<std::size_t>(j)];
            unreliable[static_cast<std::size_t>(j)] = crossed ? 1 : 0;
        }
        return theta;
    }

    const int n1 = g.extent(0), n2 = g.extent(1);
    const int ia = static_cast<int>(anchor) / n2;
    const int ja = static_cast<int>(anchor) % n2;

    auto idx = [&](int i, int j) { return g.index(i, j); };

    // anchor row
    theta.at(ia, ja) = raw(idx(ia, ja));
    std::vector<std::uint8_t> row_crossed(static_cast<std::size_t>(n2), 0);
    bool crossed = node_mask[idx(ia, ja)] != 0;
    row_crossed[static_cast<std::size_t>(ja)] = crossed ? 1 : 0;
    for (int j = ja + 1; j < n2; ++j) {
        theta.at(ia, j) = theta.at(ia, j - 1) + wrap_to_pi(raw(idx(ia, j)) - raw(idx(ia, j - 1)));
        crossed = crossed || node_mask[idx(ia, j)];
        row_crossed[static_cast<std::size_t>(j)] = crossed ? 1 : 0;
    }
    crossed = node_mask[idx(ia, ja)] != 0;
    for (int j = ja - 1; j >= 0; --j) {
        theta.at(ia, j) = theta.at(ia, j + 1) + wrap_to_pi(raw(idx(ia, j)) - raw(idx(ia, j + 1)));
        crossed = crossed || node_mask[idx(ia, j)];
        row_crossed[static_cast<std::size_t>(j)] = crossed ? 1 : 0;
    }

    // columns, marching away from the anchor row
    for (int j = 0; j < n2; ++j) {
        bool c_up = row_crossed[static_cast<std::size_t>(j)] != 0;
        unreliable.at(ia, j) = c_up ? 1 : 0;
        bool c_down = c_up;
        for (int i = ia + 1; i < n1; ++i) {
            theta.at(i, j) = theta.at(i - 1, j) + wrap_to_pi(raw(idx(i, j)) - raw(idx(i - 1, j)));
            c_up = c_up || node_mask[idx(i, j)];
            unreliable.at(i, j) = c_up ? 1 : 0;
        }
        for (int i = ia - 1; i >= 0; --i) {
            theta.at(i, j) = theta.at(i + 1, j) + wrap_to_pi(raw(idx(i, j)) - raw(idx(i + 1, j)));
            c_down = c_down || node_mask[idx(i, j)];
            unreliable.at(i, j) = c_down ? 1 : 0;
        }
    }
    return theta;
}

// log-density with a floor far below the node threshold; only stencils that
// already touch masked cells see the clamp
RealField log_density(const RealField& rho, double rho_max) {
    const double floor = rho_max * 1e-18;
    return map(rho, [floor](double r) { return std::log(std::max(r, floor)); });
}

// Q = -sum_a (hbar^2 / 4 m_a) (w_aa + w_a^2 / 2), w = ln rho. Exact for
// Gaussian-family densities where w is quadratic; ratio-free everywhere.
RealField quantum_potential_log_route(const RealField& w, const PhysParams& p) {
    const Grid& g = w.grid();
    RealField q(g);
    for (int a = 0; a < g.dim(); ++a) {
        RealField wa = diff(w, a, 1, DiffScheme::fd4);
        RealField waa = diff(w, a, 2, DiffScheme::fd4);
        const double c = -p.hbar * p.hbar / (4.0 * p.mass_for_axis(g.dim(), a));
        for (std::size_t i = 0; i < q.size(); ++i)
            q[i] += c * (waa[i] + 0.5 * wa[i] * wa[i]);
    }
    return q;
}

RealField current_density(const ComplexField& psi, int axis, double hbar, DiffScheme scheme) {
    ComplexField dpsi = diff(psi, axis, 1, scheme);
    RealField j(psi.grid());
    for (std::size_t i = 0; i < j.size(); ++i)
        j[i] = hbar * (std::conj(psi[i]) * dpsi[i]).imag();
    return j;
}

void sanitize(RealField& f, const MaskField& mask) {
    for (std::size_t i = 0; i < f.size(); ++i)
        if (mask[i]) f[i] = 0.0;
}

double branch_shift(double s_ref, double s_val, double hbar) {
    const double period = two_pi * hbar;
    return period * std::round((s_ref - s_val) / period);
}

}  // namespace

RealField ratio_diff(const RealField& f, const MaskField& node_mask, int axis, int order) {
    RealField clean = masked_fill(f, node_mask, 0.0);
    return diff(clean, axis, order, DiffScheme::fd4);
}

RealField quantum_potential_sqrt_form(const RealField& rho, double hbar, double mass, int axis,
                                      DiffScheme scheme) {
    RealField root = map(rho, [](double r) { return std::sqrt(std::max(r, 0.0)); });
    RealField d2 = diff(root, axis, 2, scheme);
    RealField q(rho.grid());
    const double c = -hbar * hbar / (2.0 * mass);
    for (std::size_t i = 0; i < q.size(); ++i)
        q[i] = root[i] > 0.0 ? c * d2[i] / root[i] : 0.0;
    return q;
}

RealField quantum_potential_bracket_form(const RealField& rho, double hbar, double mass, int axis,
                                         DiffScheme scheme) {
    RealField d1 = diff(rho, axis, 1, scheme);
    RealField d2 = diff(rho, axis, 2, scheme);
    RealField q(rho.grid());
    const double c = -hbar * hbar / (4.0 * mass);
    for (std::size_t i = 0; i < q.size(); ++i)
        q[i] = rho[i] > 0.0 ? c / rho[i] * (d2[i] - d1[i] * d1[i] / (2.0 * rho[i])) : 0.0;
    return q;
}

HydroFields extract_1p(const QuantumState& s, const Potential& pot, const ExtractOptions& opts,
                       std::optional<std::size_t> anchor) {
    const Grid& g = s.psi.grid();
    if (g.dim() != 1) throw std::invalid_argument("extract_1p expects a 1D state");
    (void)pot;

    HydroFields f;
    f.params = s.params;
    f.t = s.t;
    f.psi = s.psi;
    f.rho = density(s);
    double rho_max = 0.0;
    for (std::size_t i = 0; i < f.rho.size(); ++i) rho_max = std::max(rho_max, f.rho[i]);
    if (!(rho_max > 0.0)) throw std::invalid_argument("extract: degenerate state (zero density)");
    f.eps_node = opts.eps_node_rel * rho_max;
    f.node_mask = below_threshold_mask(f.rho, f.eps_node);

    const std::size_t a = anchor.value_or(argmax(f.rho));
    RealField theta = unwrap_phase(s.psi, a, f.node_mask, f.s_unreliable);
    f.S = map(theta, [&](double th) { return s.params.hbar * th; });
    // anchor branch into [0, 2 pi hbar)
    const double period = two_pi * s.params.hbar;
    double shift = std::floor(f.S[a] / period) * period;
    for (std::size_t i = 0; i < f.S.size(); ++i) f.S[i] -= shift;

    RealField j = current_density(s.psi, 0, s.params.hbar, opts.scheme);
    f.v = RealField(g);
    for (std::size_t i = 0; i < f.v.size(); ++i)
        f.v[i] = f.node_mask[i] ? 0.0 : j[i] / (s.params.m * f.rho[i]);

    RealField w = log_density(f.rho, rho_max);
    f.Q = quantum_potential_log_route(w, s.params);
    sanitize(f.Q, f.node_mask);

    // Pi = rho v^2 + quantum part; convective part as j^2/(m^2 rho)
    f.Pi = RealField(g);
    const double m = s.params.m, hb = s.params.hbar;
    const double cq = hb * hb / (4.0 * m * m);
    // compact stencils: the outer stress divergence divides by dx again,
    // and a global transform's broadband noise floor would dominate there
    RealField d1rho = diff(f.rho, 0, 1, DiffScheme::fd4);
    RealField d2rho = diff(f.rho, 0, 2, DiffScheme::fd4);
    RealField w1 = diff(w, 0, 1, DiffScheme::fd4);
    for (std::size_t i = 0; i < f.Pi.size(); ++i) {
        if (f.node_mask[i]) continue;
        const double conv = j[i] * j[i] / (m * m * f.rho[i]);
        const double quant =
            opts.pi_form == PiForm::quantum_stress
                ? cq * (d1rho[i] * d1rho[i] / f.rho[i] - d2rho[i])
                : cq * (w1[i] / f.rho[i] - d2rho[i]);
        f.Pi[i] = conv + quant;
    }
    return f;
}

TwoBodyFields extract_2p(const QuantumState& s, const Potential& pot, const ExtractOptions& opts,
                         std::optional<std::size_t> anchor) {
    const Grid& g = s.psi.grid();
    if (g.dim() != 2) throw std::invalid_argument("extract_2p expects a 2D state");

    TwoBodyFields f;
    f.params = s.params;
    f.t = s.t;
    f.psi = s.psi;
    f.rho = density(s);
    double rho_max = 0.0;
    for (std::size_t i = 0; i < f.rho.size(); ++i) rho_max = std::max(rho_max, f.rho[i]);
    if (!(rho_max > 0.0)) throw std::invalid_argument("extract: degenerate state (zero density)");
    f.eps_node = opts.eps_node_rel * rho_max;
    f.node_mask = below_threshold_mask(f.rho, f.eps_node);

    const std::size_t a = anchor.value_or(argmax(f.rho));
    RealField theta = unwrap_phase(s.psi, a, f.node_mask, f.s_unreliable);
    f.S = map(theta, [&](double th) { return s.params.hbar * th; });
    const double period = two_pi * s.params.hbar;
    double shift = std::floor(f.S[a] / period) * period;
    for (std::size_t i = 0; i < f.S.size(); ++i) f.S[i] -= shift;

    RealField j1 = current_density(s.psi, 0, s.params.hbar, opts.scheme);
    RealField j2 = current_density(s.psi, 1, s.params.hbar, opts.scheme);
    f.v1 = RealField(g);
    f.v2 = RealField(g);
    for (std::size_t i = 0; i < f.rho.size(); ++i) {
        if (f.node_mask[i]) continue;
        f.v1[i] = j1[i] / (s.params.m1 * f.rho[i]);
        f.v2[i] = j2[i] / (s.params.m2 * f.rho[i]);
    }

    RealField w = log_density(f.rho, rho_max);
    f.Q = quantum_potential_log_route(w, s.params);
    sanitize(f.Q, f.node_mask);

    f.V = pot.sample(g, s.params, s.t);
    return f;
}

namespace {

template <typename Fields>
void align_branch(Fields& side, const Fields& center, std::size_t anchor, double hbar) {
    const double d = branch_shift(center.S[anchor], side.S[anchor], hbar);
    if (d != 0.0)
        for (std::size_t i = 0; i < side.S.size(); ++i) side.S[i] += d;
}

}  // namespace

HydroSlabs extract_slabs_1p(const QuantumState& s, const Potential& pot, double dt,
                            const ExtractOptions& eopts, const EvolveOptions& vopts) {
    StateTriplet tri = state_triplet(s, pot, dt, vopts);
    const std::size_t a = argmax(density(tri.curr));
    HydroSlabs out;
    out.curr = extract_1p(tri.curr, pot, eopts, a);
    out.prev = extract_1p(tri.prev, pot, eopts, a);
    out.next = extract_1p(tri.next, pot, eopts, a);
    align_branch(out.prev, out.curr, a, s.params.hbar);
    align_branch(out.next, out.curr, a, s.params.hbar);
    out.dt = dt;
    return out;
}

TwoBodySlabs extract_slabs_2p(const QuantumState& s, const Potential& pot, double dt,
                              const ExtractOptions& eopts, const EvolveOptions& vopts) {
    StateTriplet tri = state_triplet(s, pot, dt, vopts);
    const std::size_t a = argmax(density(tri.curr));
    TwoBodySlabs out;
    out.curr = extract_2p(tri.curr, pot, eopts, a);
    out.prev = extract_2p(tri.prev, pot, eopts, a);
    out.next = extract_2p(tri.next, pot, eopts, a);
    align_branch(out.prev, out.curr, a, s.params.hbar);
    align_branch(out.next, out.curr, a, s.params.hbar);
    out.dt = dt;
    return out;
}

RealField material_derivative(const HydroSlabs& slabs) {
    const HydroFields& c = slabs.curr;
    RealField out(c.v.grid());
    const double inv = 1.0 / (2.0 * slabs.dt);
    RealField dvdx = ratio_diff(c.v, c.node_mask, 0, 1);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (slabs.next.v[i] - slabs.prev.v[i]) * inv + c.v[i] * dvdx[i];
    return out;
}

double mixed_velocity_residual(const TwoBodyFields& f, double interior_rel) {
    RealField d2v1 = ratio_diff(f.v1, f.node_mask, 1, 1);
    RealField d1v2 = ratio_diff(f.v2, f.node_mask, 0, 1);
    RealField r(f.rho.grid());
    for (std::size_t i = 0; i < r.size(); ++i)
        r[i] = d2v1[i] / f.params.m2 - d1v2[i] / f.params.m1;
    MaskField excluded = f.node_mask;
    if (interior_rel > 0.0) {
        const double rho_max = norm(f.rho, NormKind::Linf, false);
        MaskField interior = below_threshold_mask(f.rho, interior_rel * rho_max);
        for (std::size_t i = 0; i < excluded.size(); ++i)
            excluded[i] = excluded[i] || interior[i] ? 1 : 0;
    }
    return masked_norm(r, dilate(excluded, 2), NormKind::Linf, false);
}

}  // namespace qhd
