#include "qhd/verify.hpp"

#include <cmath>

namespace qhd {

namespace {

// Derivative policy: fields that are smooth at the wavefunction level
// (rho, rho*v bilinears, rho*dV) take the scenario scheme; anything built
// from the pointwise ratio v = j/rho (v, v^2, Q, Pi, rho*Dv composites)
// takes compact sanitized stencils so tail round-off cannot leak into the
// interior through a global transform.

RealField product(const RealField& a, const RealField& b) { return a * b; }

TimeSlabs rho_slabs(const HydroSlabs& s) {
    return TimeSlabs{s.prev.rho, s.curr.rho, s.next.rho, s.dt};
}
TimeSlabs rho_slabs(const TwoBodySlabs& s) {
    return TimeSlabs{s.prev.rho, s.curr.rho, s.next.rho, s.dt};
}

MaskField union_mask(const MaskField& a, const MaskField& b) {
    MaskField out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] || b[i] ? 1 : 0;
    return out;
}

template <typename Slabs>
MaskField exclusion_impl(const Slabs& s, const AssemblyOptions& opts, bool phase_sensitive) {
    double rho_max = norm(s.curr.rho, NormKind::Linf, false);
    MaskField excl = below_threshold_mask(s.curr.rho, opts.interior_rel * rho_max);
    excl = union_mask(excl, s.prev.node_mask);
    excl = union_mask(excl, s.curr.node_mask);
    excl = union_mask(excl, s.next.node_mask);
    if (phase_sensitive) {
        excl = union_mask(excl, s.prev.s_unreliable);
        excl = union_mask(excl, s.curr.s_unreliable);
        excl = union_mask(excl, s.next.s_unreliable);
    }
    return dilate(excl, opts.halo);
}

bool phase_sensitive(EquationId eq) {
    return eq == EquationId::hj_1p || eq == EquationId::hj_2p;
}

// ---- single-particle assemblies -------------------------------------------

RealField continuity_1p_field(const HydroSlabs& s, const AssemblyOptions& opts) {
    RealField dtr = time_derivative(rho_slabs(s));
    RealField flux = diff(product(s.curr.rho, s.curr.v), 0, 1, opts.scheme);
    return dtr + flux;
}

// d_t S evaluated pointwise from the slab states' phase difference: the
// rotation over 2 dt is far below a branch cut, and unlike differencing two
// independently unwrapped S fields it does not accumulate a random walk of
// tail phase noise along the unwrap path.
RealField phase_time_derivative(const ComplexField& prev, const ComplexField& next,
                                double hbar, double dt) {
    RealField out(prev.grid());
    const double inv = hbar / (2.0 * dt);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::arg(next[i] * std::conj(prev[i])) * inv;
    return out;
}

RealField hj_1p_field(const HydroSlabs& s, const Potential& pot, const AssemblyOptions& opts) {
    (void)opts;
    const HydroFields& c = s.curr;
    RealField dts = phase_time_derivative(s.prev.psi, s.next.psi, c.params.hbar, s.dt);
    RealField v_pot = pot.sample(c.rho.grid(), c.params, c.t);
    RealField out(c.rho.grid());
    const double m = c.params.m;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = -dts[i] - 0.5 * m * c.v[i] * c.v[i] - v_pot[i] - c.Q[i];
    return out;
}

RealField momentum_1p_field(const HydroSlabs& s, const Potential& pot,
                            const AssemblyOptions& opts) {
    const HydroFields& c = s.curr;
    TimeSlabs jv{product(s.prev.rho, s.prev.v), product(s.curr.rho, s.curr.v),
                 product(s.next.rho, s.next.v), s.dt};
    RealField dtj = time_derivative(jv);
    // Pi decays like rho (sanitized at extraction), so the scenario scheme is
    // safe here; its mask-edge jump is at the 1e-10 rho level
    RealField dpi = diff(masked_fill(c.Pi, c.node_mask, 0.0), 0, 1, opts.scheme);
    RealField vx = pot.gradient(c.rho.grid(), c.params, 0, c.t);
    const double m = c.params.m;
    // the stress divergence enters with 1/m only in the literal printed form
    const double pi_factor = opts.printed_forms ? 1.0 / m : 1.0;
    RealField out(c.rho.grid());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = dtj[i] + pi_factor * dpi[i] + c.rho[i] / m * vx[i];
    return out;
}

RealField wave_1p_field(const HydroSlabs& s, const Potential& pot, const AssemblyOptions& opts) {
    const HydroFields& c = s.curr;
    RealField d2t = second_time_derivative(rho_slabs(s));
    RealField d2pi = diff(masked_fill(c.Pi, c.node_mask, 0.0), 0, 2, opts.scheme);
    RealField vx = pot.gradient(c.rho.grid(), c.params, 0, c.t);
    RealField dforce = diff(product(c.rho, vx), 0, 1, opts.scheme);
    const double m = c.params.m;
    const double f_factor = opts.printed_forms ? 1.0 : 1.0 / m;
    RealField out(c.rho.grid());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = d2t[i] - d2pi[i] - f_factor * dforce[i];
    return out;
}

RealField wave_equilibrium_1p_field(const HydroSlabs& s, const AssemblyOptions& opts) {
    (void)opts;
    const HydroFields& c = s.curr;
    RealField d2t = second_time_derivative(rho_slabs(s));
    RealField rho_v2(c.rho.grid());
    for (std::size_t i = 0; i < rho_v2.size(); ++i)
        rho_v2[i] = c.rho[i] * c.v[i] * c.v[i];
    RealField d2conv = ratio_diff(rho_v2, c.node_mask, 0, 2);

    TimeSlabs vslabs{s.prev.v, s.curr.v, s.next.v, s.dt};
    RealField dtv = time_derivative(vslabs);
    RealField dvdx = ratio_diff(c.v, c.node_mask, 0, 1);
    RealField rho_dv(c.rho.grid());
    for (std::size_t i = 0; i < rho_dv.size(); ++i)
        rho_dv[i] = c.rho[i] * (dtv[i] + c.v[i] * dvdx[i]);
    RealField dmat = ratio_diff(rho_dv, c.node_mask, 0, 1);

    RealField out(c.rho.grid());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = d2t[i] - d2conv[i] + dmat[i];
    return out;
}

// ---- two-body assemblies ---------------------------------------------------

RealField continuity_2p_field(const TwoBodySlabs& s, const AssemblyOptions& opts) {
    RealField dtr = time_derivative(rho_slabs(s));
    RealField f1 = diff(product(s.curr.rho, s.curr.v1), 0, 1, opts.scheme);
    RealField f2 = diff(product(s.curr.rho, s.curr.v2), 1, 1, opts.scheme);
    return dtr + f1 + f2;
}

RealField hj_2p_field(const TwoBodySlabs& s, const AssemblyOptions& opts) {
    (void)opts;
    const TwoBodyFields& c = s.curr;
    RealField dts = phase_time_derivative(s.prev.psi, s.next.psi, c.params.hbar, s.dt);
    RealField out(c.rho.grid());
    const double m1 = c.params.m1, m2 = c.params.m2;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = -dts[i] - 0.5 * m1 * c.v1[i] * c.v1[i] - 0.5 * m2 * c.v2[i] * c.v2[i] -
                 c.V[i] - c.Q[i];
    return out;
}

// Eq-18/19 style momentum balance for particle `which` (1 or 2); the printed
// forms hold for general masses and are assembled as printed.
RealField momentum_2p_field(int which, const TwoBodySlabs& s, const Potential& pot,
                            const AssemblyOptions& opts) {
    const TwoBodyFields& c = s.curr;
    const int a = which == 1 ? 0 : 1;  // own axis
    const int b = 1 - a;               // partner axis
    const RealField& va = which == 1 ? c.v1 : c.v2;
    const RealField& vb = which == 1 ? c.v2 : c.v1;
    const double ma = which == 1 ? c.params.m1 : c.params.m2;

    auto own_v = [&](const TwoBodyFields& f) -> const RealField& {
        return which == 1 ? f.v1 : f.v2;
    };
    TimeSlabs jslabs{product(s.prev.rho, own_v(s.prev)), product(s.curr.rho, va),
                     product(s.next.rho, own_v(s.next)), s.dt};
    RealField dtj = time_derivative(jslabs);

    RealField rho_va2(c.rho.grid());
    for (std::size_t i = 0; i < rho_va2.size(); ++i)
        rho_va2[i] = c.rho[i] * va[i] * va[i];
    RealField conv = ratio_diff(rho_va2, c.node_mask, a, 1);

    RealField db_va = ratio_diff(va, c.node_mask, b, 1);
    RealField db_jb = diff(product(c.rho, vb), b, 1, opts.scheme);

    RealField vx = pot.gradient(c.rho.grid(), c.params, a, c.t);
    RealField dq = ratio_diff(c.Q, c.node_mask, a, 1);

    RealField out(c.rho.grid());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = dtj[i] + conv[i] + c.rho[i] * vb[i] * db_va[i] + va[i] * db_jb[i] +
                 c.rho[i] / ma * (vx[i] + dq[i]);
    return out;
}

struct TwoBodyWaveTerms {
    RealField single_group;
    RealField cross_group;
};

// RHS of the two-body wave equation split into the per-particle groups and
// the inter-particle cross group.
TwoBodyWaveTerms wave_terms_2p(const TwoBodySlabs& s, const AssemblyOptions& opts) {
    const TwoBodyFields& c = s.curr;
    const Grid& g = c.rho.grid();
    TwoBodyWaveTerms t{RealField(g), RealField(g)};

    TimeSlabs v1s{s.prev.v1, s.curr.v1, s.next.v1, s.dt};
    TimeSlabs v2s{s.prev.v2, s.curr.v2, s.next.v2, s.dt};

    for (int which = 0; which < 2; ++which) {
        const int a = which;
        const RealField& va = which == 0 ? c.v1 : c.v2;
        RealField dtv = time_derivative(which == 0 ? v1s : v2s);

        // pair rho with the squared velocity so this agrees with the linear
        // operator's rho-linear factorization to the last ulp
        RealField rho_va2(g);
        for (std::size_t i = 0; i < rho_va2.size(); ++i)
            rho_va2[i] = c.rho[i] * (va[i] * va[i]);
        RealField d2conv = ratio_diff(rho_va2, c.node_mask, a, 2);

        RealField dva = ratio_diff(va, c.node_mask, a, 1);
        RealField rho_dv(g);
        for (std::size_t i = 0; i < rho_dv.size(); ++i)
            rho_dv[i] = c.rho[i] * (dtv[i] + va[i] * dva[i]);
        RealField dmat = ratio_diff(rho_dv, c.node_mask, a, 1);

        for (std::size_t i = 0; i < t.single_group.size(); ++i)
            t.single_group[i] += d2conv[i] - dmat[i];
    }

    // cross group: d1 v1 d2(rho v2) + v1 d1 d2(rho v2) + (1 <-> 2)
    RealField j2 = product(c.rho, c.v2);
    RealField j1 = product(c.rho, c.v1);
    RealField d2j2 = diff(j2, 1, 1, opts.scheme);
    RealField d1j1 = diff(j1, 0, 1, opts.scheme);
    RealField d12j2 = diff(d2j2, 0, 1, opts.scheme);
    RealField d21j1 = diff(d1j1, 1, 1, opts.scheme);
    RealField d1v1 = ratio_diff(c.v1, c.node_mask, 0, 1);
    RealField d2v2 = ratio_diff(c.v2, c.node_mask, 1, 1);
    for (std::size_t i = 0; i < t.cross_group.size(); ++i)
        t.cross_group[i] = d1v1[i] * d2j2[i] + c.v1[i] * d12j2[i] + d2v2[i] * d1j1[i] +
                           c.v2[i] * d21j1[i];
    return t;
}

RealField wave_2p_field(const TwoBodySlabs& s, const AssemblyOptions& opts) {
    RealField d2t = second_time_derivative(rho_slabs(s));
    TwoBodyWaveTerms t = wave_terms_2p(s, opts);
    RealField out(d2t.grid());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = d2t[i] - t.single_group[i] - t.cross_group[i];
    return out;
}

template <typename Slabs>
ResidualReport make_report(EquationId eq, const RealField& r, const Slabs& s,
                           const AssemblyOptions& opts) {
    MaskField excl = exclusion_impl(s, opts, phase_sensitive(eq));
    ResidualReport rep;
    rep.eq = eq;
    rep.norms.l1 = masked_norm(r, excl, NormKind::L1, true);
    rep.norms.l2 = masked_norm(r, excl, NormKind::L2, true);
    rep.norms.linf = masked_norm(r, excl, NormKind::Linf, false);
    rep.n = r.grid().extent(0);
    rep.dx = r.grid().axis(0).dx();
    rep.dt = s.dt;
    rep.interior_fraction = included_fraction(excl);
    rep.scheme = opts.scheme;
    rep.printed_forms = opts.printed_forms;
    return rep;
}

}  // namespace

const char* to_string(EquationId eq) {
    switch (eq) {
        case EquationId::continuity_1p: return "continuity_1p";
        case EquationId::hj_1p: return "hj_1p";
        case EquationId::momentum_1p: return "momentum_1p";
        case EquationId::wave_1p: return "wave_1p";
        case EquationId::wave_equilibrium_1p: return "wave_equilibrium_1p";
        case EquationId::continuity_2p: return "continuity_2p";
        case EquationId::hj_2p: return "hj_2p";
        case EquationId::momentum_2p_1: return "momentum_2p_1";
        case EquationId::momentum_2p_2: return "momentum_2p_2";
        case EquationId::wave_2p: return "wave_2p";
    }
    return "?";
}

std::optional<EquationId> equation_from_string(std::string_view name) {
    for (auto eq : {EquationId::continuity_1p, EquationId::hj_1p, EquationId::momentum_1p,
                    EquationId::wave_1p, EquationId::wave_equilibrium_1p,
                    EquationId::continuity_2p, EquationId::hj_2p, EquationId::momentum_2p_1,
                    EquationId::momentum_2p_2, EquationId::wave_2p})
        if (name == to_string(eq)) return eq;
    return std::nullopt;
}

bool is_two_body(EquationId eq) {
    switch (eq) {
        case EquationId::continuity_2p:
        case EquationId::hj_2p:
        case EquationId::momentum_2p_1:
        case EquationId::momentum_2p_2:
        case EquationId::wave_2p: return true;
        default: return false;
    }
}

RealField residual_field(EquationId eq, const HydroSlabs& s, const Potential& pot,
                         const AssemblyOptions& opts) {
    switch (eq) {
        case EquationId::continuity_1p: return continuity_1p_field(s, opts);
        case EquationId::hj_1p: return hj_1p_field(s, pot, opts);
        case EquationId::momentum_1p: return momentum_1p_field(s, pot, opts);
        case EquationId::wave_1p: return wave_1p_field(s, pot, opts);
        case EquationId::wave_equilibrium_1p: return wave_equilibrium_1p_field(s, opts);
        default: throw std::invalid_argument("residual_field: two-body equation on 1p slabs");
    }
}

RealField residual_field(EquationId eq, const TwoBodySlabs& s, const Potential& pot,
                         const AssemblyOptions& opts) {
    switch (eq) {
        case EquationId::continuity_2p: return continuity_2p_field(s, opts);
        case EquationId::hj_2p: return hj_2p_field(s, opts);
        case EquationId::momentum_2p_1: return momentum_2p_field(1, s, pot, opts);
        case EquationId::momentum_2p_2: return momentum_2p_field(2, s, pot, opts);
        case EquationId::wave_2p: return wave_2p_field(s, opts);
        default: throw std::invalid_argument("residual_field: single-body equation on 2p slabs");
    }
}

MaskField interior_exclusion(const HydroSlabs& s, const AssemblyOptions& opts,
                             bool phase) {
    return exclusion_impl(s, opts, phase);
}
MaskField interior_exclusion(const TwoBodySlabs& s, const AssemblyOptions& opts,
                             bool phase) {
    return exclusion_impl(s, opts, phase);
}

ResidualReport residual(EquationId eq, const HydroSlabs& s, const Potential& pot,
                        const AssemblyOptions& opts) {
    return make_report(eq, residual_field(eq, s, pot, opts), s, opts);
}

ResidualReport residual(EquationId eq, const TwoBodySlabs& s, const Potential& pot,
                        const AssemblyOptions& opts) {
    return make_report(eq, residual_field(eq, s, pot, opts), s, opts);
}

std::pair<ResidualReport, ResidualReport> velocity_uniqueness_probe(const HydroSlabs& s,
                                                                    const Potential& pot,
                                                                    double c,
                                                                    const AssemblyOptions& opts) {
    ResidualReport clean = residual(EquationId::wave_equilibrium_1p, s, pot, opts);

    HydroSlabs probe = s;
    for (HydroFields* f : {&probe.prev, &probe.curr, &probe.next}) {
        for (std::size_t i = 0; i < f->v.size(); ++i)
            if (!f->node_mask[i]) f->v[i] += c / f->rho[i];
    }
    ResidualReport corrupted = residual(EquationId::wave_equilibrium_1p, probe, pot, opts);
    return {clean, corrupted};
}

ClassicalityMetric classicality(const TwoBodySlabs& s, const AssemblyOptions& opts) {
    TwoBodyWaveTerms t = wave_terms_2p(s, opts);
    MaskField excl = exclusion_impl(s, opts, false);
    RealField total(t.single_group.grid());
    for (std::size_t i = 0; i < total.size(); ++i)
        total[i] = t.single_group[i] + t.cross_group[i];
    ClassicalityMetric m;
    m.cross_norm = masked_norm(t.cross_group, excl, NormKind::L2, true);
    m.total_norm = masked_norm(total, excl, NormKind::L2, true);
    m.ratio = m.total_norm > 0.0 ? m.cross_norm / m.total_norm : 0.0;
    return m;
}

RealField velocity_equation_residual(int which, const TwoBodySlabs& s, const Potential& pot,
                                     bool literal, const AssemblyOptions& opts) {
    (void)opts;
    const TwoBodyFields& c = s.curr;
    const int a = which == 1 ? 0 : 1;
    const int b = 1 - a;
    const RealField& va = which == 1 ? c.v1 : c.v2;
    const RealField& vb = which == 1 ? c.v2 : c.v1;
    const double ma = which == 1 ? c.params.m1 : c.params.m2;

    TimeSlabs vas{which == 1 ? s.prev.v1 : s.prev.v2, va, which == 1 ? s.next.v1 : s.next.v2,
                  s.dt};
    RealField dtv = time_derivative(vas);
    RealField da_va = ratio_diff(va, c.node_mask, a, 1);
    RealField vx = pot.gradient(c.rho.grid(), c.params, a, c.t);
    RealField dq = ratio_diff(c.Q, c.node_mask, a, 1);

    RealField out(c.rho.grid());
    if (!literal) {
        // d_t va + va da va + vb db va + (1/ma) da (V+Q)
        RealField db_va = ratio_diff(va, c.node_mask, b, 1);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = dtv[i] + va[i] * da_va[i] + vb[i] * db_va[i] + (vx[i] + dq[i]) / ma;
        return out;
    }
    // printed forms: advection term vb da vb (eq for particle 1) or
    // vb da vb with the partner gradient on the own axis (particle 2), and
    // the 1/m1 factor on both potential gradients
    RealField da_vb = ratio_diff(vb, c.node_mask, a, 1);
    const double m_lit = c.params.m1;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = dtv[i] + va[i] * da_va[i] + vb[i] * da_vb[i] + (vx[i] + dq[i]) / m_lit;
    return out;
}

std::vector<ConvergenceRow> convergence_table(const std::vector<ResidualReport>& by_level) {
    std::vector<ConvergenceRow> rows;
    rows.reserve(by_level.size());
    for (std::size_t i = 0; i < by_level.size(); ++i) {
        ConvergenceRow row;
        row.n = by_level[i].n;
        row.dx = by_level[i].dx;
        row.dt = by_level[i].dt;
        row.norms = by_level[i].norms;
        if (i > 0) {
            row.observed_order_l2 = observed_order(by_level[i - 1].norms.l2,
                                                   by_level[i].norms.l2,
                                                   by_level[i - 1].dx / by_level[i].dx);
            row.monotone = by_level[i].norms.l2 < by_level[i - 1].norms.l2;
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace qhd
