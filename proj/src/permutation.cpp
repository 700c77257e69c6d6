#include "qhd/permutation.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace qhd {

namespace {

template <typename T>
Field<T> swap_impl(const Field<T>& f, const SwapMap& map) {
    if (f.grid().dim() != 2 || f.grid().as_2d() != map.grid)
        throw std::invalid_argument("swap_axes: field not on the map's grid");
    const int n = map.grid.axis1.n;
    Field<T> out(f.grid());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.at(i, j) = f.at(j, i);
    return out;
}

}  // namespace

RealField swap_axes(const RealField& f, const SwapMap& map) { return swap_impl(f, map); }
ComplexField swap_axes(const ComplexField& f, const SwapMap& map) { return swap_impl(f, map); }
MaskField swap_axes(const MaskField& f, const SwapMap& map) { return swap_impl(f, map); }

LambdaOperator::LambdaOperator(const TwoBodySlabs& slabs, const AssemblyOptions& opts)
    : v1_(slabs.curr.v1), v2_(slabs.curr.v2), mask_(slabs.curr.node_mask), opts_(opts) {
    const Grid& g = v1_.grid();
    if (g.dim() != 2) throw std::invalid_argument("LambdaOperator: two-body slabs required");

    v1_sq_ = RealField(g);
    v2_sq_ = RealField(g);
    for (std::size_t i = 0; i < v1_.size(); ++i) {
        v1_sq_[i] = v1_[i] * v1_[i];
        v2_sq_[i] = v2_[i] * v2_[i];
    }

    TimeSlabs v1s{slabs.prev.v1, slabs.curr.v1, slabs.next.v1, slabs.dt};
    TimeSlabs v2s{slabs.prev.v2, slabs.curr.v2, slabs.next.v2, slabs.dt};
    RealField dtv1 = time_derivative(v1s);
    RealField dtv2 = time_derivative(v2s);
    d1v1_ = ratio_diff(v1_, mask_, 0, 1);
    d2v2_ = ratio_diff(v2_, mask_, 1, 1);

    a1_ = RealField(g);
    a2_ = RealField(g);
    for (std::size_t i = 0; i < a1_.size(); ++i) {
        a1_[i] = dtv1[i] + v1_[i] * d1v1_[i];
        a2_[i] = dtv2[i] + v2_[i] * d2v2_[i];
    }
}

RealField LambdaOperator::apply(const RealField& rho) const {
    const Grid& g = v1_.grid();
    if (rho.grid() != g) throw std::invalid_argument("LambdaOperator::apply: grid mismatch");

    RealField out(g);
    for (int axis = 0; axis < 2; ++axis) {
        const RealField& vsq = axis == 0 ? v1_sq_ : v2_sq_;
        const RealField& acc = axis == 0 ? a1_ : a2_;
        RealField conv(g), drag(g);
        for (std::size_t i = 0; i < rho.size(); ++i) {
            conv[i] = rho[i] * vsq[i];
            drag[i] = rho[i] * acc[i];
        }
        RealField d2conv = ratio_diff(conv, mask_, axis, 2);
        RealField ddrag = ratio_diff(drag, mask_, axis, 1);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += d2conv[i] - ddrag[i];
    }

    RealField j1(g), j2(g);
    for (std::size_t i = 0; i < rho.size(); ++i) {
        j1[i] = rho[i] * v1_[i];
        j2[i] = rho[i] * v2_[i];
    }
    RealField d2j2 = diff(j2, 1, 1, opts_.scheme);
    RealField d1j1 = diff(j1, 0, 1, opts_.scheme);
    RealField d12j2 = diff(d2j2, 0, 1, opts_.scheme);
    RealField d21j1 = diff(d1j1, 1, 1, opts_.scheme);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] += d1v1_[i] * d2j2[i] + v1_[i] * d12j2[i] + d2v2_[i] * d1j1[i] +
                  v2_[i] * d21j1[i];
    return out;
}

double lambda_symmetry_defect(const LambdaOperator& op, std::span<const RealField> probes,
                              const SwapMap& map) {
    MaskField sym_mask = op.node_mask();
    MaskField swapped = swap_axes(op.node_mask(), map);
    for (std::size_t i = 0; i < sym_mask.size(); ++i)
        sym_mask[i] = sym_mask[i] || swapped[i] ? 1 : 0;
    MaskField excl = dilate(sym_mask, op.options().halo + 2);

    double worst = 0.0;
    for (const RealField& rho : probes) {
        RealField lr = op.apply(rho);
        RealField swap_lr = swap_axes(lr, map);
        RealField l_swap = op.apply(swap_axes(rho, map));
        RealField d = swap_lr - l_swap;
        const double denom = masked_norm(lr, excl, NormKind::Linf, false);
        if (!(denom > 0.0)) continue;
        worst = std::max(worst, masked_norm(d, excl, NormKind::Linf, false) / denom);
    }
    return worst;
}

std::vector<RealField> random_probe_densities(const Grid& g, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    std::vector<RealField> probes;
    probes.reserve(static_cast<std::size_t>(count));
    const double L1 = g.axis(0).length();
    const double L2 = g.dim() == 2 ? g.axis(1).length() : 1.0;
    for (int k = 0; k < count; ++k) {
        RealField f(g, 2.0);
        for (int m1 = 0; m1 <= 2; ++m1)
            for (int m2 = 0; m2 <= 2; ++m2) {
                if (m1 == 0 && m2 == 0) continue;
                const double a = amp(rng), b = amp(rng);
                const double w = 1.0 / (1.0 + m1 + m2);
                if (g.dim() == 1) {
                    if (m2 > 0) continue;
                    for (int i = 0; i < g.extent(0); ++i) {
                        const double ph = 2 * std::numbers::pi * m1 * g.axis(0).point(i) / L1;
                        f.at(i) += w * (a * std::sin(ph) + b * std::cos(ph));
                    }
                } else {
                    for (int i1 = 0; i1 < g.extent(0); ++i1)
                        for (int i2 = 0; i2 < g.extent(1); ++i2) {
                            const double p1 = 2 * std::numbers::pi * m1 * g.axis(0).point(i1) / L1;
                            const double p2 = 2 * std::numbers::pi * m2 * g.axis(1).point(i2) / L2;
                            f.at(i1, i2) += w * (a * std::sin(p1 + p2) + b * std::cos(p1 - p2));
                        }
                }
            }
        probes.push_back(std::move(f));
    }
    return probes;
}

BornPermutationReport born_permutation_test(const QuantumState& initial, const Potential& pot,
                                            double dt, int snapshots, int stride,
                                            const ExtractOptions& eopts,
                                            const EvolveOptions& vopts,
                                            const AssemblyOptions& aopts) {
    const Grid& g = initial.psi.grid();
    SwapMap map = SwapMap::create(g.as_2d());

    BornPermutationReport report;
    QuantumState state = initial;
    for (int k = 0; k <= snapshots; ++k) {
        if (k > 0) state = evolve(state, pot, dt, stride, vopts);

        TwoBodySlabs slabs = extract_slabs_2p(state, pot, dt, eopts, vopts);
        LambdaOperator lambda(slabs, aopts);

        auto delta_of = [&](const RealField& rho) { return rho - swap_axes(rho, map); };
        RealField d_prev = delta_of(slabs.prev.rho);
        RealField d_curr = delta_of(slabs.curr.rho);
        RealField d_next = delta_of(slabs.next.rho);
        RealField d2t = second_time_derivative(make_time_slabs(d_prev, d_curr, d_next, dt));
        RealField ld = lambda.apply(d_curr);
        RealField eq21 = d2t - ld;

        MaskField excl = interior_exclusion(slabs, aopts);
        MaskField excl_sw = swap_axes(excl, map);
        for (std::size_t i = 0; i < excl.size(); ++i)
            excl[i] = excl[i] || excl_sw[i] ? 1 : 0;

        BornPermutationEntry e;
        e.t = state.t;
        e.delta_linf = norm(d_curr, NormKind::Linf, false);
        e.delta_l2 = norm(d_curr, NormKind::L2, true);
        e.rho_linf = norm(slabs.curr.rho, NormKind::Linf, false);
        e.eq21_linf = masked_norm(eq21, excl, NormKind::Linf, false);
        e.eq21_l2 = masked_norm(eq21, excl, NormKind::L2, true);
        report.entries.push_back(e);
        report.max_delta_linf = std::max(report.max_delta_linf, e.delta_linf);
        report.max_eq21_linf = std::max(report.max_eq21_linf, e.eq21_linf);
    }
    return report;
}

}  // namespace qhd
