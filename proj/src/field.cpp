#include "qhd/field.hpp"

namespace qhd {

double norm(const RealField& f, NormKind kind, bool weighted_by_cell_volume) {
    const double dv = weighted_by_cell_volume ? f.grid().cell_volume() : 1.0;
    switch (kind) {
        case NormKind::L1: {
            double s = 0.0;
            for (std::size_t i = 0; i < f.size(); ++i) s += std::abs(f[i]);
            return s * dv;
        }
        case NormKind::L2: {
            double s = 0.0;
            for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * f[i];
            return std::sqrt(s * dv);
        }
        case NormKind::Linf: {
            double s = 0.0;
            for (std::size_t i = 0; i < f.size(); ++i) s = std::max(s, std::abs(f[i]));
            return s;
        }
    }
    return 0.0;
}

double l2_norm(const ComplexField& f, bool weighted_by_cell_volume) {
    const double dv = weighted_by_cell_volume ? f.grid().cell_volume() : 1.0;
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += std::norm(f[i]);
    return std::sqrt(s * dv);
}

double masked_norm(const RealField& f, const MaskField& excluded, NormKind kind,
                   bool weighted_by_cell_volume) {
    if (f.grid() != excluded.grid()) throw std::invalid_argument("masked_norm: grid mismatch");
    const double dv = weighted_by_cell_volume ? f.grid().cell_volume() : 1.0;
    double s = 0.0;
    switch (kind) {
        case NormKind::L1:
            for (std::size_t i = 0; i < f.size(); ++i)
                if (!excluded[i]) s += std::abs(f[i]);
            return s * dv;
        case NormKind::L2:
            for (std::size_t i = 0; i < f.size(); ++i)
                if (!excluded[i]) s += f[i] * f[i];
            return std::sqrt(s * dv);
        case NormKind::Linf:
            for (std::size_t i = 0; i < f.size(); ++i)
                if (!excluded[i]) s = std::max(s, std::abs(f[i]));
            return s;
    }
    return 0.0;
}

MaskField below_threshold_mask(const RealField& rho, double threshold) {
    MaskField m(rho.grid());
    for (std::size_t i = 0; i < rho.size(); ++i) m[i] = rho[i] < threshold ? 1 : 0;
    return m;
}

namespace {

void dilate_axis(const MaskField& in, MaskField& out, int axis, int halo) {
    const Grid& g = in.grid();
    const Grid1D& ax = g.axis(axis);
    const bool wrap = ax.boundary == Boundary::periodic;
    const int n = ax.n;
    auto line = [&](int other, auto get, auto set) {
        (void)other;
        for (int j = 0; j < n; ++j) {
            std::uint8_t v = 0;
            for (int o = -halo; o <= halo && !v; ++o) {
                int idx = j + o;
                if (wrap)
                    idx = (idx % n + n) % n;
                else if (idx < 0 || idx >= n)
                    continue;
                v = get(idx);
            }
            set(j, v);
        }
    };
    if (g.dim() == 1) {
        line(0, [&](int j) { return in[static_cast<std::size_t>(j)]; },
             [&](int j, std::uint8_t v) { out[static_cast<std::size_t>(j)] = v; });
        return;
    }
    const int n1 = g.extent(0), n2 = g.extent(1);
    if (axis == 0) {
        for (int i2 = 0; i2 < n2; ++i2)
            line(i2, [&](int j) { return in.at(j, i2); },
                 [&](int j, std::uint8_t v) { out.at(j, i2) = v; });
    } else {
        for (int i1 = 0; i1 < n1; ++i1)
            line(i1, [&](int j) { return in.at(i1, j); },
                 [&](int j, std::uint8_t v) { out.at(i1, j) = v; });
    }
}

}  // namespace

MaskField dilate(const MaskField& mask, int halo) {
    if (halo <= 0) return mask;
    MaskField tmp(mask.grid());
    dilate_axis(mask, tmp, 0, halo);
    if (mask.grid().dim() == 1) return tmp;
    MaskField out(mask.grid());
    dilate_axis(tmp, out, 1, halo);
    return out;
}

double included_fraction(const MaskField& excluded) {
    std::size_t kept = 0;
    for (std::size_t i = 0; i < excluded.size(); ++i)
        if (!excluded[i]) ++kept;
    return static_cast<double>(kept) / static_cast<double>(excluded.size());
}

RealField masked_fill(const RealField& f, const MaskField& excluded, double value) {
    if (f.grid() != excluded.grid()) throw std::invalid_argument("masked_fill: grid mismatch");
    RealField out = f;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (excluded[i]) out[i] = value;
    return out;
}

bool all_finite(const RealField& f) {
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!std::isfinite(f[i])) return false;
    return true;
}

bool all_finite(const ComplexField& f) {
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!std::isfinite(f[i].real()) || !std::isfinite(f[i].imag())) return false;
    return true;
}

}  // namespace qhd
