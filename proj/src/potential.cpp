#include "qhd/potential.hpp"

namespace qhd {

RealField Potential::sample_base(const Grid& g, const PhysParams& p) const {
    const double mul = 1.0;
    RealField out(g);
    switch (kind_) {
        case Kind::free:
            return out;
        case Kind::harmonic: {
            if (g.dim() != 1)
                throw std::invalid_argument("harmonic potential expects a 1D grid");
            const double c = 0.5 * p.m * omega_ * omega_;
            for (int i = 0; i < g.extent(0); ++i) {
                const double x = g.axis(0).point(i) - center_;
                out.at(i) = mul * c * x * x;
            }
            return out;
        }
        case Kind::barrier: {
            if (g.dim() != 1)
                throw std::invalid_argument("barrier potential expects a 1D grid");
            for (int i = 0; i < g.extent(0); ++i) {
                const double x = g.axis(0).point(i);
                out.at(i) = std::abs(x - center_) <= 0.5 * width_ ? mul * height_ : 0.0;
            }
            return out;
        }
        case Kind::coupled_harmonic: {
            if (g.dim() != 2)
                throw std::invalid_argument("coupled_harmonic potential expects a 2D grid");
            const double c = 0.5 * p.m1 * omega_ * omega_;
            for (int i1 = 0; i1 < g.extent(0); ++i1)
                for (int i2 = 0; i2 < g.extent(1); ++i2) {
                    const double x1 = g.axis(0).point(i1);
                    const double x2 = g.axis(1).point(i2);
                    const double d = x1 - x2;
                    out.at(i1, i2) = mul * (c * (x1 * x1 + x2 * x2) + kappa_ * d * d);
                }
            return out;
        }
        case Kind::custom_samples: {
            if (samples_->grid() != g)
                throw std::invalid_argument("custom potential sampled on a different grid");
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = mul * (*samples_)[i];
            return out;
        }
    }
    return out;
}

RealField Potential::sample(const Grid& g, const PhysParams& p, double t) const {
    RealField out = sample_base(g, p);
    const double mul = multiplier(t);
    if (mul != 1.0)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mul;
    return out;
}

RealField Potential::gradient(const Grid& g, const PhysParams& p, int axis, double t,
                              DiffScheme fallback) const {
    const double mul = multiplier(t);
    RealField out(g);
    switch (kind_) {
        case Kind::free:
            return out;
        case Kind::harmonic: {
            const double c = p.m * omega_ * omega_;
            for (int i = 0; i < g.extent(0); ++i)
                out.at(i) = mul * c * (g.axis(0).point(i) - center_);
            return out;
        }
        case Kind::coupled_harmonic: {
            const double c = p.m1 * omega_ * omega_;
            const double sign = axis == 0 ? 1.0 : -1.0;
            for (int i1 = 0; i1 < g.extent(0); ++i1)
                for (int i2 = 0; i2 < g.extent(1); ++i2) {
                    const double x1 = g.axis(0).point(i1);
                    const double x2 = g.axis(1).point(i2);
                    const double xa = axis == 0 ? x1 : x2;
                    out.at(i1, i2) = mul * (c * xa + 2.0 * kappa_ * sign * (x1 - x2));
                }
            return out;
        }
        case Kind::barrier:
        case Kind::custom_samples:
            return diff(sample(g, p, t), axis, 1, fallback);
    }
    return out;
}

}  // namespace qhd
