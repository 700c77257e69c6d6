#pragma once

#include <functional>
#include <optional>

#include "qhd/diff.hpp"
#include "qhd/field.hpp"

namespace qhd {

struct PhysParams {
    double hbar = 1.0;
    double m = 1.0;             // single-particle mass
    double m1 = 1.0, m2 = 1.0;  // two-particle masses

    void validate() const {
        if (!(hbar > 0) || !(m > 0) || !(m1 > 0) || !(m2 > 0))
            throw std::invalid_argument("PhysParams: all parameters must be positive");
    }
    double mass_for_axis(int dim, int axis) const {
        if (dim == 1) return m;
        return axis == 0 ? m1 : m2;
    }
};

// External potential V(x, t) = V0(x) * multiplier(t). The coupled_harmonic
// kind lives on 2D grids only: V = m1 w^2 (x1^2 + x2^2)/2 + kappa (x1 - x2)^2.
class Potential {
  public:
    enum class Kind { free, harmonic, barrier, coupled_harmonic, custom_samples };

    static Potential free_space() { return Potential(Kind::free); }
    static Potential harmonic(double omega, double center) {
        Potential p(Kind::harmonic);
        p.omega_ = omega;
        p.center_ = center;
        return p;
    }
    static Potential barrier(double height, double width, double center) {
        Potential p(Kind::barrier);
        p.height_ = height;
        p.width_ = width;
        p.center_ = center;
        return p;
    }
    static Potential coupled_harmonic(double omega, double kappa) {
        Potential p(Kind::coupled_harmonic);
        p.omega_ = omega;
        p.kappa_ = kappa;
        return p;
    }
    static Potential custom(RealField samples) {
        Potential p(Kind::custom_samples);
        if (!all_finite(samples)) throw std::invalid_argument("Potential: non-finite samples");
        p.samples_ = std::move(samples);
        return p;
    }

    Kind kind() const { return kind_; }
    double omega() const { return omega_; }
    double kappa() const { return kappa_; }
    double center() const { return center_; }

    void set_time_multiplier(std::function<double(double)> f) { multiplier_ = std::move(f); }
    bool time_dependent() const { return static_cast<bool>(multiplier_); }
    double multiplier(double t) const { return multiplier_ ? multiplier_(t) : 1.0; }

    // Spatial part only, multiplier not applied.
    RealField sample_base(const Grid& g, const PhysParams& p) const;
    RealField sample(const Grid& g, const PhysParams& p, double t) const;
    // Spatial gradient; analytic for the closed-form kinds, `fallback`
    // differencing for sampled ones.
    RealField gradient(const Grid& g, const PhysParams& p, int axis, double t,
                       DiffScheme fallback = DiffScheme::fd4) const;

  private:
    explicit Potential(Kind k) : kind_(k) {}

    Kind kind_;
    double omega_ = 0.0, kappa_ = 0.0, center_ = 0.0, height_ = 0.0, width_ = 0.0;
    std::optional<RealField> samples_;
    std::function<double(double)> multiplier_;
};

}  // namespace qhd
