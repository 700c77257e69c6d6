#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "qhd/grid.hpp"

namespace qhd {

// Sampled field over a Grid, value semantics throughout.
template <typename T>
class Field {
  public:
    Field() = default;
    explicit Field(Grid g, T fill = T{})
        : grid_(g), v_(g.size(), fill) {}
    Field(Grid g, std::vector<T> values) : grid_(g), v_(std::move(values)) {
        if (v_.size() != grid_.size())
            throw std::invalid_argument("Field: value count does not match grid");
    }

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return v_.size(); }

    T& operator[](std::size_t i) { return v_[i]; }
    const T& operator[](std::size_t i) const { return v_[i]; }
    T& at(int i1, int i2 = 0) { return v_[grid_.index(i1, i2)]; }
    const T& at(int i1, int i2 = 0) const { return v_[grid_.index(i1, i2)]; }

    T* data() { return v_.data(); }
    const T* data() const { return v_.data(); }
    std::span<T> values() { return v_; }
    std::span<const T> values() const { return v_; }

    bool same_grid(const Field& other) const { return grid_ == other.grid_; }

  private:
    Grid grid_{};
    std::vector<T> v_{};
};

using RealField = Field<double>;
using ComplexField = Field<std::complex<double>>;

// 1 marks an excluded cell.
using MaskField = Field<std::uint8_t>;

// Three consecutive snapshots at t-dt, t, t+dt.
struct TimeSlabs {
    RealField prev, curr, next;
    double dt = 0.0;
};

inline TimeSlabs make_time_slabs(RealField prev, RealField curr, RealField next, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("TimeSlabs: dt must be positive");
    if (!prev.same_grid(curr) || !curr.same_grid(next))
        throw std::invalid_argument("TimeSlabs: snapshots on mismatched grids");
    return TimeSlabs{std::move(prev), std::move(curr), std::move(next), dt};
}

// ---- field algebra helpers (allocate a result; inputs untouched) ----

template <typename T>
Field<T> zip(const Field<T>& a, const Field<T>& b, auto op) {
    if (!a.same_grid(b)) throw std::invalid_argument("zip: grid mismatch");
    Field<T> out(a.grid());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = op(a[i], b[i]);
    return out;
}

template <typename T>
Field<T> map(const Field<T>& a, auto op) {
    Field<T> out(a.grid());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = op(a[i]);
    return out;
}

inline RealField operator+(const RealField& a, const RealField& b) {
    return zip(a, b, [](double x, double y) { return x + y; });
}
inline RealField operator-(const RealField& a, const RealField& b) {
    return zip(a, b, [](double x, double y) { return x - y; });
}
inline RealField operator*(const RealField& a, const RealField& b) {
    return zip(a, b, [](double x, double y) { return x * y; });
}
inline RealField operator*(double s, const RealField& a) {
    return map(a, [s](double x) { return s * x; });
}

enum class NormKind { L1, L2, Linf };

double norm(const RealField& f, NormKind kind, bool weighted_by_cell_volume);
double l2_norm(const ComplexField& f, bool weighted_by_cell_volume);

// Norm over cells where excluded == 0.
double masked_norm(const RealField& f, const MaskField& excluded, NormKind kind,
                   bool weighted_by_cell_volume);

// Mask of cells with rho < threshold.
MaskField below_threshold_mask(const RealField& rho, double threshold);

// Grow the excluded set by `halo` cells along every axis (Chebyshev ball);
// periodic axes wrap.
MaskField dilate(const MaskField& mask, int halo);

double included_fraction(const MaskField& excluded);

// Copy of f with excluded cells set to `value` (keeps tail garbage out of
// compact difference stencils).
RealField masked_fill(const RealField& f, const MaskField& excluded, double value = 0.0);

bool all_finite(const RealField& f);
bool all_finite(const ComplexField& f);

}  // namespace qhd
