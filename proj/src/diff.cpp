#include "qhd/diff.hpp"

#include <cmath>
#include <numbers>

#include "fft_detail.hpp"

namespace qhd {

namespace {

// ---- compact stencils ----------------------------------------------------
//
// Interior rows are centered; dirichlet boundaries close with one-sided
// stencils of the same formal order. Coefficients are the standard
// Fornberg tables; polynomial-exactness tests pin them down.

struct StencilRow {
    int first_offset;
    std::span<const double> c;
};

// first derivative, order 2
constexpr double c1_fd2_int[] = {-0.5, 0.0, 0.5};
constexpr double c1_fd2_left[] = {-1.5, 2.0, -0.5};
constexpr double c1_fd2_right[] = {0.5, -2.0, 1.5};
// first derivative, order 4
constexpr double c1_fd4_int[] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
constexpr double c1_fd4_j0[] = {-25.0 / 12, 4.0, -3.0, 4.0 / 3, -0.25};
constexpr double c1_fd4_j1[] = {-0.25, -5.0 / 6, 1.5, -0.5, 1.0 / 12};
constexpr double c1_fd4_jm1[] = {-1.0 / 12, 0.5, -1.5, 5.0 / 6, 0.25};
constexpr double c1_fd4_jm0[] = {0.25, -4.0 / 3, 3.0, -4.0, 25.0 / 12};
// second derivative, order 2
constexpr double c2_fd2_int[] = {1.0, -2.0, 1.0};
constexpr double c2_fd2_left[] = {2.0, -5.0, 4.0, -1.0};
constexpr double c2_fd2_right[] = {-1.0, 4.0, -5.0, 2.0};
// second derivative, order 4
constexpr double c2_fd4_int[] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
constexpr double c2_fd4_j0[] = {15.0 / 4, -77.0 / 6, 107.0 / 6, -13.0, 61.0 / 12, -5.0 / 6};
constexpr double c2_fd4_j1[] = {5.0 / 6, -5.0 / 4, -1.0 / 3, 7.0 / 6, -0.5, 1.0 / 12};
constexpr double c2_fd4_jm1[] = {1.0 / 12, -0.5, 7.0 / 6, -1.0 / 3, -5.0 / 4, 5.0 / 6};
constexpr double c2_fd4_jm0[] = {-5.0 / 6, 61.0 / 12, -13.0, 107.0 / 6, -77.0 / 6, 15.0 / 4};

template <typename T>
void fd_line(const T* in, T* out, int n, int in_stride, int out_stride, double dx, int order,
             DiffScheme scheme, bool periodic) {
    const bool fd4 = scheme == DiffScheme::fd4;
    const int radius = fd4 ? 2 : 1;
    StencilRow interior{-radius, {}};
    if (order == 1)
        interior.c = fd4 ? std::span<const double>(c1_fd4_int) : std::span<const double>(c1_fd2_int);
    else
        interior.c = fd4 ? std::span<const double>(c2_fd4_int) : std::span<const double>(c2_fd2_int);
    const double scale = order == 1 ? 1.0 / dx : 1.0 / (dx * dx);

    auto apply_row = [&](int j, const StencilRow& row) {
        T acc{};
        for (std::size_t k = 0; k < row.c.size(); ++k) {
            int idx = j + row.first_offset + static_cast<int>(k);
            if (periodic) idx = (idx % n + n) % n;
            acc += row.c[k] * in[static_cast<std::size_t>(idx) * in_stride];
        }
        out[static_cast<std::size_t>(j) * out_stride] = acc * scale;
    };

    if (periodic) {
        for (int j = 0; j < n; ++j) apply_row(j, interior);
        return;
    }

    // dirichlet: one-sided closures
    for (int j = radius; j < n - radius; ++j) apply_row(j, interior);
    if (order == 1) {
        if (!fd4) {
            apply_row(0, {0, c1_fd2_left});
            apply_row(n - 1, {-2, c1_fd2_right});
        } else {
            apply_row(0, {0, c1_fd4_j0});
            apply_row(1, {-1, c1_fd4_j1});
            apply_row(n - 2, {-3, c1_fd4_jm1});
            apply_row(n - 1, {-4, c1_fd4_jm0});
        }
    } else {
        if (!fd4) {
            apply_row(0, {0, c2_fd2_left});
            apply_row(n - 1, {-3, c2_fd2_right});
        } else {
            apply_row(0, {0, c2_fd4_j0});
            apply_row(1, {-1, c2_fd4_j1});
            apply_row(n - 2, {-4, c2_fd4_jm1});
            apply_row(n - 1, {-5, c2_fd4_jm0});
        }
    }
}

// ---- spectral ------------------------------------------------------------

void spectral_axis(ComplexField& f, int axis, int order) {
    const Grid& g = f.grid();
    const Grid1D& ax = g.axis(axis);
    const int n = ax.n;
    const double L = ax.length();
    const double k0 = 2.0 * std::numbers::pi / L;

    int stride = 1, dist = n, howmany = 1;
    if (g.dim() == 2) {
        const int n2 = g.extent(1);
        if (axis == 0) {
            stride = n2;
            dist = 1;
            howmany = n2;
        } else {
            stride = 1;
            dist = n2;
            howmany = g.extent(0);
        }
    }

    detail::fft_axis(f.data(), n, howmany, stride, dist, -1);

    // Wavenumber multiplier. The Nyquist mode has no well-defined sign for
    // odd derivatives and is zeroed; even derivatives keep it.
    std::vector<std::complex<double>> mult(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const int m = j <= n / 2 ? j : j - n;
        const double k = k0 * m;
        if (order == 1)
            mult[static_cast<std::size_t>(j)] =
                (2 * j == n) ? 0.0 : std::complex<double>(0.0, k);
        else
            mult[static_cast<std::size_t>(j)] = -k * k;
    }
    const double inv_n = 1.0 / n;
    std::complex<double>* d = f.data();
    if (g.dim() == 1) {
        for (int j = 0; j < n; ++j) d[j] *= mult[static_cast<std::size_t>(j)] * inv_n;
    } else {
        const int n1 = g.extent(0), n2 = g.extent(1);
        for (int i1 = 0; i1 < n1; ++i1)
            for (int i2 = 0; i2 < n2; ++i2) {
                const std::complex<double> w =
                    axis == 0 ? mult[static_cast<std::size_t>(i1)] : mult[static_cast<std::size_t>(i2)];
                d[static_cast<std::size_t>(i1) * n2 + i2] *= w * inv_n;
            }
    }

    detail::fft_axis(f.data(), n, howmany, stride, dist, +1);
}

template <typename T>
Field<T> diff_impl(const Field<T>& f, int axis, int order, DiffScheme scheme) {
    const Grid& g = f.grid();
    if (axis < 0 || axis >= g.dim()) throw std::invalid_argument("diff: axis out of range");
    if (order != 1 && order != 2) throw std::invalid_argument("diff: order must be 1 or 2");
    const Grid1D& ax = g.axis(axis);
    const bool periodic = ax.boundary == Boundary::periodic;
    if (scheme == DiffScheme::spectral && !periodic)
        throw std::invalid_argument("diff: spectral scheme requires a periodic axis");

    if (scheme == DiffScheme::spectral) {
        ComplexField work(g);
        for (std::size_t i = 0; i < f.size(); ++i) work[i] = f[i];
        spectral_axis(work, axis, order);
        Field<T> out(g);
        if constexpr (std::is_same_v<T, double>) {
            for (std::size_t i = 0; i < f.size(); ++i) out[i] = work[i].real();
        } else {
            for (std::size_t i = 0; i < f.size(); ++i) out[i] = work[i];
        }
        return out;
    }

    Field<T> out(g);
    const double dx = ax.dx();
    if (g.dim() == 1) {
        fd_line(f.data(), out.data(), ax.n, 1, 1, dx, order, scheme, periodic);
        return out;
    }
    const int n1 = g.extent(0), n2 = g.extent(1);
    if (axis == 0) {
        for (int i2 = 0; i2 < n2; ++i2)
            fd_line(f.data() + i2, out.data() + i2, n1, n2, n2, dx, order, scheme, periodic);
    } else {
        for (int i1 = 0; i1 < n1; ++i1)
            fd_line(f.data() + static_cast<std::size_t>(i1) * n2,
                    out.data() + static_cast<std::size_t>(i1) * n2, n2, 1, 1, dx, order, scheme,
                    periodic);
    }
    return out;
}

}  // namespace

const char* to_string(DiffScheme s) {
    switch (s) {
        case DiffScheme::spectral: return "spectral";
        case DiffScheme::fd2: return "fd2";
        case DiffScheme::fd4: return "fd4";
    }
    return "?";
}

RealField diff(const RealField& f, int axis, int order, DiffScheme scheme) {
    return diff_impl(f, axis, order, scheme);
}

ComplexField diff(const ComplexField& f, int axis, int order, DiffScheme scheme) {
    return diff_impl(f, axis, order, scheme);
}

RealField time_derivative(const TimeSlabs& s) {
    if (!s.prev.same_grid(s.curr) || !s.curr.same_grid(s.next))
        throw std::invalid_argument("time_derivative: mismatched grids");
    RealField out(s.curr.grid());
    const double inv = 1.0 / (2.0 * s.dt);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (s.next[i] - s.prev[i]) * inv;
    return out;
}

RealField second_time_derivative(const TimeSlabs& s) {
    if (!s.prev.same_grid(s.curr) || !s.curr.same_grid(s.next))
        throw std::invalid_argument("second_time_derivative: mismatched grids");
    RealField out(s.curr.grid());
    const double inv = 1.0 / (s.dt * s.dt);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (s.next[i] - 2.0 * s.curr[i] + s.prev[i]) * inv;
    return out;
}

double observed_order(double err_coarse, double err_fine, double ratio) {
    if (!(err_coarse > 0.0) || !(err_fine > 0.0)) return 0.0;
    return std::log(err_coarse / err_fine) / std::log(ratio);
}

}  // namespace qhd
