// Grid/field containers and differential operators: analytic oracles for
// the derivative kernels, polynomial exactness of the stencil tables, and
// two-grid refinement estimates of the formal orders.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "qhd/diff.hpp"
#include "qhd/field.hpp"
#include "qhd/grid.hpp"

using namespace qhd;
using std::numbers::pi;

namespace {

Grid periodic_1d(int n, double a = -10.0, double b = 10.0) {
    return Grid(Grid1D{n, a, b, Boundary::periodic});
}

Grid dirichlet_1d(int n, double a = -10.0, double b = 10.0) {
    return Grid(Grid1D{n, a, b, Boundary::dirichlet_zero});
}

template <typename Fn>
RealField sample(const Grid& g, Fn fn) {
    RealField f(g);
    if constexpr (std::is_invocable_v<Fn, double, double>) {
        for (int i1 = 0; i1 < g.extent(0); ++i1)
            for (int i2 = 0; i2 < g.extent(1); ++i2)
                f.at(i1, i2) = fn(g.axis(0).point(i1), g.axis(1).point(i2));
    } else {
        for (int i = 0; i < g.extent(0); ++i) f.at(i) = fn(g.axis(0).point(i));
    }
    return f;
}

double max_abs_diff(const RealField& a, const RealField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("grid invariants") {
    CHECK_THROWS_AS(Grid(Grid1D{4, 0.0, 1.0, Boundary::periodic}), std::invalid_argument);
    CHECK_THROWS_AS(Grid(Grid1D{16, 1.0, 1.0, Boundary::periodic}), std::invalid_argument);

    Grid1D p{16, 0.0, 1.0, Boundary::periodic};
    CHECK(p.dx() == doctest::Approx(1.0 / 16).epsilon(1e-15));
    Grid1D d{16, 0.0, 1.0, Boundary::dirichlet_zero};
    CHECK(d.dx() == doctest::Approx(1.0 / 15).epsilon(1e-15));

    Grid g2(Grid2D{p, d});
    CHECK(g2.size() == 256);
    CHECK(g2.cell_volume() == doctest::Approx(p.dx() * d.dx()));
    // row-major: x1 outer, x2 inner
    CHECK(g2.index(3, 5) == 3 * 16 + 5);
}

TEST_CASE("derivative of a constant field is zero for every scheme") {
    for (auto scheme : {DiffScheme::spectral, DiffScheme::fd2, DiffScheme::fd4}) {
        Grid g = periodic_1d(64);
        RealField f = sample(g, [](double) { return 3.7; });
        for (int order : {1, 2}) {
            RealField df = diff(f, 0, order, scheme);
            CHECK(norm(df, NormKind::Linf, false) < 1e-11);
        }
    }
}

TEST_CASE("spectral first derivative of sin(kx) is k cos(kx) to 1e-12 relative") {
    Grid g = periodic_1d(128, 0.0, 2.0 * pi);
    for (double k : {1.0, 5.0, 21.0}) {
        RealField f = sample(g, [k](double x) { return std::sin(k * x); });
        RealField expect = sample(g, [k](double x) { return k * std::cos(k * x); });
        RealField df = diff(f, 0, 1, DiffScheme::spectral);
        CHECK(max_abs_diff(df, expect) < 1e-12 * k);
    }
}

TEST_CASE("spectral derivative of e^{ikx} equals ik e^{ikx} for representable k") {
    const int n = 64;
    Grid g = periodic_1d(n, 0.0, 2.0 * pi);
    for (int m : {1, 7, 20, 31}) {  // below the Nyquist mode n/2 = 32
        ComplexField f(g);
        for (int i = 0; i < n; ++i) {
            double x = g.axis(0).point(i);
            f.at(i) = std::exp(std::complex<double>(0.0, m * x));
        }
        ComplexField df = diff(f, 0, 1, DiffScheme::spectral);
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            auto expect = std::complex<double>(0.0, static_cast<double>(m)) * f.at(i);
            worst = std::max(worst, std::abs(df.at(i) - expect) / std::abs(expect));
        }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("fd2 second derivative exact for x^2 on dirichlet interior") {
    Grid g = dirichlet_1d(32, -1.0, 1.0);
    RealField f = sample(g, [](double x) { return x * x; });
    RealField d2 = diff(f, 0, 2, DiffScheme::fd2);
    for (int i = 0; i < g.extent(0); ++i)
        CHECK(d2.at(i) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("one-sided closures keep formal polynomial exactness") {
    Grid g = dirichlet_1d(24, 0.0, 1.0);
    // fd4 first derivative: exact through degree 4
    RealField f4 = sample(g, [](double x) { return 1 + x * (2 + x * (3 + x * (4 + 5 * x))); });
    RealField expect1 =
        sample(g, [](double x) { return 2 + x * (6 + x * (12 + 20 * x)); });
    CHECK(max_abs_diff(diff(f4, 0, 1, DiffScheme::fd4), expect1) < 1e-9);
    // fd4 second derivative: exact through degree 5
    RealField f5 = sample(g, [](double x) {
        return x * (1 + x * (1 + x * (1 + x * (1 + x))));
    });
    RealField expect2 = sample(g, [](double x) {
        return 2 + x * (6 + x * (12 + 20 * x));
    });
    CHECK(max_abs_diff(diff(f5, 0, 2, DiffScheme::fd4), expect2) < 1e-8);
    // fd2 first derivative: exact through degree 2
    RealField f2 = sample(g, [](double x) { return 1 + 2 * x + 3 * x * x; });
    RealField expect3 = sample(g, [](double x) { return 2 + 6 * x; });
    CHECK(max_abs_diff(diff(f2, 0, 1, DiffScheme::fd2), expect3) < 1e-10);
}

TEST_CASE("two-grid refinement estimate recovers fd2/fd4 orders") {
    auto max_err = [](int n, DiffScheme s, int order) {
        Grid g = periodic_1d(n, 0.0, 2.0 * pi);
        RealField f = sample(g, [](double x) { return std::exp(std::sin(x)); });
        RealField exact =
            order == 1
                ? sample(g, [](double x) { return std::cos(x) * std::exp(std::sin(x)); })
                : sample(g, [](double x) {
                      double c = std::cos(x), s2 = std::sin(x);
                      return (c * c - s2) * std::exp(std::sin(x));
                  });
        return max_abs_diff(diff(f, 0, order, s), exact);
    };
    for (int order : {1, 2}) {
        double p2 = observed_order(max_err(64, DiffScheme::fd2, order),
                                   max_err(128, DiffScheme::fd2, order));
        CHECK(p2 > 1.8);
        CHECK(p2 < 2.2);
        double p4 = observed_order(max_err(64, DiffScheme::fd4, order),
                                   max_err(128, DiffScheme::fd4, order));
        CHECK(p4 > 3.7);
        CHECK(p4 < 4.3);
    }
}

TEST_CASE("mixed partial derivatives commute to discretization tolerance") {
    Grid1D ax{96, -8.0, 8.0, Boundary::periodic};
    Grid g(Grid2D{ax, ax});
    RealField f = sample(g, [](double x1, double x2) {
        return std::exp(-0.3 * x1 * x1 - 0.2 * x2 * x2 - 0.1 * x1 * x2);
    });
    for (auto scheme : {DiffScheme::spectral, DiffScheme::fd4}) {
        RealField d12 = diff(diff(f, 0, 1, scheme), 1, 1, scheme);
        RealField d21 = diff(diff(f, 1, 1, scheme), 0, 1, scheme);
        double tol = scheme == DiffScheme::spectral ? 1e-12 : 1e-6;
        CHECK(max_abs_diff(d12, d21) < tol);
    }
}

TEST_CASE("second time derivative: trivial and oscillatory oracles") {
    Grid g = periodic_1d(32);
    RealField c = sample(g, [](double) { return 0.4; });

    SUBCASE("identical snapshots give zero") {
        TimeSlabs s = make_time_slabs(c, c, c, 0.1);
        CHECK(norm(second_time_derivative(s), NormKind::Linf, false) < 1e-13);
    }
    SUBCASE("quadratic in t is exact") {
        double dt = 0.37;
        auto at = [&](double t) { return sample(g, [t](double) { return t * t; }); };
        TimeSlabs s = make_time_slabs(at(-dt), at(0.0), at(dt), dt);
        RealField d2 = second_time_derivative(s);
        CHECK(d2.at(0) == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("cos(wt) matches -w^2 cos(wt) with Taylor remainder bound") {
        const double w = 2.0, dt = 0.01 / w;  // w dt = 0.01
        const double t0 = 0.3;
        auto at = [&](double t) { return sample(g, [&, t](double) { return std::cos(w * t); }); };
        TimeSlabs s = make_time_slabs(at(t0 - dt), at(t0), at(t0 + dt), dt);
        double got = second_time_derivative(s).at(0);
        double expect = -w * w * std::cos(w * t0);
        double rel = std::abs(got / expect - 1.0);
        CHECK(rel < (w * dt) * (w * dt) / 12.0 * 1.05);
        CHECK(rel > 0.0);
    }
    SUBCASE("mismatched grids rejected") {
        RealField other(periodic_1d(64));
        CHECK_THROWS_AS(make_time_slabs(c, c, other, 0.1), std::invalid_argument);
        CHECK_THROWS_AS(make_time_slabs(c, c, c, 0.0), std::invalid_argument);
    }
}

TEST_CASE("norms: trivial values and the normalized-Gaussian integral") {
    Grid1D ax{64, -2.0, 2.0, Boundary::periodic};
    Grid g2(Grid2D{ax, ax});

    RealField zero(g2);
    CHECK(norm(zero, NormKind::L1, true) == 0.0);
    CHECK(norm(zero, NormKind::L2, true) == 0.0);
    CHECK(norm(zero, NormKind::Linf, true) == 0.0);

    RealField ind(g2);
    ind.at(10, 20) = 1.0;
    CHECK(norm(ind, NormKind::L1, true) ==
          doctest::Approx(ax.dx() * ax.dx()).epsilon(1e-14));

    // analytic normal density integrates to 1 on a wide domain
    const double sigma = 0.7;
    Grid g = periodic_1d(512, -16.0, 16.0);
    RealField rho = sample(g, [sigma](double x) {
        return std::exp(-x * x / (2 * sigma * sigma)) / (std::sqrt(2 * pi) * sigma);
    });
    CHECK(std::abs(norm(rho, NormKind::L1, true) - 1.0) < 1e-10);
}

TEST_CASE("masks: threshold, dilation, fill, fraction") {
    Grid g = periodic_1d(16, 0.0, 16.0);
    RealField rho = sample(g, [](double x) { return x == 5.0 ? 0.0 : 1.0; });
    MaskField m = below_threshold_mask(rho, 0.5);
    CHECK(m.at(5) == 1);
    CHECK(m.at(4) == 0);

    MaskField d = dilate(m, 2);
    for (int i = 3; i <= 7; ++i) CHECK(d.at(i) == 1);
    CHECK(d.at(2) == 0);
    CHECK(d.at(8) == 0);
    CHECK(included_fraction(d) == doctest::Approx(11.0 / 16));

    // periodic wrap
    MaskField edge(g);
    edge.at(0) = 1;
    MaskField de = dilate(edge, 1);
    CHECK(de.at(15) == 1);
    CHECK(de.at(1) == 1);

    RealField filled = masked_fill(rho, m, -1.0);
    CHECK(filled.at(5) == -1.0);
    CHECK(filled.at(6) == 1.0);
}

TEST_CASE("scheme/boundary mismatch and axis range rejected") {
    Grid g = dirichlet_1d(32);
    RealField f(g, 1.0);
    CHECK_THROWS_AS(diff(f, 0, 1, DiffScheme::spectral), std::invalid_argument);
    CHECK_THROWS_AS(diff(f, 1, 1, DiffScheme::fd2), std::invalid_argument);
    CHECK_THROWS_AS(diff(f, 0, 3, DiffScheme::fd2), std::invalid_argument);
}
