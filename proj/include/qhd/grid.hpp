#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace qhd {

enum class Boundary { periodic, dirichlet_zero };

// Uniform 1D grid. Periodic grids exclude the right endpoint
// (dx = L/n), dirichlet grids include both endpoints (dx = L/(n-1)).
struct Grid1D {
    int n = 0;
    double x_min = 0.0;
    double x_max = 0.0;
    Boundary boundary = Boundary::periodic;

    double length() const { return x_max - x_min; }
    double dx() const {
        return boundary == Boundary::periodic ? length() / n : length() / (n - 1);
    }
    double point(int i) const { return x_min + i * dx(); }
    std::vector<double> points() const {
        std::vector<double> xs(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = point(i);
        return xs;
    }

    void validate() const {
        if (n < 8) throw std::invalid_argument("Grid1D: need n >= 8");
        if (!(x_max > x_min)) throw std::invalid_argument("Grid1D: x_max must exceed x_min");
    }

    bool operator==(const Grid1D&) const = default;
};

struct Grid2D {
    Grid1D axis1;  // x1, outer (row) index
    Grid1D axis2;  // x2, inner (column) index

    std::size_t size() const {
        return static_cast<std::size_t>(axis1.n) * static_cast<std::size_t>(axis2.n);
    }
    void validate() const {
        axis1.validate();
        axis2.validate();
    }
    bool operator==(const Grid2D&) const = default;
};

// Dimension-erased grid handle carried by every field. Layout over
// (x1, x2) is row-major: index = i1 * n2 + i2.
class Grid {
  public:
    Grid() = default;
    explicit Grid(Grid1D g) : dim_(1), a1_(g) { a1_.validate(); }
    explicit Grid(Grid2D g) : dim_(2), a1_(g.axis1), a2_(g.axis2) { g.validate(); }

    int dim() const { return dim_; }
    const Grid1D& axis(int i) const {
        if (i < 0 || i >= dim_) throw std::invalid_argument("Grid::axis out of range");
        return i == 0 ? a1_ : a2_;
    }
    int extent(int i) const { return axis(i).n; }
    std::size_t size() const {
        return dim_ == 1 ? static_cast<std::size_t>(a1_.n)
                         : static_cast<std::size_t>(a1_.n) * static_cast<std::size_t>(a2_.n);
    }
    double cell_volume() const {
        return dim_ == 1 ? a1_.dx() : a1_.dx() * a2_.dx();
    }
    std::size_t index(int i1, int i2 = 0) const {
        return dim_ == 1 ? static_cast<std::size_t>(i1)
                         : static_cast<std::size_t>(i1) * static_cast<std::size_t>(a2_.n) +
                               static_cast<std::size_t>(i2);
    }
    Grid2D as_2d() const {
        if (dim_ != 2) throw std::invalid_argument("Grid: not 2-dimensional");
        return Grid2D{a1_, a2_};
    }

    bool operator==(const Grid&) const = default;

  private:
    int dim_ = 0;
    Grid1D a1_{};
    Grid1D a2_{};
};

}  // namespace qhd
