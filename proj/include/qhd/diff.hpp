#pragma once

#include "qhd/field.hpp"

namespace qhd {

enum class DiffScheme { spectral, fd2, fd4 };

const char* to_string(DiffScheme s);

// Discrete d^order/dx_axis^order. Spectral requires a periodic axis;
// fd2/fd4 are centered with one-sided closures at dirichlet boundaries.
RealField diff(const RealField& f, int axis, int order, DiffScheme scheme);
ComplexField diff(const ComplexField& f, int axis, int order, DiffScheme scheme);

// Centered (f+ - f-)/(2 dt).
RealField time_derivative(const TimeSlabs& slabs);

// Centered (f+ - 2 f0 + f-)/dt^2.
RealField second_time_derivative(const TimeSlabs& slabs);

// Observed order of accuracy from a coarse/fine error pair under
// refinement by `ratio` (default halving the spacing).
double observed_order(double err_coarse, double err_fine, double ratio = 2.0);

}  // namespace qhd
