#pragma once

#include <complex>

namespace qhd::detail {

// In-place batched 1D complex DFT along one axis of a strided layout.
// sign: -1 forward, +1 backward (unnormalized, FFTW convention).
// Plans are cached per shape and created with FFTW_ESTIMATE so results
// are reproducible run to run; creation is serialized, execution is not.
void fft_axis(std::complex<double>* data, int n_axis, int howmany, int stride, int dist,
              int sign);

}  // namespace qhd::detail
