#pragma once

#include <span>

#include "snls/grid.hpp"

namespace snls::fft {

// Thin wrapper over FFTW. Plans are created once per (dim, n) under a global
// lock and executed with the new-array interface, which is thread safe.
// Transforms are unnormalized; inverse(forward(x)) == N^d * x.

void forward(std::span<const cplx> in, std::span<cplx> out, int dim, int n);
void inverse(std::span<const cplx> in, std::span<cplx> out, int dim, int n);

inline void forward(ComplexField& f) { forward(f.values, f.values, f.grid.dim, f.grid.n); }
inline void inverse(ComplexField& f) { inverse(f.values, f.values, f.grid.dim, f.grid.n); }

/// 1d transform of arbitrary length, used by the chirp evaluator.
void forward_1d(std::span<const cplx> in, std::span<cplx> out);
void inverse_1d(std::span<const cplx> in, std::span<cplx> out);

}  // namespace snls::fft
