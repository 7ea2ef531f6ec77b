#pragma once

#include <span>

namespace tic {

// Solve a tridiagonal system in place: a = subdiagonal (a[0] unused),
// b = diagonal, c = superdiagonal (c[n-1] unused), d = rhs on entry and the
// solution on exit.  All spans are clobbered.
void solve_tridiag(std::span<double> a, std::span<double> b, std::span<double> c,
                   std::span<double> d);

// Cyclic variant: a[0] couples row 0 to column n-1 and c[n-1] couples row n-1
// to column 0 (Sherman-Morrison).  Spans are clobbered.
void solve_cyclic_tridiag(std::span<double> a, std::span<double> b,
                          std::span<double> c, std::span<double> d);

} // namespace tic
