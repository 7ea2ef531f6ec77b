#include "tic/tridiag.hpp"

#include <cmath>
#include <vector>

#include "tic/errors.hpp"

namespace tic {

void solve_tridiag(std::span<double> a, std::span<double> b, std::span<double> c,
                   std::span<double> d) {
    const std::size_t n = b.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = a[i] / b[i - 1];
        if (!std::isfinite(m)) throw SolverError("tridiagonal solve: singular pivot");
        b[i] -= m * c[i - 1];
        d[i] -= m * d[i - 1];
    }
    d[n - 1] /= b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
}

void solve_cyclic_tridiag(std::span<double> a, std::span<double> b,
                          std::span<double> c, std::span<double> d) {
    const std::size_t n = b.size();
    if (n < 3) throw SolverError("cyclic tridiagonal solve: need n >= 3");
    const double alpha = c[n - 1]; // row n-1 -> col 0
    const double beta = a[0];      // row 0 -> col n-1
    // B = A - u v^T with u = (gamma, 0, ..., alpha)^T, v = (1, 0, ..., beta/gamma)^T
    const double gamma = -b[0];
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = alpha;

    b[0] -= gamma;
    b[n - 1] -= alpha * beta / gamma;

    std::vector<double> bb(b.begin(), b.end());
    std::vector<double> cc(c.begin(), c.end());
    std::vector<double> aa(a.begin(), a.end());
    solve_tridiag(aa, bb, cc, d);

    std::vector<double> b2(b.begin(), b.end());
    std::vector<double> c2(c.begin(), c.end());
    std::vector<double> a2(a.begin(), a.end());
    solve_tridiag(a2, b2, c2, u);

    const double vy = d[0] + (beta / gamma) * d[n - 1];
    const double vq = u[0] + (beta / gamma) * u[n - 1];
    const double fact = vy / (1.0 + vq);
    for (std::size_t i = 0; i < n; ++i) d[i] -= fact * u[i];
}

} // namespace tic
