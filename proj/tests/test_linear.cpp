#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "tic/linear.hpp"
#include "tic/tridiag.hpp"

using namespace tic;

namespace {

// Dense Gaussian elimination with partial pivoting, for cross-checking the
// tridiagonal solvers on small systems.
std::vector<double> dense_solve(std::vector<std::vector<double>> M,
                                std::vector<double> rhs) {
    const std::size_t n = rhs.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(M[r][col]) > std::fabs(M[piv][col])) piv = r;
        std::swap(M[piv], M[col]);
        std::swap(rhs[piv], rhs[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double m = M[r][col] / M[col][col];
            for (std::size_t c = col; c < n; ++c) M[r][c] -= m * M[col][c];
            rhs[r] -= m * rhs[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        double v = rhs[r];
        for (std::size_t c = r + 1; c < n; ++c) v -= M[r][c] * x[c];
        x[r] = v / M[r][r];
    }
    return x;
}

Field4 manufactured(const SpaceTimeGrid& g) {
    return Field4::from_function(g, [](double t, double s, double x, double y) {
        return std::exp(-s) * std::sin(y) * (1.0 + 0.3 * std::cos(x)) +
               0.2 * s * std::cos(t);
    });
}

} // namespace

TEST_CASE("tridiagonal solvers vs dense") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> dist(-1, 1);
    const std::size_t n = 9;
    std::vector<double> a(n), b(n), c(n), d(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = dist(rng);
        c[i] = dist(rng);
        b[i] = 4.0 + dist(rng); // diagonally dominant
        d[i] = dist(rng);
    }
    SUBCASE("plain") {
        std::vector<std::vector<double>> M(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            M[i][i] = b[i];
            if (i > 0) M[i][i - 1] = a[i];
            if (i + 1 < n) M[i][i + 1] = c[i];
        }
        auto ref = dense_solve(M, d);
        auto aa = a, bb = b, cc = c, dd = d;
        solve_tridiag(aa, bb, cc, dd);
        for (std::size_t i = 0; i < n; ++i) CHECK(dd[i] == doctest::Approx(ref[i]).epsilon(1e-10));
    }
    SUBCASE("cyclic") {
        std::vector<std::vector<double>> M(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            M[i][i] = b[i];
            M[i][(i + n - 1) % n] = a[i];
            M[i][(i + 1) % n] = c[i];
        }
        auto ref = dense_solve(M, d);
        auto aa = a, bb = b, cc = c, dd = d;
        solve_cyclic_tridiag(aa, bb, cc, dd);
        for (std::size_t i = 0; i < n; ++i) CHECK(dd[i] == doctest::Approx(ref[i]).epsilon(1e-10));
    }
}

TEST_CASE("apply_operator: diffusion eigenfunction") {
    auto g = make_periodic_grid(1.0, 9, 0.0, 2.0 * M_PI, 48);
    CoefficientSet C;
    C.A[2] = [](double, double, double, double) { return 1.0; };
    auto u = Field4::from_function(g, [](double, double, double, double y) { return std::sin(y); });
    auto Lu = apply_operator(u, C, g);
    for (std::size_t i = 0; i < g.ns(); ++i)
        for (std::size_t j = 0; j < g.ns(); ++j)
            for (std::size_t k = 0; k < g.ny(); ++k)
                for (std::size_t l = 0; l < g.ny(); ++l)
                    CHECK(Lu.at(i, j, k, l) ==
                          doctest::Approx(std::sin(g.y_nodes[l])).epsilon(0.01));
}

TEST_CASE("apply_operator: diagonal reduction annihilates e^{-bs}") {
    auto g = make_grid(1.0, 41, 0.0, 1.0, 5, Closure::DirichletFromData);
    const double b = 0.7, cval = 1.3;
    CoefficientSet C;
    C.B[0] = [b](double, double, double, double) { return b; };
    auto u = Field4::from_function(
        g, [=](double, double s, double, double) { return cval * std::exp(-b * s); });
    auto Lu = apply_operator(u, C, g);
    CHECK(sup_norm(Lu) < 5e-4); // O(ds^2) from the s-difference
}

TEST_CASE("apply_operator matches a naive term-by-term evaluator") {
    auto g = make_periodic_grid(1.0, 7, 0.0, 2.0 * M_PI, 12);
    CoefficientSet C;
    C.A[0] = [](double t, double s, double, double) { return -0.5 + 0.1 * t * s; };
    C.A[1] = [](double, double, double x, double) { return 0.2 * std::sin(x); };
    C.A[2] = [](double, double, double, double y) { return 1.0 + 0.3 * std::cos(y); };
    C.B[0] = [](double t, double, double, double) { return 0.4 + 0.1 * t; };
    C.B[1] = [](double, double s, double, double) { return -0.2 * s; };
    C.B[2] = [](double, double, double x, double y) { return 0.1 * std::cos(x - y); };
    auto u = manufactured(g);
    auto Lu = apply_operator(u, C, g);

    auto us = derivative(u, g, Deriv::S);
    auto uy = derivative(u, g, Deriv::Y);
    auto uyy = derivative(u, g, Deriv::YY);
    auto tr = diagonal_derivative_traces(u, g);
    double defect = 0.0;
    for (std::size_t i = 0; i < g.ns(); ++i)
        for (std::size_t j = 0; j < g.ns(); ++j)
            for (std::size_t k = 0; k < g.ny(); ++k)
                for (std::size_t l = 0; l < g.ny(); ++l) {
                    const double t = g.s_nodes[i], s = g.s_nodes[j];
                    const double x = g.y_nodes[k], y = g.y_nodes[l];
                    double v = us.at(i, j, k, l);
                    v -= C.A[0](t, s, x, y) * u.at(i, j, k, l);
                    v -= C.A[1](t, s, x, y) * uy.at(i, j, k, l);
                    v -= C.A[2](t, s, x, y) * uyy.at(i, j, k, l);
                    v += C.B[0](t, s, x, y) * tr.d0.at(j, l);
                    v += C.B[1](t, s, x, y) * tr.d1.at(j, l);
                    v += C.B[2](t, s, x, y) * tr.d2.at(j, l);
                    defect = std::max(defect, std::fabs(v - Lu.at(i, j, k, l)));
                }
    CHECK(defect < 1e-12);
}

TEST_CASE("solve_linear: pure diagonal ODE reduction hits e^{-1}") {
    auto g = make_grid(1.0, 101, 0.0, 1.0, 5, Closure::DirichletFromData);
    LinearProblem p;
    p.grid = g;
    p.coeffs.B[0] = [](double, double, double, double) { return 1.0; };
    p.g = Field3(g.ns(), g.ny(), 1.0);
    StepperConfig cfg;
    cfg.scheme = Scheme::CrankNicolson;
    auto u = solve_linear(p, cfg);
    const std::size_t jT = g.ns() - 1;
    for (std::size_t i = 0; i < g.ns(); ++i)
        for (std::size_t k = 0; k < g.ny(); ++k)
            for (std::size_t l = 0; l < g.ny(); ++l)
                CHECK(std::fabs(u.at(i, jT, k, l) - std::exp(-1.0)) < 1e-3);
}

TEST_CASE("solve_linear: periodic heat eigenfunction") {
    auto g = make_periodic_grid(1.0, 41, 0.0, 2.0 * M_PI, 32);
    LinearProblem p;
    p.grid = g;
    p.coeffs.A[2] = [](double, double, double, double) { return 1.0; };
    p.coeffs.lambda_ell = 0.5;
    p.g = Field3::from_function(g, [](double, double, double y) { return std::sin(y); });
    auto u = solve_linear(p, StepperConfig{});
    double err = 0.0;
    for (std::size_t i = 0; i < g.ns(); ++i)
        for (std::size_t j = 0; j < g.ns(); ++j)
            for (std::size_t k = 0; k < g.ny(); ++k)
                for (std::size_t l = 0; l < g.ny(); ++l)
                    err = std::max(err, std::fabs(u.at(i, j, k, l) -
                                                  std::exp(-g.s_nodes[j]) *
                                                      std::sin(g.y_nodes[l])));
    CHECK(err < 5e-3);
}

namespace {

// Manufactured nonlocal problem with analytic source; returns sup error.
double manufactured_error(std::size_t ns, std::size_t ny) {
    auto g = make_periodic_grid(1.0, ns, 0.0, 2.0 * M_PI, ny);
    const double A2 = 1.0, A1 = 0.2, A0 = -0.5, B0 = 0.5, B1 = 0.3, B2 = 0.1;
    auto ustar = [](double t, double s, double x, double y) {
        return std::exp(-s) * std::sin(y) * (1.0 + 0.3 * std::cos(x)) +
               0.2 * s * std::cos(t);
    };
    LinearProblem p;
    p.grid = g;
    p.coeffs.A[0] = [=](double, double, double, double) { return A0; };
    p.coeffs.A[1] = [=](double, double, double, double) { return A1; };
    p.coeffs.A[2] = [=](double, double, double, double) { return A2; };
    p.coeffs.B[0] = [=](double, double, double, double) { return B0; };
    p.coeffs.B[1] = [=](double, double, double, double) { return B1; };
    p.coeffs.B[2] = [=](double, double, double, double) { return B2; };
    p.coeffs.lambda_ell = 0.5;
    p.f = Field4::from_function(g, [=](double t, double s, double x, double y) {
        const double es = std::exp(-s), w = 1.0 + 0.3 * std::cos(x);
        const double us = -es * std::sin(y) * w + 0.2 * std::cos(t);
        const double uy = es * std::cos(y) * w;
        const double uyy = -es * std::sin(y) * w;
        const double u = es * std::sin(y) * w + 0.2 * s * std::cos(t);
        const double wd = 1.0 + 0.3 * std::cos(y);
        const double d0 = es * std::sin(y) * wd + 0.2 * s * std::cos(s);
        const double d1 = es * std::cos(y) * wd;
        const double d2 = -es * std::sin(y) * wd;
        return us - A2 * uyy - A1 * uy - A0 * u + B0 * d0 + B1 * d1 + B2 * d2;
    });
    p.g = Field3::from_function(
        g, [=](double t, double x, double y) { return ustar(t, 0.0, x, y); });
    auto u = solve_linear(p, StepperConfig{});
    auto ex = Field4::from_function(g, ustar);
    return sup_diff(u, ex);
}

} // namespace

TEST_CASE("solve_linear: manufactured nonlocal order >= 1.8") {
    double e1 = manufactured_error(9, 8);
    double e2 = manufactured_error(17, 16);
    double e3 = manufactured_error(33, 32);
    double p12 = std::log2(e1 / e2), p23 = std::log2(e2 / e3);
    INFO("errors ", e1, " ", e2, " ", e3);
    CHECK(p12 >= 1.8);
    CHECK(p23 >= 1.8);
}

TEST_CASE("solve_linear properties") {
    auto g = make_periodic_grid(0.5, 11, 0.0, 2.0 * M_PI, 12);
    CoefficientSet C;
    C.A[2] = [](double, double, double, double) { return 1.0; };
    C.B[0] = [](double, double, double, double) { return 0.5; };
    C.lambda_ell = 0.5;

    SUBCASE("zero data gives zero field") {
        LinearProblem p{g, C, Field4{}, Field3(g.ns(), g.ny(), 0.0)};
        auto u = solve_linear(p, StepperConfig{});
        CHECK(sup_norm(u) < 1e-13);
    }
    SUBCASE("superposition") {
        auto g1 = Field3::from_function(g, [](double, double, double y) { return std::sin(y); });
        auto g2 = Field3::from_function(g, [](double t, double x, double) { return 0.3 * std::cos(t + x); });
        Field4 f1 = Field4::from_function(g, [](double, double s, double, double y) { return 0.2 * s * std::cos(y); });
        LinearProblem p1{g, C, f1, g1};
        LinearProblem p2{g, C, Field4{}, g2};
        Field3 gsum(g.ns(), g.ny());
        for (std::size_t n = 0; n < gsum.values.size(); ++n)
            gsum.values[n] = g1.values[n] + g2.values[n];
        LinearProblem ps{g, C, f1, gsum};
        auto u1 = solve_linear(p1, StepperConfig{});
        auto u2 = solve_linear(p2, StepperConfig{});
        auto us = solve_linear(ps, StepperConfig{});
        double defect = 0.0;
        for (std::size_t n = 0; n < us.values.size(); ++n)
            defect = std::max(defect, std::fabs(us.values[n] - u1.values[n] - u2.values[n]));
        CHECK(defect < 1e-9);
    }
    SUBCASE("B=0 reduces bit-for-bit to the local stepper") {
        auto gd = Field3::from_function(g, [](double, double, double y) { return std::sin(y); });
        CoefficientSet Czero = C;
        Czero.B[0] = [](double, double, double, double) { return 0.0; };
        CoefficientSet Cnull = C;
        Cnull.B[0] = nullptr;
        LinearProblem pz{g, Czero, Field4{}, gd};
        LinearProblem pn{g, Cnull, Field4{}, gd};
        auto uz = solve_linear(pz, StepperConfig{});
        auto un = solve_linear(pn, StepperConfig{});
        for (std::size_t n = 0; n < uz.values.size(); ++n)
            CHECK(uz.values[n] == un.values[n]);
    }
    SUBCASE("ellipticity violation rejected") {
        CoefficientSet bad = C;
        bad.lambda_ell = 2.0; // claims more than A2 provides
        LinearProblem p{g, bad, Field4{}, Field3(g.ns(), g.ny(), 0.0)};
        CHECK_THROWS_AS(solve_linear(p, StepperConfig{}), ConfigError);
    }
}

TEST_CASE("integral representation") {
    SUBCASE("u independent of (t,x) gives zero") {
        auto g = make_grid(1.0, 9, 0.0, 1.0, 9, Closure::DirichletFromData);
        auto u = Field4::from_function(
            g, [](double, double s, double, double y) { return std::sin(s + y); });
        auto ut = derivative(u, g, Deriv::T);
        auto ux = derivative(u, g, Deriv::X);
        auto I0 = integral_rep(ut, ux, g, 0);
        CHECK(sup_norm(I0) < 1e-12);
    }
    SUBCASE("affine path integral") {
        auto g = make_grid(1.0, 9, 0.0, 1.0, 9, Closure::DirichletFromData);
        auto u = Field4::from_function(
            g, [](double t, double, double x, double) { return t + x; });
        auto ut = derivative(u, g, Deriv::T);
        auto ux = derivative(u, g, Deriv::X);
        auto I0 = integral_rep(ut, ux, g, 0);
        for (std::size_t i = 0; i < g.ns(); ++i)
            for (std::size_t j = 0; j < g.ns(); ++j)
                for (std::size_t k = 0; k < g.ny(); ++k)
                    for (std::size_t l = 0; l < g.ny(); ++l)
                        CHECK(I0.at(i, j, k, l) ==
                              doctest::Approx(-((g.s_nodes[i] - g.s_nodes[j]) +
                                                (g.y_nodes[k] - g.y_nodes[l])))
                                  .epsilon(1e-10));
    }
    SUBCASE("identity defect, path independence, conservative identities") {
        double prev_defect = 0.0;
        for (int pass = 0; pass < 2; ++pass) {
            std::size_t n = pass == 0 ? 9 : 17;
            auto g = make_grid(1.0, n, 0.0, 1.0, n, Closure::DirichletFromData);
            auto u = Field4::from_function(g, [](double t, double s, double x, double y) {
                return std::sin(t + 0.5 * x) * std::cos(s - 0.3 * y) + 0.2 * t * x;
            });
            auto ut = derivative(u, g, Deriv::T);
            auto ux = derivative(u, g, Deriv::X);
            for (int I = 0; I < 2; ++I) {
                auto II = integral_rep(ut, ux, g, I);
                auto IIb = integral_rep(ut, ux, g, I, true);
                const Field4 dIu = I == 0 ? u : derivative(u, g, Deriv::Y);
                auto tr = diagonal_trace(dIu);
                double defect = 0.0, path = 0.0;
                for (std::size_t i = 0; i < g.ns(); ++i)
                    for (std::size_t j = 0; j < g.ns(); ++j)
                        for (std::size_t k = 0; k < g.ny(); ++k)
                            for (std::size_t l = 0; l < g.ny(); ++l) {
                                const double lhs = dIu.at(i, j, k, l) - tr.at(j, l);
                                defect = std::max(defect, std::fabs(lhs + II.at(i, j, k, l)));
                                path = std::max(path, std::fabs(II.at(i, j, k, l) -
                                                                IIb.at(i, j, k, l)));
                            }
                const double h2 = 2.0 / double((n - 1) * (n - 1));
                CHECK(defect < 5.0 * h2);
                CHECK(path < 5.0 * h2);
                if (I == 0 && pass == 1) {
                    CHECK(defect < prev_defect); // refinement shrinks the defect
                    // conservative identities: d/dt I = -u_t, d/dx I = -u_x
                    auto It = derivative(II, g, Deriv::T);
                    auto Ix = derivative(II, g, Deriv::X);
                    double ct = 0.0, cx = 0.0;
                    for (std::size_t m = 0; m < II.values.size(); ++m) {
                        ct = std::max(ct, std::fabs(It.values[m] + ut.values[m]));
                        cx = std::max(cx, std::fabs(Ix.values[m] + ux.values[m]));
                    }
                    CHECK(ct < 10.0 * h2);
                    CHECK(cx < 10.0 * h2);
                }
                if (I == 0 && pass == 0) prev_defect = defect;
            }
        }
    }
}

TEST_CASE("schauder stability probe") {
    auto g = make_periodic_grid(0.5, 11, 0.0, 2.0 * M_PI, 12);
    LinearProblem p;
    p.grid = g;
    p.coeffs.A[2] = [](double, double, double, double) { return 1.0; };
    p.coeffs.B[0] = [](double, double, double, double) { return 0.3; };
    p.coeffs.lambda_ell = 0.5;
    p.g = Field3::from_function(g, [](double, double, double y) { return std::cos(y); });

    SUBCASE("zero perturbation flagged") {
        auto rep = schauder_stability_probe(p, StepperConfig{}, 0.0);
        CHECK(rep.zero_perturbation);
        CHECK(rep.ratio == 0.0);
    }
    SUBCASE("ratio invariant under perturbation scaling") {
        auto r1 = schauder_stability_probe(p, StepperConfig{}, 1e-3);
        auto r2 = schauder_stability_probe(p, StepperConfig{}, 2e-3);
        CHECK(std::fabs(r1.ratio - r2.ratio) < 1e-10 * (1.0 + r1.ratio));
    }
    SUBCASE("ratio stable across one refinement") {
        auto r1 = schauder_stability_probe(p, StepperConfig{}, 1e-2);
        auto g2 = make_periodic_grid(0.5, 21, 0.0, 2.0 * M_PI, 24);
        LinearProblem p2 = p;
        p2.grid = g2;
        p2.g = Field3::from_function(g2, [](double, double, double y) { return std::cos(y); });
        auto r2 = schauder_stability_probe(p2, StepperConfig{}, 1e-2);
        CHECK(std::fabs(r1.ratio - r2.ratio) / r2.ratio < 0.10);
    }
}
