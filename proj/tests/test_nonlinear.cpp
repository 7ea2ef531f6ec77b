#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "tic/nonlinear.hpp"

using namespace tic;

namespace {

double ustar(double t, double s, double x, double y) {
    return std::exp(-s) * std::sin(y) * (1.0 + 0.3 * std::cos(x)) + 0.2 * s * std::cos(t);
}

// manufactured source for u_s = u_yy - u_y * u(diag) + fsrc
double fsrc(double t, double s, double x, double y) {
    const double es = std::exp(-s), w = 1.0 + 0.3 * std::cos(x);
    const double us = -es * std::sin(y) * w + 0.2 * std::cos(t);
    const double uy = es * std::cos(y) * w;
    const double uyy = -es * std::sin(y) * w;
    const double d0 = es * std::sin(y) * (1.0 + 0.3 * std::cos(y)) + 0.2 * s * std::cos(s);
    return us - uyy + uy * d0;
}

Nonlinearity manufactured_F() {
    Nonlinearity F;
    F.eval = [](double t, double s, double x, double y, const ZState& z) {
        return z.q - z.p * z.ud + fsrc(t, s, x, y);
    };
    F.lambda_ell = 0.5;
    return F;
}

double nonlinear_manufactured_error(std::size_t ns, std::size_t ny,
                                    double delta_init) {
    auto g = make_periodic_grid(1.0, ns, 0.0, 2.0 * M_PI, ny);
    auto g0 = Field3::from_function(
        g, [](double t, double x, double y) { return ustar(t, 0.0, x, y); });
    NonlinearConfig cfg;
    cfg.delta_init = delta_init;
    auto res = solve_nonlinear(manufactured_F(), g0, g, cfg);
    auto ex = Field4::from_function(g, ustar);
    return sup_diff(res.u, ex);
}

} // namespace

TEST_CASE("linearize_at_initial recovers constant coefficients") {
    auto g = make_periodic_grid(1.0, 7, 0.0, 2.0 * M_PI, 10);
    Nonlinearity F;
    F.eval = [](double, double, double, double, const ZState& z) {
        return 2.0 * z.q + 0.5 * z.p - 0.3 * z.u + 0.4 * z.ud - 0.1 * z.qd;
    };
    auto g0 = Field3::from_function(
        g, [](double t, double x, double y) { return std::sin(y) + 0.1 * t * std::cos(x); });
    auto C = linearize_at_initial(F, g0, g);
    for (double y : {0.0, 1.0, 3.0}) {
        CHECK(C.A[2](0.5, 0.0, 1.0, y) == doctest::Approx(2.0).epsilon(1e-8));
        CHECK(C.A[1](0.5, 0.0, 1.0, y) == doctest::Approx(0.5).epsilon(1e-8));
        CHECK(C.A[0](0.5, 0.0, 1.0, y) == doctest::Approx(-0.3).epsilon(1e-8));
        CHECK(C.B[0](0.5, 0.0, 1.0, y) == doctest::Approx(-0.4).epsilon(1e-8));
        CHECK(C.B[1](0.5, 0.0, 1.0, y) == doctest::Approx(0.0).epsilon(1e-8));
        CHECK(C.B[2](0.5, 0.0, 1.0, y) == doctest::Approx(0.1).epsilon(1e-8));
    }
}

TEST_CASE("linearize_at_initial chain rule on quasilinear form") {
    auto g = make_periodic_grid(1.0, 7, 0.0, 2.0 * M_PI, 16);
    // F = a(y) u_yy + Q(u_y), Q(p) = p^2
    Nonlinearity F;
    F.eval = [](double, double, double, double y, const ZState& z) {
        return (1.0 + 0.1 * std::sin(y)) * z.q + z.p * z.p;
    };
    auto g0 = Field3::from_function(g, [](double, double, double y) { return std::sin(y); });
    auto C = linearize_at_initial(F, g0, g);
    for (std::size_t l = 0; l < g.ny(); l += 3) {
        const double y = g.y_nodes[l];
        CHECK(C.A[2](0.0, 0.0, 0.0, y) ==
              doctest::Approx(1.0 + 0.1 * std::sin(y)).epsilon(1e-7));
        // Q'(g_y) = 2 cos(y) up to the FD error in g_y (~dy^2/6 relative)
        CHECK(C.A[1](0.0, 0.0, 0.0, y) == doctest::Approx(2.0 * std::cos(y)).epsilon(0.03));
    }
}

TEST_CASE("numeric partials match analytic to O(h^2)") {
    Nonlinearity Fa;
    Fa.eval = [](double, double, double, double, const ZState& z) {
        return std::sin(z.u) * z.q + std::exp(0.2 * z.p) + z.ud * z.qd;
    };
    Fa.partials[0] = [](double, double, double, double, const ZState& z) {
        return std::cos(z.u) * z.q;
    };
    Fa.partials[1] = [](double, double, double, double, const ZState& z) {
        return 0.2 * std::exp(0.2 * z.p);
    };
    Fa.partials[2] = [](double, double, double, double, const ZState& z) {
        return std::sin(z.u);
    };
    Fa.partials[3] = [](double, double, double, double, const ZState& z) { return z.qd; };
    Fa.partials[4] = [](double, double, double, double, const ZState&) { return 0.0; };
    Fa.partials[5] = [](double, double, double, double, const ZState& z) { return z.ud; };
    Nonlinearity Fn = Fa;
    Fn.partials = {};
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> dist(-1, 1);
    for (int trial = 0; trial < 20; ++trial) {
        ZState z;
        for (int m = 0; m < 6; ++m) z[m] = dist(rng);
        for (int m = 0; m < 6; ++m)
            CHECK(Fn.partial(m, 0, 0, 0, 0, z) ==
                  doctest::Approx(Fa.partial(m, 0, 0, 0, 0, z)).epsilon(1e-6));
    }
}

TEST_CASE("picard_step: linear F is an immediate fixed point") {
    auto g = make_periodic_grid(0.5, 9, 0.0, 2.0 * M_PI, 12);
    Nonlinearity F;
    F.eval = [](double, double, double, double, const ZState& z) {
        return z.q - 0.4 * z.ud + 0.2 * z.pd;
    };
    F.lambda_ell = 0.5;
    auto g0 = Field3::from_function(
        g, [](double t, double x, double y) { return std::sin(y) + 0.2 * std::cos(t + x); });
    auto C = linearize_at_initial(F, g0, g);
    StepperConfig cfg;
    Field4 u0(g.ns(), g.ny());
    for (std::size_t i = 0; i < g.ns(); ++i)
        for (std::size_t j = 0; j < g.ns(); ++j)
            for (std::size_t k = 0; k < g.ny(); ++k)
                for (std::size_t l = 0; l < g.ny(); ++l)
                    u0.at(i, j, k, l) = g0.at(i, k, l);
    auto u1 = picard_step(u0, F, C, g0, g, cfg);
    auto u2 = picard_step(u1, F, C, g0, g, cfg);
    CHECK(sup_diff(u1, u2) < 1e-10);
}

TEST_CASE("picard_step: zero data stays zero") {
    auto g = make_periodic_grid(0.5, 7, 0.0, 2.0 * M_PI, 10);
    Nonlinearity F;
    F.eval = [](double, double, double, double, const ZState& z) {
        return z.q + z.p * z.ud;
    };
    Field3 g0(g.ns(), g.ny(), 0.0);
    auto C = linearize_at_initial(F, g0, g);
    Field4 zero(g.ns(), g.ny());
    auto u1 = picard_step(zero, F, C, g0, g, StepperConfig{});
    CHECK(sup_norm(u1) < 1e-14);
}

TEST_CASE("picard_step: domain ball exit detected") {
    auto g = make_periodic_grid(0.5, 7, 0.0, 2.0 * M_PI, 10);
    Nonlinearity F;
    F.eval = [](double, double, double, double, const ZState& z) { return z.q; };
    F.domain_radius = 0.5;
    auto g0 = Field3::from_function(g, [](double, double, double y) { return std::sin(y); });
    // initial data itself exceeds R0/2 in the derivative stack
    CHECK_THROWS_AS(linearize_at_initial(F, g0, g), ConfigError);
    Field3 gsmall(g.ns(), g.ny(), 0.0);
    auto C = linearize_at_initial(F, gsmall, g);
    auto big = Field4::from_function(g, [](double, double, double, double) { return 10.0; });
    CHECK_THROWS_AS(picard_step(big, F, C, gsmall, g, StepperConfig{}), DomainExitError);
}

TEST_CASE("solve_nonlinear: linear problem converges in one interval") {
    auto g = make_periodic_grid(0.5, 9, 0.0, 2.0 * M_PI, 12);
    Nonlinearity F;
    F.eval = [](double, double, double, double, const ZState& z) {
        return z.q - 0.4 * z.ud;
    };
    F.lambda_ell = 0.5;
    auto g0 = Field3::from_function(g, [](double, double, double y) { return std::sin(y); });
    auto res = solve_nonlinear(F, g0, g, NonlinearConfig{});
    CHECK(res.log.reached_T);
    CHECK(res.log.intervals.size() == 1);
    CHECK(res.log.intervals[0].status == "converged");
    CHECK(res.picard.residual_history.size() <= 3);
    CHECK(res.picard.residual_history.back() <= 1e-8);
}

TEST_CASE("solve_nonlinear: manufactured quasilinear order >= 1.8") {
    double e1 = nonlinear_manufactured_error(9, 8, 1e9);
    double e2 = nonlinear_manufactured_error(17, 16, 1e9);
    double e3 = nonlinear_manufactured_error(33, 32, 1e9);
    INFO("errors ", e1, " ", e2, " ", e3);
    CHECK(std::log2(e1 / e2) >= 1.8);
    CHECK(std::log2(e2 / e3) >= 1.8);
}

TEST_CASE("solve_nonlinear: interval re-basing agrees with single-interval solve") {
    double e_single = nonlinear_manufactured_error(17, 16, 1e9);
    double e_multi = nonlinear_manufactured_error(17, 16, 0.25); // 4 intervals
    CHECK(std::fabs(e_single - e_multi) < 5e-4);

    // continuity and contraction bookkeeping on the multi-interval run
    auto g = make_periodic_grid(1.0, 17, 0.0, 2.0 * M_PI, 16);
    auto g0 = Field3::from_function(
        g, [](double t, double x, double y) { return ustar(t, 0.0, x, y); });
    NonlinearConfig cfg;
    cfg.delta_init = 0.25;
    auto res = solve_nonlinear(manufactured_F(), g0, g, cfg);
    CHECK(res.log.reached_T);
    CHECK(res.log.intervals.size() == 4);
    for (const auto& iv : res.log.intervals) CHECK(iv.status == "converged");
    CHECK(res.picard.contraction_ratios.back() <= 0.5);
}

TEST_CASE("solve_nonlinear: uniqueness and stability surrogates") {
    auto g = make_periodic_grid(0.5, 9, 0.0, 2.0 * M_PI, 12);
    Nonlinearity F;
    F.eval = [](double, double, double, double, const ZState& z) {
        return z.q - 0.3 * z.p * z.ud;
    };
    F.lambda_ell = 0.5;
    auto g0 = Field3::from_function(g, [](double, double, double y) { return std::sin(y); });

    NonlinearConfig cfg;
    auto r1 = solve_nonlinear(F, g0, g, cfg);
    NonlinearConfig cfg2 = cfg;
    cfg2.initial_guess = Field4(g.ns(), g.ny(), 0.0);
    auto r2 = solve_nonlinear(F, g0, g, cfg2);
    CHECK(sup_diff(r1.u, r2.u) < 2.0 * cfg.outer_tol);

    const double eps = 1e-3;
    auto gp = g0;
    for (double& v : gp.values) v += eps;
    auto rp = solve_nonlinear(F, gp, g, cfg);
    const double change = sup_diff(rp.u, r1.u);
    CHECK(change < 10.0 * eps);
    CHECK(change > 0.0);
}

TEST_CASE("pde_residual of the solved field is discretization-small") {
    auto g = make_periodic_grid(1.0, 17, 0.0, 2.0 * M_PI, 16);
    auto g0 = Field3::from_function(
        g, [](double t, double x, double y) { return ustar(t, 0.0, x, y); });
    auto res = solve_nonlinear(manufactured_F(), g0, g, NonlinearConfig{});
    const double r = pde_residual(res.u, manufactured_F(), g);
    const double bound = 5.0 * (g.ds() + g.dy() * g.dy());
    CHECK(r < bound);
}

TEST_CASE("quasilinear_solve") {
    auto g = make_periodic_grid(1.0, 17, 0.0, 2.0 * M_PI, 16);
    auto heat_a = [](double, double, double, double) { return 1.0; };
    auto g0 = Field3::from_function(g, [](double, double, double y) { return std::sin(y); });

    SUBCASE("Q=0 equals the linear heat solve") {
        NonlinFn q0 = [](double, double, double, double, const ZState&) { return 0.0; };
        auto uq = quasilinear_solve(heat_a, q0, g0, g, StepperConfig{});
        LinearProblem p;
        p.grid = g;
        p.coeffs.A[2] = heat_a;
        p.g = g0;
        auto ul = solve_linear(p, StepperConfig{});
        CHECK(sup_diff(uq, ul) < 1e-12);
    }
    SUBCASE("manufactured Q = -u_y u(diag), cross-checked against solve_nonlinear") {
        NonlinFn q = [](double t, double s, double x, double y, const ZState& z) {
            return -z.p * z.ud + fsrc(t, s, x, y);
        };
        auto gi = Field3::from_function(
            g, [](double t, double x, double y) { return ustar(t, 0.0, x, y); });
        auto uq = quasilinear_solve(heat_a, q, gi, g, StepperConfig{});
        auto ex = Field4::from_function(g, ustar);
        const double err = sup_diff(uq, ex);
        CHECK(err < 0.02);

        auto res = solve_nonlinear(manufactured_F(), gi, g, NonlinearConfig{});
        CHECK(sup_diff(uq, res.u) < 5e-3);
    }
}
