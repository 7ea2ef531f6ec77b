#pragma once

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "tic/linear.hpp"

namespace tic {

// Argument stack of the nonlinearity F(t,s,x,y, z): local (u, u_y, u_yy) and
// the diagonal values (u, u_y, u_yy) at (s,s,y,y).
struct ZState {
    double u = 0, p = 0, q = 0;    // local
    double ud = 0, pd = 0, qd = 0; // diagonal
    double& operator[](int m) { return (&u)[m]; }
    double operator[](int m) const { return (&u)[m]; }
};

using NonlinFn = std::function<double(double, double, double, double, const ZState&)>;

struct Nonlinearity {
    NonlinFn eval;
    // optional analytic partials wrt the 6 z-components, same argument order
    // as ZState; empty entries fall back to central differences with step
    // h_z = h_z_base * (1 + |z_m|)
    std::array<NonlinFn, 6> partials{};
    std::array<double, 6> z_center{};
    double domain_radius = std::numeric_limits<double>::infinity();
    double holder_K = 0.0;
    double lipschitz_L = 0.0;
    double lambda_ell = 0.0;
    double h_z_base = 1e-6;

    double partial(int m, double t, double s, double x, double y, const ZState& z) const;
    // Euclidean distance of z to the domain center.
    double ball_distance(const ZState& z) const;
    // Sampled: dF/dq >= lambda and dF/dq + dF/dqd >= lambda at z_center over
    // grid nodes.  Throws ConfigError on violation; lambda <= 0 claims nothing
    // and skips the scan.
    void check_ellipticity(const SpaceTimeGrid& g) const;
};

// Frozen linearization at the initial data of the current interval: builds the
// coefficient set A^I = dF/d(local I), B^I = -dF/d(diag I), both evaluated at
// the stacked derivatives of g with s frozen at s_nodes[j0].
CoefficientSet linearize_at_initial(const Nonlinearity& F, const Field3& g,
                                    const SpaceTimeGrid& grid, std::size_t j0 = 0);

// One application of the fixed-point map: solve the frozen linear problem with
// source F(..u_k..) - (frozen spatial operator applied to u_k) over the march
// range of cfg.  Throws SolverError if u_k's derivative stack leaves the
// domain ball.
Field4 picard_step(const Field4& u_k, const Nonlinearity& F,
                   const CoefficientSet& frozen, const Field3& g,
                   const SpaceTimeGrid& grid, const StepperConfig& cfg);

struct PicardState {
    Field4 iterate;
    std::vector<double> residual_history;
    std::vector<double> contraction_ratios;
    double delta = 0.0;
};

struct IntervalRecord {
    double s_start = 0.0, s_end = 0.0;
    std::string status; // converged | max-interval-reached | domain-exit
};

struct ExtensionLog {
    std::vector<IntervalRecord> intervals;
    double blow_up_norm = 0.0;
    double epsilon_margin = 0.0;
    bool reached_T = false;
    double tau = 0.0; // end of the maximal interval actually covered
};

struct NonlinearConfig {
    double delta_init = std::numeric_limits<double>::infinity(); // clamped to T
    double rho_target = 0.5;
    double outer_tol = 1e-8;
    std::size_t max_outer = 40;
    double blow_up_norm = 1e8;
    StepperConfig stepper;
    Field4 initial_guess; // optional; empty means constant extension of g
};

struct NonlinearResult {
    Field4 u;
    PicardState picard;
    ExtensionLog log;
};

// Picard iteration on sub-intervals with delta-halving, extended to the
// maximal interval.  cfg.stepper.j_begin/j_end bound the overall march range
// (defaults cover the whole grid); g is imposed at the j_begin plane and
// log.reached_T means the requested range was covered.
NonlinearResult solve_nonlinear(const Nonlinearity& F, const Field3& g,
                                const SpaceTimeGrid& grid, const NonlinearConfig& cfg);

// Quasilinear fast path: u_s = a(s,y) u_yy + Q(t,s,x,y, u,u_y, diag u,u_y) + f,
// Q first-order only (q/qd ignored).  IMEX stepping: diffusion implicit, Q by
// a per-step fixed point; runs to T unconditionally.
Field4 quasilinear_solve(const CoefFn& a2, const NonlinFn& Q, const Field3& g,
                         const SpaceTimeGrid& grid, const StepperConfig& cfg,
                         const Field4* f = nullptr);

// Sup of |u_s - F(..u..)| over interior s-levels: the apply-and-difference
// residual used by the fixed-point verification.
double pde_residual(const Field4& u, const Nonlinearity& F, const SpaceTimeGrid& g);

} // namespace tic
