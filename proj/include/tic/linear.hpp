#pragma once

#include <array>
#include <functional>
#include <string>

#include "tic/field.hpp"
#include "tic/grid.hpp"

namespace tic {

// Coefficient function over (t,s,x,y); an empty std::function means 0.
using CoefFn = std::function<double(double, double, double, double)>;

// Coefficients of the nonlocal linear operator
//   Lu = u_s - sum_{|I|<=2} A^I d_I u + sum_{|I|<=2} B^I d_I u(s,s,y,y),
// indexed by the y-derivative order I in {0,1,2}.
struct CoefficientSet {
    std::array<CoefFn, 3> A{};
    std::array<CoefFn, 3> B{};
    double lambda_ell = 0.0;

    double eval_A(int I, double t, double s, double x, double y) const {
        return A[I] ? A[I](t, s, x, y) : 0.0;
    }
    double eval_B(int I, double t, double s, double x, double y) const {
        return B[I] ? B[I](t, s, x, y) : 0.0;
    }

    // Sampled: does any B^I ever act?  Determines whether the stepper runs the
    // inner diagonal fixed point at all.
    bool has_nonlocal(const SpaceTimeGrid& g) const;

    // Sampled uniform ellipticity: A2 >= lambda and A2 + B2 >= lambda at every
    // grid node.  Throws ConfigError on violation; lambda <= 0 claims nothing
    // and skips the scan.
    void check_ellipticity(const SpaceTimeGrid& g) const;
};

// The nonlocal linear problem Lu = f, u(t,0,x,y) = g(t,x,y).
// f may be left empty (values.size()==0) to mean a zero source.
struct LinearProblem {
    SpaceTimeGrid grid;
    CoefficientSet coeffs;
    Field4 f;
    Field3 g;
};

enum class Scheme { BackwardEuler, CrankNicolson };
Scheme scheme_from_string(const std::string& s);

struct StepperConfig {
    Scheme scheme = Scheme::CrankNicolson;
    double inner_picard_tol = 1e-10;
    std::size_t inner_picard_max = 100;
    bool lag_diagonal = false;
    // march range [j_begin, j_end] in s-indices; the initial data g is imposed
    // at s index j_begin.  j_end is clamped to the last node.
    std::size_t j_begin = 0;
    std::size_t j_end = static_cast<std::size_t>(-1);
};

// Lu evaluated by finite differences on a given field.
Field4 apply_operator(const Field4& u, const CoefficientSet& coeffs,
                      const SpaceTimeGrid& g);

// Time-march s = 0 -> T.  Per step: resolve the diagonal trace at the leading
// slice t = s_{j+1} by an inner fixed point, then advance every other
// (t,x)-slice with the trace frozen.  Each slice advance is one implicit
// tridiagonal solve in y.
Field4 solve_linear(const LinearProblem& p, const StepperConfig& cfg);

// Integral representation I^I: with ut = d/dt u and ux = d/dx u,
//   d_I u(t,s,x,y) - d_I u(s,s,y,y) = -I^I,
// computed by trapezoid quadrature along the path (s,s,y,y)->(s,s,x,y)->
// (t,s,x,y), or the time-then-space path when `time_then_space` is set.
// I in {0,1,2} is the y-derivative order applied to ut/ux before integrating.
Field4 integral_rep(const Field4& ut, const Field4& ux, const SpaceTimeGrid& g,
                    int I, bool time_then_space = false);

struct StabilityReport {
    double ratio = 0.0;
    bool zero_perturbation = false;
};

// Solves the problem with (f,g) and with (f, g + scale*sin) and reports the
// Holder-norm ratio of the response to the perturbation size.
StabilityReport schauder_stability_probe(const LinearProblem& p,
                                         const StepperConfig& cfg,
                                         double perturbation_scale);

} // namespace tic
