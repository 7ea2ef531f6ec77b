#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "tic/field.hpp"
#include "tic/grid.hpp"

namespace tic {

// Investment-consumption model with recursive power utility; the value
// surface separates as V(s,y) = phi1(s,s) y^beta + phi2(s,s) y^gamma.
struct MertonParams {
    double r = 0.03, mu = 0.08, sigma = 0.2;
    double beta = 0.5, gamma = 0.5;
    double T = 1.0;
    std::function<double(double, double)> v, w, z; // (t,s), t <= s
    std::function<double(double)> g1, g2;

    static MertonParams defaults();
    // positivity / ordering checks by sampling; throws ConfigError
    void validate(std::size_t n_check = 33) const;
    double k(double t, double s) const {
        return r * beta - (mu - r) * (mu - r) * beta / (2.0 * sigma * sigma * (beta - 1.0)) -
               w(t, s);
    }
};

// Table over the (t,s) triangle on a shared uniform grid; entries with t > s
// are filled by the same formulas but only t <= s is meaningful.
struct TsTable {
    std::vector<double> s_nodes;
    std::vector<double> values; // (i_t, j_s) row-major
    double at(std::size_t i, std::size_t j) const { return values[i * s_nodes.size() + j]; }
    double& at(std::size_t i, std::size_t j) { return values[i * s_nodes.size() + j]; }
    // linear interpolation along s at fixed t-node i
    double interp_s(std::size_t i, double s) const;
};

// phi2(t,s) = e^{-int_s^T w(t)} g2(t) + int_s^T e^{-int_s^lam w(t)} z(t,lam) dlam
TsTable solve_phi2(const MertonParams& p, std::size_t n);

struct PhibarResult {
    std::vector<double> s_nodes;
    std::vector<double> phibar; // phi1(s,s)/v(s,s)
    std::size_t iterations = 0;
    std::size_t floor_hits = 0;
    std::vector<double> residuals;
};

// Damped fixed point for the diagonal integral equation.
PhibarResult solve_integral_equation(const MertonParams& p, std::size_t n_quad,
                                     double damping = 0.5, double tol = 1e-12,
                                     std::size_t max_iter = 500);

// Sup over nodes of |phibar - RHS(phibar)| evaluated with a quadrature refined
// by `refine` (independent check of the returned fixed point).
double fixed_point_residual(const MertonParams& p, const PhibarResult& pb,
                            std::size_t refine = 2);

// Variation-of-constants evaluation of phi1(t,s) given the diagonal phibar.
TsTable solve_phi1(const MertonParams& p, const PhibarResult& pb);

struct MertonBounds {
    double g0 = 0.0;    // min of ghat
    double rho = 0.0;   // decay rate with vhat >= e^{-rho (s-t)}
    double delta = 0.0; // e^{-rho T} g0, the phibar lower-bound scale
    double K = 0.0;     // sup of the constructed upper bound
    std::vector<double> lower, upper; // pointwise bounds on pb.s_nodes
};
MertonBounds compute_bounds(const MertonParams& p, const PhibarResult& pb);

struct MertonClosedForm {
    Field2 V, a_policy, c_policy;
};
// Evaluate the separated value/policy surfaces on a y_min > 0 grid.
MertonClosedForm equilibrium_closed_form(const MertonParams& p, const TsTable& phi1,
                                         const TsTable& phi2,
                                         const SpaceTimeGrid& grid);

// Backward RK4 integration of the time-consistent diagonal ODE
// phi' = -[k - beta (phi/v)^{1/(beta-1)}] phi - v (phi/v)^{beta/(beta-1)},
// phi(T) = g1(T); valid oracle when v, w, g1 are t-independent.
std::vector<double> time_consistent_ode_oracle(const MertonParams& p,
                                               const std::vector<double>& s_nodes,
                                               std::size_t substeps = 64);

} // namespace tic
