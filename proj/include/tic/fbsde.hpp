#pragma once

#include <cstdint>

#include "tic/hjb.hpp"

namespace tic {

struct SimConfig {
    std::size_t n_paths = 1000;
    std::size_t n_steps = 64;
    std::uint64_t seed = 0;
    double x0 = 0.0;
    bool antithetic = false;

    void validate() const; // counts >= 1
};

struct ResidualReport {
    double bsde_residual_mean = 0.0; // |mean signed Y-residual|
    double bsde_residual_max = 0.0;  // max |per-path residual|
    double residual_abs_mean = 0.0;  // mean |per-path residual|
    double fk_identity_error = 0.0;  // |mean Y(anchor) - u(anchor)|
    double rate_vs_steps = 0.0;      // fitted order in the time step
    double rate_vs_paths = 0.0;      // fitted order in the path count
    std::size_t discarded = 0;       // paths leaving the y-truncation
    double discard_fraction = 0.0;
    bool discard_warning = false; // > 10% discards
};

// Standard-normal increment keyed by (seed, path, step): order-independent
// across paths, bit-reproducible.
double counter_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step);

// Z = sigma u_y and Gamma = sigma (sigma u_y)_y on the (t,x)-slice nearest
// (t_anchor, x0), under the equilibrium policy; fields over (s-node, y-node).
struct ZGammaFields {
    Field2 Z, Gamma;
};
ZGammaFields extract_zgamma(const Field4& u, const HamiltonianSpec& spec,
                            const SpaceTimeGrid& grid, double t_anchor, double x0,
                            const ArgminOptions& opts = {});

// Monte Carlo residual of the probabilistic representation: simulate the
// controlled state from (t_anchor, x0), extract Y(t,s) = u(t,s,X(t),X(s))
// and Z = sigma u_y from the solved field (bilinear in (s,y) on the nearest
// (t,x)-slice), and measure |Y - g - int F dtau + int Z dW| with the same
// Brownian increments on both sides.  u is in problem orientation, as
// produced by solve_equilibrium.  Rates are fitted over three resolutions in
// each of n_steps and n_paths (the latter averaged over seed replications).
ResidualReport simulate_flow(const Field4& u, const HamiltonianSpec& spec,
                             const SpaceTimeGrid& grid, const SimConfig& sim,
                             double t_anchor, const ArgminOptions& opts = {});

} // namespace tic
