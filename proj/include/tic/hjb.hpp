#pragma once

#include <functional>
#include <vector>

#include "tic/merton.hpp"
#include "tic/nonlinear.hpp"

namespace tic {

using Control = std::vector<double>;

// Controlled-diffusion data: state dynamics dY = b dt + sigma dW, running
// generator h (whose last argument is p*sigma), terminal data g with the
// (t,x) objective parameters, and a control box.  `maximize` marks utility
// problems; solvers canonicalize on minimization internally and negate.
struct HamiltonianSpec {
    std::function<double(double s, double y, const Control&)> b, sigma;
    std::function<double(double t, double s, double x, double y, const Control&,
                         double u, double z)>
        h;
    std::function<double(double t, double x, double y)> g;
    std::vector<double> control_lo, control_hi; // +-inf entries allowed
    // optional selection in the problem's own orientation; non-finite entries
    // signal "outside validity region" and trigger the numeric fallback
    std::function<Control(double t, double s, double x, double y, double u,
                          double p, double q)>
        closed_form_argmin;
    bool maximize = false;

    std::size_t n_controls() const { return control_lo.size(); }
    void validate(const SpaceTimeGrid& grid) const;
};

// H = 1/2 q sigma^2 + p b + h(t,s,x,y,a,u,p*sigma).  Throws ConfigError when
// a leaves the control box.
double hamiltonian_eval(const HamiltonianSpec& spec, double t, double s, double x,
                        double y, const Control& a, double u, double p, double q);

struct ArgminOptions {
    double q_floor = 1e-8; // |q| regularization in the numeric path
    std::size_t scan_points = 33;
    double tol = 1e-10;
    std::size_t max_sweeps = 20;
    double box_sentinel = 1e8; // stands in for infinite bounds
};

// Optimal control at the given arguments: the box minimizer of H for cost
// specs, the maximizer for utility specs.  Closed form when provided and
// valid; otherwise cyclic coordinate scan + golden-section refinement, ties
// toward the smallest control.  Throws SolverError "optimizer diverged" when
// an infinite box direction keeps the scan pinned at the sentinel.
Control argmin_hamiltonian(const HamiltonianSpec& spec, double t, double s,
                           double x, double y, double u, double p, double q,
                           const ArgminOptions& opts = {});

// Forward-time nonlinearity for the equilibrium problem: data are reindexed
// by (t,s) -> (T-t, T-s) so the terminal-value PDE becomes an initial-value
// march, and utility specs are negated.
struct AssembledProblem {
    Nonlinearity F;
    Field3 g_fwd;
    bool negated = false;
};
// psi evaluated at the diagonal arguments (the sophisticated agent).
AssembledProblem assemble_equilibrium_F(const HamiltonianSpec& spec,
                                        const SpaceTimeGrid& grid,
                                        const ArgminOptions& opts = {});
// Same, but the objective time fed to the control selection is remapped by
// policy_time (backward time -> backward time); the stitched partition game
// uses this to freeze the acting player's preference per subinterval.
AssembledProblem assemble_equilibrium_F(const HamiltonianSpec& spec,
                                        const SpaceTimeGrid& grid,
                                        const ArgminOptions& opts,
                                        std::function<double(double)> policy_time);
// psi evaluated at the local arguments (the naive agent); no diagonal
// coupling, so the (t,x) slices decouple into classical HJB solves.
AssembledProblem assemble_naive_F(const HamiltonianSpec& spec,
                                  const SpaceTimeGrid& grid,
                                  const ArgminOptions& opts = {});

// Time reversal (t,s) -> (T-t, T-s) as a pure index permutation; applying it
// twice is a bit-exact identity.
Field4 forward_backward_transform(const Field4& u);
Field2 forward_backward_transform(const Field2& v); // s-axis reversal
Field3 forward_backward_transform(const Field3& g); // t-axis reversal

struct EquilibriumConfig {
    NonlinearConfig nonlinear;
    ArgminOptions argmin;
    bool compute_naive = false;
    bool force_quasilinear = false; // requires a degenerate control box
};

struct EquilibriumResult {
    Field4 u_full; // backward time, problem orientation
    Field2 V;
    std::vector<Field2> policy; // one field per control component
    // filled when compute_naive; gap is the inconsistency cost in the
    // canonical minimization orientation (naive - V for utility specs,
    // V - naive for cost specs), nonnegative up to discretization error
    Field2 naive_value, gap;
    bool negated = false;
    ExtensionLog log;
};

EquilibriumResult solve_equilibrium(const HamiltonianSpec& spec,
                                    const SpaceTimeGrid& grid,
                                    const EquilibriumConfig& cfg);

// Diagonal value of the naive family of classical solves, problem
// orientation.  Shares the discretization of solve_equilibrium so a
// time-consistent spec yields a gap that vanishes to rounding.
Field2 naive_solve(const HamiltonianSpec& spec, const SpaceTimeGrid& grid,
                   const EquilibriumConfig& cfg);

struct GapReport {
    Field2 gap; // first argument minus second
    double max_gap = 0.0, min_gap = 0.0;
    double fitted_exponent = 0.0;
    bool exponent_defined = false;
};
// Difference statistics plus the least-squares slope of log max_y |gap(s)|
// against log(T-s) near s = T.  Pass the pair in the canonical minimization
// order (naive first for utility specs) to get a nonnegative gap.
GapReport gap_report(const Field2& V, const Field2& V_naive,
                     const SpaceTimeGrid& grid);

// Registered specs.
HamiltonianSpec merton_hamiltonian_spec(const MertonParams& p);
HamiltonianSpec heat_control_spec(); // time-consistent drift-control testbed

} // namespace tic
