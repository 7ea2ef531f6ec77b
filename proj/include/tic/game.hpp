#pragma once

#include <string>
#include <vector>

#include "tic/hjb.hpp"

namespace tic {

// Time partition 0 = t_0 < ... < t_N = T for the N-person stitched game.
struct Partition {
    std::vector<double> knots;

    std::size_t n_intervals() const { return knots.empty() ? 0 : knots.size() - 1; }
    double mesh() const; // max subinterval length
    // strict increase, exact endpoints, every knot on an s-grid node; throws
    // ConfigError otherwise
    void validate(const SpaceTimeGrid& grid) const;

    static Partition uniform(double T, std::size_t N);
    // "uniform:N" or a comma-separated knot list "0,0.25,1"
    static Partition parse(const std::string& text, double T);
};

struct PartitionResult {
    Field2 value;               // stitched diagonal value, problem orientation
    std::vector<Field2> policy; // one field per control component
    bool negated = false;
};

// Backward stitching of the N-person game: on each [t_{k-1}, t_k) the acting
// player's control selection freezes its objective time at t_{k-1} while
// every (t,x)-slice keeps its own preference in the running generator, and
// the whole slice family at the knot is handed to the next player as
// terminal data.  The refinement limit in the partition mesh is the
// equilibrium solution; a single-knot partition is the pre-committer.
PartitionResult partition_solve(const HamiltonianSpec& spec,
                                const Partition& partition,
                                const SpaceTimeGrid& grid,
                                const EquilibriumConfig& cfg);

struct RefineRow {
    double mesh = 0.0;
    double sup_diff = 0.0; // sup |partition value - equilibrium value|
};

// Convergence table against solve_equilibrium's value; needs >= 2 partitions.
std::vector<RefineRow> refine_study(const HamiltonianSpec& spec,
                                    const std::vector<Partition>& partitions,
                                    const SpaceTimeGrid& grid,
                                    const EquilibriumConfig& cfg);

} // namespace tic
