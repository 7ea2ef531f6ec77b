#include "tic/game.hpp"

#include <cmath>
#include <sstream>

namespace tic {

double Partition::mesh() const {
    double m = 0.0;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k)
        m = std::max(m, knots[k + 1] - knots[k]);
    return m;
}

void Partition::validate(const SpaceTimeGrid& grid) const {
    if (knots.size() < 2)
        throw ConfigError("Partition: need at least two knots");
    const double T = grid.T();
    const double tol = 1e-9 * std::max(1.0, T);
    if (std::fabs(knots.front()) > tol || std::fabs(knots.back() - T) > tol)
        throw ConfigError("Partition: endpoints must be 0 and T");
    for (std::size_t k = 0; k + 1 < knots.size(); ++k)
        if (!(knots[k] < knots[k + 1]))
            throw ConfigError("Partition: knots must be strictly increasing");
    for (double t : knots) {
        const auto j = static_cast<std::size_t>(std::lround(t / grid.ds()));
        if (j >= grid.ns() || std::fabs(grid.s_nodes[j] - t) > tol)
            throw ConfigError("Partition: knots must lie on s-grid nodes");
    }
}

Partition Partition::uniform(double T, std::size_t N) {
    if (N == 0) throw ConfigError("Partition: uniform needs N >= 1");
    Partition p;
    p.knots.resize(N + 1);
    for (std::size_t k = 0; k <= N; ++k) p.knots[k] = T * double(k) / double(N);
    p.knots.back() = T;
    return p;
}

Partition Partition::parse(const std::string& text, double T) {
    if (text.rfind("uniform:", 0) == 0) {
        std::size_t pos = 0;
        const std::string arg = text.substr(8);
        const unsigned long n = std::stoul(arg, &pos);
        if (pos != arg.size())
            throw ConfigError("Partition: bad uniform count '" + arg + "'");
        return uniform(T, n);
    }
    Partition p;
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) p.knots.push_back(std::stod(tok));
    return p;
}

namespace {

// forward s-index of a backward knot time
std::size_t fwd_index(double t, const SpaceTimeGrid& grid) {
    const auto j = static_cast<std::size_t>(std::lround(t / grid.ds()));
    return grid.ns() - 1 - j;
}

} // namespace

PartitionResult partition_solve(const HamiltonianSpec& spec,
                                const Partition& partition,
                                const SpaceTimeGrid& grid,
                                const EquilibriumConfig& cfg) {
    partition.validate(grid);
    const std::size_t ns = grid.ns(), ny = grid.ny();
    const std::size_t N = partition.n_intervals();

    // the acting player on [t_{k-1}, t_k) selects controls with her objective
    // frozen at the subinterval start (s = T maps to the last player's start)
    auto freeze_at = [knots = partition.knots, N](double s) {
        std::size_t k = N - 1;
        while (k > 0 && knots[k] > s + 1e-12) --k;
        return knots[k];
    };
    auto ap = assemble_equilibrium_F(spec, grid, cfg.argmin, freeze_at);

    // forward subinterval bounds, ascending: forward interval m covers the
    // backward interval [t_{N-m}, t_{N-m+1}]
    std::vector<std::size_t> fidx(N + 1);
    for (std::size_t m = 0; m <= N; ++m)
        fidx[m] = fwd_index(partition.knots[N - m], grid);

    Field4 u_st(ns, ny);
    Field3 gcur = ap.g_fwd;
    for (std::size_t m = 1; m <= N; ++m) {
        const std::size_t ja = fidx[m - 1], jb = fidx[m];
        NonlinearConfig ncfg = cfg.nonlinear;
        ncfg.stepper.j_begin = ja;
        ncfg.stepper.j_end = jb;
        ncfg.initial_guess = Field4();
        auto nr = solve_nonlinear(ap.F, gcur, grid, ncfg);
        if (!nr.log.reached_T) {
            std::ostringstream msg;
            msg << "partition_solve: sub-problem [" << partition.knots[N - m]
                << ", " << partition.knots[N - m + 1] << "] stopped at tau="
                << nr.log.tau;
            throw SolverError(msg.str());
        }
        // stitching consistency: the knot plane handed to this player equals
        // the plane it marched from, exactly
        if (m > 1)
            for (std::size_t l = 0; l < ny; ++l)
                if (nr.u.at(ja, ja, l, l) != u_st.at(ja, ja, l, l))
                    throw SolverError(
                        "partition_solve: stitching consistency violated");
        for (std::size_t j = ja; j <= jb; ++j)
            for (std::size_t i = 0; i < ns; ++i)
                for (std::size_t k = 0; k < ny; ++k) {
                    auto dst = u_st.line(i, j, k);
                    auto src = nr.u.line(i, j, k);
                    std::copy(src.begin(), src.end(), dst.begin());
                }
        // hand the whole (t,x)-family at the knot to the next player, so each
        // earlier objective keeps its own preference while the dynamics switch
        // to the next player's policy
        if (m < N)
            for (std::size_t i = 0; i < ns; ++i)
                for (std::size_t k = 0; k < ny; ++k)
                    for (std::size_t l = 0; l < ny; ++l)
                        gcur.at(i, k, l) = nr.u.at(i, jb, k, l);
    }

    PartitionResult res;
    res.negated = ap.negated;
    Field4 u_prob = forward_backward_transform(u_st);
    if (res.negated)
        for (double& v : u_prob.values) v = -v;
    res.value = diagonal_trace(u_prob);
    const auto tr = diagonal_derivative_traces(u_prob, grid);
    res.policy.assign(spec.n_controls(), Field2(ns, ny));
    for (std::size_t j = 0; j < ns; ++j)
        for (std::size_t l = 0; l < ny; ++l) {
            const double s = grid.s_nodes[j], y = grid.y_nodes[l];
            const Control a = argmin_hamiltonian(
                spec, freeze_at(s), s, y, y, tr.d0.at(j, l), tr.d1.at(j, l),
                tr.d2.at(j, l), cfg.argmin);
            for (std::size_t m = 0; m < a.size(); ++m)
                res.policy[m].at(j, l) = a[m];
        }
    return res;
}

std::vector<RefineRow> refine_study(const HamiltonianSpec& spec,
                                    const std::vector<Partition>& partitions,
                                    const SpaceTimeGrid& grid,
                                    const EquilibriumConfig& cfg) {
    if (partitions.size() < 2)
        throw ConfigError("refine_study: need at least two partitions");
    EquilibriumConfig ecfg = cfg;
    ecfg.compute_naive = false;
    const auto eq = solve_equilibrium(spec, grid, ecfg);
    std::vector<RefineRow> rows;
    for (const auto& part : partitions) {
        const auto pr = partition_solve(spec, part, grid, ecfg);
        double d = 0.0;
        for (std::size_t j = 0; j < grid.ns(); ++j)
            for (std::size_t l = 0; l < grid.ny(); ++l)
                d = std::max(d, std::fabs(pr.value.at(j, l) - eq.V.at(j, l)));
        rows.push_back({part.mesh(), d});
    }
    return rows;
}

} // namespace tic
