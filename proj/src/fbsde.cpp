#include "tic/fbsde.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace tic {

void SimConfig::validate() const {
    if (n_paths < 1 || n_steps < 1)
        throw ConfigError("SimConfig: n_paths and n_steps must be >= 1");
}

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::size_t nearest_index(const std::vector<double>& nodes, double v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (std::fabs(nodes[i] - v) < std::fabs(nodes[best] - v)) best = i;
    return best;
}

double bilinear(const Field2& f, const SpaceTimeGrid& g, double s, double y) {
    const double js = std::clamp(s / g.ds(), 0.0, double(g.ns() - 1));
    const std::size_t j = std::min<std::size_t>(std::size_t(js), g.ns() - 2);
    const double a = js - double(j);
    std::size_t l, l2;
    double b;
    if (g.periodic()) {
        const double span = double(g.ny()) * g.dy();
        double ly = std::fmod(y - g.y_min(), span);
        if (ly < 0.0) ly += span;
        ly /= g.dy();
        l = std::min<std::size_t>(std::size_t(ly), g.ny() - 1);
        l2 = (l + 1) % g.ny();
        b = ly - double(l);
    } else {
        const double ly =
            std::clamp((y - g.y_min()) / g.dy(), 0.0, double(g.ny() - 1));
        l = std::min<std::size_t>(std::size_t(ly), g.ny() - 2);
        l2 = l + 1;
        b = ly - double(l);
    }
    return (1.0 - a) * ((1.0 - b) * f.at(j, l) + b * f.at(j, l2)) +
           a * ((1.0 - b) * f.at(j + 1, l) + b * f.at(j + 1, l2));
}

// everything the path loop reads, precomputed on the anchored (t,x)-slice
struct SliceFields {
    std::size_t i0 = 0, k0 = 0;
    Field2 U, G, bF, sF, Z;
};

SliceFields build_slice(const Field4& u, const HamiltonianSpec& spec,
                        const SpaceTimeGrid& grid, double t_anchor, double x0,
                        const ArgminOptions& opts, Field2* gamma_out) {
    const std::size_t ns = grid.ns(), ny = grid.ny();
    SliceFields sl;
    sl.i0 = nearest_index(grid.s_nodes, t_anchor);
    sl.k0 = nearest_index(grid.y_nodes, x0);
    sl.U = Field2(ns, ny);
    sl.G = Field2(ns, ny);
    sl.bF = Field2(ns, ny);
    sl.sF = Field2(ns, ny);
    sl.Z = Field2(ns, ny);
    if (gamma_out) *gamma_out = Field2(ns, ny);

    const auto tr = diagonal_derivative_traces(u, grid);
    const auto ap = assemble_equilibrium_F(spec, grid, opts);
    const double sign = ap.negated ? -1.0 : 1.0;
    const double T = grid.T();
    const double t0 = grid.s_nodes[sl.i0], xv = grid.y_nodes[sl.k0];
    const bool per = grid.periodic();

    std::vector<double> uy(ny), uyy(ny), zy(ny);
    for (std::size_t j = 0; j < ns; ++j) {
        const auto f = u.line(sl.i0, j, sl.k0);
        line_dy(f, grid.dy(), per, uy);
        line_dyy(f, grid.dy(), per, uyy);
        const double s = grid.s_nodes[j];
        for (std::size_t l = 0; l < ny; ++l) {
            const double y = grid.y_nodes[l];
            const Control a =
                argmin_hamiltonian(spec, s, s, y, y, tr.d0.at(j, l),
                                   tr.d1.at(j, l), tr.d2.at(j, l), opts);
            sl.U.at(j, l) = f[l];
            sl.bF.at(j, l) = spec.b(s, y, a);
            sl.sF.at(j, l) = spec.sigma(s, y, a);
            sl.Z.at(j, l) = sl.sF.at(j, l) * uy[l];
            ZState z;
            z.u = sign * f[l];
            z.p = sign * uy[l];
            z.q = sign * uyy[l];
            z.ud = sign * tr.d0.at(j, l);
            z.pd = sign * tr.d1.at(j, l);
            z.qd = sign * tr.d2.at(j, l);
            const double Fhat = sign * ap.F.eval(T - t0, T - s, xv, y, z);
            sl.G.at(j, l) = Fhat - sl.bF.at(j, l) * uy[l] -
                            0.5 * sl.sF.at(j, l) * sl.sF.at(j, l) * uyy[l];
        }
        if (gamma_out) {
            const std::span<const double> zrow{sl.Z.values.data() + j * ny, ny};
            line_dy(zrow, grid.dy(), per, zy);
            for (std::size_t l = 0; l < ny; ++l)
                gamma_out->at(j, l) = sl.sF.at(j, l) * zy[l];
        }
    }
    return sl;
}

struct RunStats {
    double mean_signed = 0.0, mean_abs = 0.0, max_abs = 0.0, mean_y0 = 0.0;
    std::size_t kept = 0, discarded = 0;
};

RunStats run_paths(const SliceFields& sl, const SpaceTimeGrid& grid,
                   std::uint64_t key, std::size_t n_paths, std::size_t n_steps,
                   double x0, bool antithetic) {
    const double T = grid.T();
    const double s0 = grid.s_nodes[sl.i0];
    const double H = T - s0;
    const double dt = H / double(n_steps), sqdt = std::sqrt(dt);
    const double ylo = grid.y_min(), yhi = grid.y_nodes.back();
    const double span = yhi - ylo + grid.dy(); // periodic wrap period
    const bool per = grid.periodic();
    const double Y0 = bilinear(sl.U, grid, s0, x0);

    RunStats st;
    double sum_r = 0.0, sum_abs = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) {
        double X = x0, acc_g = 0.0, acc_zdw = 0.0;
        bool alive = true;
        for (std::size_t m = 0; m < n_steps; ++m) {
            const double s = s0 + double(m) * dt;
            const double b = bilinear(sl.bF, grid, s, X);
            const double sg = bilinear(sl.sF, grid, s, X);
            acc_g += bilinear(sl.G, grid, s, X) * dt;
            const double eta = antithetic
                                   ? (p % 2 ? -counter_normal(key, p / 2, m)
                                            : counter_normal(key, p / 2, m))
                                   : counter_normal(key, p, m);
            const double dw = sqdt * eta;
            acc_zdw += bilinear(sl.Z, grid, s, X) * dw;
            X += b * dt + sg * dw;
            if (per) {
                X = ylo + std::fmod(X - ylo, span);
                if (X < ylo) X += span;
            } else if (X < ylo || X > yhi) {
                alive = false;
                break;
            }
        }
        if (!alive) {
            ++st.discarded;
            continue;
        }
        const double gT = bilinear(sl.U, grid, T, X);
        const double r = Y0 - gT - acc_g + acc_zdw;
        sum_r += r;
        sum_abs += std::fabs(r);
        st.max_abs = std::max(st.max_abs, std::fabs(r));
        ++st.kept;
    }
    if (st.kept == 0)
        throw SolverError("simulate_flow: every path left the y-truncation");
    st.mean_signed = sum_r / double(st.kept);
    st.mean_abs = sum_abs / double(st.kept);
    st.mean_y0 = Y0; // Y(t,s) at the anchor is path-independent
    return st;
}

double fit_slope(const std::vector<double>& lx, const std::vector<double>& ly) {
    const double n = double(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

double counter_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step) {
    const std::uint64_t key = mix64(seed ^ mix64(path ^ 0x5bf03635aaf2f2ecULL));
    const std::uint64_t a = mix64(key ^ mix64(step ^ 0xc2b2ae3d27d4eb4fULL));
    const std::uint64_t b = mix64(a + 0x165667b19e3779f9ULL);
    const double u1 = (double(a >> 11) + 1.0) * 0x1p-53; // in (0, 1]
    const double u2 = double(b >> 11) * 0x1p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

ZGammaFields extract_zgamma(const Field4& u, const HamiltonianSpec& spec,
                            const SpaceTimeGrid& grid, double t_anchor, double x0,
                            const ArgminOptions& opts) {
    ZGammaFields out;
    const auto sl = build_slice(u, spec, grid, t_anchor, x0, opts, &out.Gamma);
    out.Z = sl.Z;
    return out;
}

ResidualReport simulate_flow(const Field4& u, const HamiltonianSpec& spec,
                             const SpaceTimeGrid& grid, const SimConfig& sim,
                             double t_anchor, const ArgminOptions& opts) {
    sim.validate();
    if (sim.x0 < grid.y_min() || sim.x0 > grid.y_nodes.back())
        throw ConfigError("simulate_flow: x0 outside the y-domain");
    const auto sl = build_slice(u, spec, grid, t_anchor, sim.x0, opts, nullptr);
    if (sl.i0 + 1 >= grid.ns())
        throw ConfigError("simulate_flow: t_anchor must precede T");

    ResidualReport rep;
    const auto main = run_paths(sl, grid, sim.seed, sim.n_paths, sim.n_steps,
                                sim.x0, sim.antithetic);
    rep.bsde_residual_mean = std::fabs(main.mean_signed);
    rep.bsde_residual_max = main.max_abs;
    rep.residual_abs_mean = main.mean_abs;
    rep.fk_identity_error =
        std::fabs(main.mean_y0 - u.at(sl.i0, sl.i0, sl.k0, sl.k0));
    rep.discarded = main.discarded;
    rep.discard_fraction = double(main.discarded) / double(sim.n_paths);
    rep.discard_warning = rep.discard_fraction > 0.10;

    // order in the time step: mean |residual| over three step counts
    {
        std::vector<double> lx, ly;
        for (std::size_t n : {std::max<std::size_t>(1, sim.n_steps / 4),
                              std::max<std::size_t>(1, sim.n_steps / 2),
                              sim.n_steps}) {
            if (!lx.empty() && std::exp(lx.back()) == double(n)) continue;
            const auto st =
                run_paths(sl, grid, sim.seed, sim.n_paths, n, sim.x0,
                          sim.antithetic);
            lx.push_back(std::log(double(n)));
            ly.push_back(std::log(std::max(st.mean_abs, 1e-300)));
        }
        rep.rate_vs_steps = lx.size() >= 2 ? -fit_slope(lx, ly) : 0.0;
    }
    // order in the path count: |mean signed residual| averaged over seed
    // replications, over three path counts
    {
        const std::size_t reps = 12;
        std::vector<double> lx, ly;
        for (std::size_t mth : {std::max<std::size_t>(2, sim.n_paths / 4),
                                std::max<std::size_t>(2, sim.n_paths / 2),
                                sim.n_paths}) {
            if (!lx.empty() && std::exp(lx.back()) == double(mth)) continue;
            double acc = 0.0;
            for (std::size_t r = 0; r < reps; ++r) {
                const std::uint64_t key = sim.seed ^ mix64(0xa076 + r);
                const auto st = run_paths(sl, grid, key, mth, sim.n_steps,
                                          sim.x0, sim.antithetic);
                acc += std::fabs(st.mean_signed);
            }
            lx.push_back(std::log(double(mth)));
            ly.push_back(std::log(std::max(acc / double(reps), 1e-300)));
        }
        rep.rate_vs_paths = lx.size() >= 2 ? -fit_slope(lx, ly) : 0.0;
    }
    return rep;
}

} // namespace tic
