#include "tic/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tic/errors.hpp"

namespace tic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp_box(double a, double lo, double hi) {
    return std::min(std::max(a, lo), hi);
}

bool in_box(const HamiltonianSpec& spec, const Control& a) {
    if (a.size() != spec.n_controls()) return false;
    for (std::size_t m = 0; m < a.size(); ++m) {
        const double tol = 1e-9 * (1.0 + std::abs(a[m]));
        if (a[m] < spec.control_lo[m] - tol || a[m] > spec.control_hi[m] + tol)
            return false;
    }
    return true;
}

// Canonical (minimization) Hamiltonian: utility specs are solved for -u, so
// their arguments flip sign and the value is negated.
double canon_H(const HamiltonianSpec& spec, double t, double s, double x, double y,
               const Control& a, double u, double p, double q) {
    if (spec.maximize)
        return -hamiltonian_eval(spec, t, s, x, y, a, -u, -p, -q);
    return hamiltonian_eval(spec, t, s, x, y, a, u, p, q);
}

Control canon_argmin(const HamiltonianSpec& spec, double t, double s, double x,
                     double y, double u, double p, double q,
                     const ArgminOptions& opts) {
    if (spec.maximize) return argmin_hamiltonian(spec, t, s, x, y, -u, -p, -q, opts);
    return argmin_hamiltonian(spec, t, s, x, y, u, p, q, opts);
}

} // namespace

void HamiltonianSpec::validate(const SpaceTimeGrid& grid) const {
    if (!b || !sigma || !h || !g)
        throw ConfigError("hamiltonian spec: b, sigma, h, g must all be set");
    if (control_lo.size() != control_hi.size())
        throw ConfigError("hamiltonian spec: control box dimension mismatch");
    for (std::size_t m = 0; m < control_lo.size(); ++m)
        if (!(control_lo[m] <= control_hi[m]))
            throw ConfigError("hamiltonian spec: control_lo > control_hi");
    // sigma >= 0 on a coarse sample of states and box points
    std::vector<Control> probes;
    Control lo(n_controls()), mid(n_controls()), hi(n_controls());
    for (std::size_t m = 0; m < n_controls(); ++m) {
        lo[m] = clamp_box(control_lo[m], -1e3, 1e3);
        hi[m] = clamp_box(control_hi[m], -1e3, 1e3);
        mid[m] = 0.5 * (lo[m] + hi[m]);
    }
    probes = {lo, mid, hi};
    const std::size_t js = std::max<std::size_t>(1, grid.ns() / 4);
    const std::size_t ls = std::max<std::size_t>(1, grid.ny() / 4);
    for (std::size_t j = 0; j < grid.ns(); j += js)
        for (std::size_t l = 0; l < grid.ny(); l += ls)
            for (const auto& a : probes)
                if (sigma(grid.s_nodes[j], grid.y_nodes[l], a) < 0.0)
                    throw ConfigError("hamiltonian spec: sigma < 0 at sampled state");
}

double hamiltonian_eval(const HamiltonianSpec& spec, double t, double s, double x,
                        double y, const Control& a, double u, double p, double q) {
    if (!in_box(spec, a))
        throw ConfigError("hamiltonian_eval: control out of bounds");
    const double sg = spec.sigma(s, y, a);
    return 0.5 * q * sg * sg + p * spec.b(s, y, a) + spec.h(t, s, x, y, a, u, p * sg);
}

Control argmin_hamiltonian(const HamiltonianSpec& spec, double t, double s,
                           double x, double y, double u, double p, double q,
                           const ArgminOptions& opts) {
    const std::size_t nc = spec.n_controls();
    if (nc == 0) return {};
    if (spec.closed_form_argmin) {
        Control a = spec.closed_form_argmin(t, s, x, y, u, p, q);
        bool ok = a.size() == nc;
        for (double v : a) ok = ok && std::isfinite(v);
        if (ok) {
            for (std::size_t m = 0; m < nc; ++m)
                a[m] = clamp_box(a[m], spec.control_lo[m], spec.control_hi[m]);
            return a;
        }
    }
    // numeric path: regularize q away from the degenerate sign
    const double qt = spec.maximize ? std::min(q, -opts.q_floor)
                                    : std::max(q, opts.q_floor);
    auto obj = [&](const Control& a) {
        const double v = hamiltonian_eval(spec, t, s, x, y, a, u, p, qt);
        return spec.maximize ? -v : v;
    };
    std::vector<double> lo(nc), hi(nc);
    std::vector<bool> open(nc);
    Control a(nc);
    for (std::size_t m = 0; m < nc; ++m) {
        open[m] = !std::isfinite(spec.control_lo[m]) || !std::isfinite(spec.control_hi[m]);
        lo[m] = std::max(spec.control_lo[m], -opts.box_sentinel);
        hi[m] = std::min(spec.control_hi[m], opts.box_sentinel);
        a[m] = 0.5 * (lo[m] + hi[m]);
    }
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    for (std::size_t sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        double moved = 0.0;
        for (std::size_t m = 0; m < nc; ++m) {
            const double prev = a[m];
            // coarse scan, strict improvement keeps the smallest control
            const std::size_t np = std::max<std::size_t>(opts.scan_points, 3);
            std::size_t best = 0;
            double best_val = kInf;
            for (std::size_t i = 0; i < np; ++i) {
                a[m] = lo[m] + (hi[m] - lo[m]) * double(i) / double(np - 1);
                const double v = obj(a);
                if (v < best_val) {
                    best_val = v;
                    best = i;
                }
            }
            double bl = lo[m] + (hi[m] - lo[m]) *
                                    double(best > 0 ? best - 1 : 0) / double(np - 1);
            double br = lo[m] + (hi[m] - lo[m]) *
                                    double(std::min(best + 1, np - 1)) / double(np - 1);
            // golden-section refinement on the bracketing cells
            double c1 = br - gr * (br - bl), c2 = bl + gr * (br - bl);
            a[m] = c1;
            double f1 = obj(a);
            a[m] = c2;
            double f2 = obj(a);
            while (br - bl > opts.tol * (1.0 + std::abs(bl) + std::abs(br))) {
                if (f1 <= f2) {
                    br = c2;
                    c2 = c1;
                    f2 = f1;
                    c1 = br - gr * (br - bl);
                    a[m] = c1;
                    f1 = obj(a);
                } else {
                    bl = c1;
                    c1 = c2;
                    f1 = f2;
                    c2 = bl + gr * (br - bl);
                    a[m] = c2;
                    f2 = obj(a);
                }
            }
            a[m] = 0.5 * (bl + br);
            if (open[m] && std::abs(a[m]) > 0.999 * opts.box_sentinel)
                throw SolverError("argmin_hamiltonian: optimizer diverged");
            moved = std::max(moved, std::abs(a[m] - prev));
        }
        if (moved <= opts.tol * (1.0 + std::abs(a[0]))) break;
    }
    return a;
}

namespace {

AssembledProblem make_assembled(const HamiltonianSpec& spec,
                                const SpaceTimeGrid& grid,
                                const ArgminOptions& opts, bool local_psi,
                                std::function<double(double)> policy_time = {}) {
    spec.validate(grid);
    const double T = grid.T();
    const double sign = spec.maximize ? -1.0 : 1.0;
    AssembledProblem ap;
    ap.negated = spec.maximize;
    ap.g_fwd = Field3(grid.ns(), grid.ny());
    for (std::size_t i = 0; i < grid.ns(); ++i)
        for (std::size_t k = 0; k < grid.ny(); ++k)
            for (std::size_t l = 0; l < grid.ny(); ++l)
                ap.g_fwd.at(i, k, l) =
                    sign * spec.g(T - grid.s_nodes[i], grid.y_nodes[k], grid.y_nodes[l]);
    ap.F.eval = [spec, opts, T, local_psi, policy_time](
                    double t, double s, double x, double y, const ZState& z) {
        const double tb = T - t, sb = T - s;
        const double tp = policy_time ? policy_time(sb) : sb;
        const Control a =
            local_psi ? canon_argmin(spec, tb, sb, x, y, z.u, z.p, z.q, opts)
                      : canon_argmin(spec, tp, sb, y, y, z.ud, z.pd, z.qd, opts);
        return canon_H(spec, tb, sb, x, y, a, z.u, z.p, z.q);
    };
    // representative diagonal state of the transformed terminal data, used by
    // the sampled ellipticity probe
    const std::size_t lm = grid.ny() / 2;
    const double dy = grid.dy();
    const double u0 = ap.g_fwd.at(0, lm, lm);
    const double p0 = (ap.g_fwd.at(0, lm, std::min(lm + 1, grid.ny() - 1)) -
                       ap.g_fwd.at(0, lm, lm > 0 ? lm - 1 : 0)) /
                      (2.0 * dy);
    const double q0 = (ap.g_fwd.at(0, lm, std::min(lm + 1, grid.ny() - 1)) -
                       2.0 * u0 + ap.g_fwd.at(0, lm, lm > 0 ? lm - 1 : 0)) /
                      (dy * dy);
    ap.F.z_center = {u0, p0, q0, u0, p0, q0};
    return ap;
}

} // namespace

AssembledProblem assemble_equilibrium_F(const HamiltonianSpec& spec,
                                        const SpaceTimeGrid& grid,
                                        const ArgminOptions& opts) {
    return make_assembled(spec, grid, opts, false);
}

AssembledProblem assemble_equilibrium_F(const HamiltonianSpec& spec,
                                        const SpaceTimeGrid& grid,
                                        const ArgminOptions& opts,
                                        std::function<double(double)> policy_time) {
    return make_assembled(spec, grid, opts, false, std::move(policy_time));
}

AssembledProblem assemble_naive_F(const HamiltonianSpec& spec,
                                  const SpaceTimeGrid& grid,
                                  const ArgminOptions& opts) {
    return make_assembled(spec, grid, opts, true);
}

Field4 forward_backward_transform(const Field4& u) {
    Field4 out(u.ns, u.ny);
    for (std::size_t i = 0; i < u.ns; ++i)
        for (std::size_t j = 0; j < u.ns; ++j)
            for (std::size_t k = 0; k < u.ny; ++k)
                for (std::size_t l = 0; l < u.ny; ++l)
                    out.at(i, j, k, l) = u.at(u.ns - 1 - i, u.ns - 1 - j, k, l);
    return out;
}

Field2 forward_backward_transform(const Field2& v) {
    Field2 out(v.ns, v.ny);
    for (std::size_t j = 0; j < v.ns; ++j)
        for (std::size_t l = 0; l < v.ny; ++l)
            out.at(j, l) = v.at(v.ns - 1 - j, l);
    return out;
}

Field3 forward_backward_transform(const Field3& g) {
    Field3 out(g.nt, g.ny);
    for (std::size_t i = 0; i < g.nt; ++i)
        for (std::size_t k = 0; k < g.ny; ++k)
            for (std::size_t l = 0; l < g.ny; ++l)
                out.at(i, k, l) = g.at(g.nt - 1 - i, k, l);
    return out;
}

namespace {

// Shared tail: transform the forward solution back and restore orientation.
Field4 to_problem_orientation(Field4 u_fwd, bool negated) {
    Field4 u = forward_backward_transform(u_fwd);
    if (negated)
        for (double& v : u.values) v = -v;
    return u;
}

} // namespace

Field2 naive_solve(const HamiltonianSpec& spec, const SpaceTimeGrid& grid,
                   const EquilibriumConfig& cfg) {
    auto ap = assemble_naive_F(spec, grid, cfg.argmin);
    auto nr = solve_nonlinear(ap.F, ap.g_fwd, grid, cfg.nonlinear);
    if (!nr.log.reached_T)
        throw SolverError("naive_solve: classical family stopped before T");
    return diagonal_trace(to_problem_orientation(std::move(nr.u), ap.negated));
}

EquilibriumResult solve_equilibrium(const HamiltonianSpec& spec,
                                    const SpaceTimeGrid& grid,
                                    const EquilibriumConfig& cfg) {
    EquilibriumResult res;
    Field4 u_fwd;
    if (cfg.force_quasilinear) {
        for (std::size_t m = 0; m < spec.n_controls(); ++m)
            if (spec.control_lo[m] != spec.control_hi[m])
                throw ConfigError(
                    "solve_equilibrium: quasilinear path needs a degenerate control box");
        spec.validate(grid);
        const Control a0 = spec.control_lo;
        const double T = grid.T();
        res.negated = spec.maximize;
        auto ap = make_assembled(spec, grid, cfg.argmin, false);
        CoefFn a2 = [spec, a0, T](double, double s, double, double y) {
            const double sg = spec.sigma(T - s, y, a0);
            return 0.5 * sg * sg;
        };
        NonlinFn Q = [spec, a0, T](double t, double s, double x, double y,
                                   const ZState& z) {
            const double tb = T - t, sb = T - s;
            const double sg = spec.sigma(sb, y, a0);
            const double drift = z.p * spec.b(sb, y, a0);
            const double hh = spec.maximize
                                  ? -spec.h(tb, sb, x, y, a0, -z.u, -z.p * sg)
                                  : spec.h(tb, sb, x, y, a0, z.u, z.p * sg);
            return drift + hh;
        };
        u_fwd = quasilinear_solve(a2, Q, ap.g_fwd, grid, cfg.nonlinear.stepper);
        res.log.reached_T = true;
        res.log.tau = grid.T();
    } else {
        auto ap = assemble_equilibrium_F(spec, grid, cfg.argmin);
        res.negated = ap.negated;
        auto nr = solve_nonlinear(ap.F, ap.g_fwd, grid, cfg.nonlinear);
        res.log = nr.log;
        u_fwd = std::move(nr.u);
    }
    res.u_full = to_problem_orientation(std::move(u_fwd), res.negated);
    res.V = diagonal_trace(res.u_full);
    const auto tr = diagonal_derivative_traces(res.u_full, grid);
    res.policy.assign(spec.n_controls(), Field2(grid.ns(), grid.ny()));
    for (std::size_t j = 0; j < grid.ns(); ++j)
        for (std::size_t l = 0; l < grid.ny(); ++l) {
            const double s = grid.s_nodes[j], y = grid.y_nodes[l];
            const Control a =
                argmin_hamiltonian(spec, s, s, y, y, tr.d0.at(j, l), tr.d1.at(j, l),
                                   tr.d2.at(j, l), cfg.argmin);
            for (std::size_t m = 0; m < a.size(); ++m) res.policy[m].at(j, l) = a[m];
        }
    if (cfg.compute_naive) {
        res.naive_value = naive_solve(spec, grid, cfg);
        res.gap = Field2(grid.ns(), grid.ny());
        const double sign = res.negated ? -1.0 : 1.0;
        for (std::size_t j = 0; j < grid.ns(); ++j)
            for (std::size_t l = 0; l < grid.ny(); ++l)
                res.gap.at(j, l) =
                    sign * (res.V.at(j, l) - res.naive_value.at(j, l));
    }
    return res;
}

GapReport gap_report(const Field2& V, const Field2& V_naive,
                     const SpaceTimeGrid& grid) {
    if (V.ns != V_naive.ns || V.ny != V_naive.ny)
        throw ConfigError("gap_report: shape mismatch");
    GapReport rep;
    rep.gap = Field2(V.ns, V.ny);
    rep.max_gap = -kInf;
    rep.min_gap = kInf;
    for (std::size_t j = 0; j < V.ns; ++j)
        for (std::size_t l = 0; l < V.ny; ++l) {
            const double g = V.at(j, l) - V_naive.at(j, l);
            rep.gap.at(j, l) = g;
            rep.max_gap = std::max(rep.max_gap, g);
            rep.min_gap = std::min(rep.min_gap, g);
        }
    // slope of log max_y |gap| vs log(T-s) on the half of the nodes nearest T
    const double T = grid.T();
    std::vector<double> lx, ly;
    for (std::size_t j = grid.ns() / 2; j + 1 < grid.ns(); ++j) {
        double m = 0.0;
        for (std::size_t l = 0; l < V.ny; ++l)
            m = std::max(m, std::abs(rep.gap.at(j, l)));
        if (m > 1e-13) {
            lx.push_back(std::log(T - grid.s_nodes[j]));
            ly.push_back(std::log(m));
        }
    }
    if (lx.size() >= 3) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sx += lx[i];
            sy += ly[i];
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        const double n = double(lx.size());
        rep.fitted_exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        rep.exponent_defined = true;
    }
    return rep;
}

HamiltonianSpec merton_hamiltonian_spec(const MertonParams& mp) {
    mp.validate();
    HamiltonianSpec spec;
    spec.maximize = true;
    spec.control_lo = {0.0, 1e-6}; // (stock holding, consumption rate)
    spec.control_hi = {25.0, 25.0};
    spec.b = [mp](double, double y, const Control& a) {
        return mp.r * y + (mp.mu - mp.r) * a[0] - a[1];
    };
    spec.sigma = [mp](double, double, const Control& a) { return mp.sigma * a[0]; };
    spec.h = [mp](double t, double s, double x, double, const Control& a, double u,
                  double) {
        return mp.v(t, s) * std::pow(a[1], mp.beta) - mp.w(t, s) * u +
               mp.z(t, s) * std::pow(x, mp.gamma);
    };
    spec.g = [mp](double t, double x, double y) {
        return mp.g1(t) * std::pow(y, mp.beta) + mp.g2(t) * std::pow(x, mp.gamma);
    };
    spec.closed_form_argmin = [mp](double t, double s, double, double, double,
                                   double p, double q) -> Control {
        if (p > 0.0 && q < 0.0)
            return {-(mp.mu - mp.r) * p / (mp.sigma * mp.sigma * q),
                    std::pow(p / (mp.beta * mp.v(t, s)), 1.0 / (mp.beta - 1.0))};
        const double nan = std::numeric_limits<double>::quiet_NaN();
        return {nan, nan};
    };
    return spec;
}

HamiltonianSpec heat_control_spec() {
    HamiltonianSpec spec;
    spec.control_lo = {-2.0};
    spec.control_hi = {2.0};
    spec.b = [](double, double, const Control& a) { return a[0]; };
    spec.sigma = [](double, double, const Control&) { return 1.0; };
    spec.h = [](double, double, double, double, const Control& a, double, double) {
        return 0.5 * a[0] * a[0];
    };
    spec.g = [](double, double, double y) { return std::exp(-y * y); };
    spec.closed_form_argmin = [](double, double, double, double, double, double p,
                                 double) -> Control {
        return {clamp_box(-p, -2.0, 2.0)};
    };
    return spec;
}

} // namespace tic
