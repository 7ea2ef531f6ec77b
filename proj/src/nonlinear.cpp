#include "tic/nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "tic/tridiag.hpp"

namespace tic {

namespace {

struct PlaneTraces {
    std::array<std::vector<double>, 3> d;
};

// d_I(s_j, y_l) of the s = s_j plane at t = s_j.
PlaneTraces plane_traces(const Field4& u, const SpaceTimeGrid& g, std::size_t j) {
    const std::size_t ny = g.ny();
    PlaneTraces tr;
    for (auto& v : tr.d) v.assign(ny, 0.0);
    std::vector<double> buf(ny);
    for (std::size_t l = 0; l < ny; ++l) {
        auto line = u.line(j, j, l);
        tr.d[0][l] = line[l];
        line_dy(line, g.dy(), g.periodic(), buf);
        tr.d[1][l] = buf[l];
        line_dyy(line, g.dy(), g.periodic(), buf);
        tr.d[2][l] = buf[l];
    }
    return tr;
}

std::size_t node_index(double v, const std::vector<double>& nodes) {
    const double h = nodes[1] - nodes[0];
    long i = std::lround((v - nodes[0]) / h);
    if (i < 0) i = 0;
    if (i >= long(nodes.size())) i = long(nodes.size()) - 1;
    return std::size_t(i);
}

} // namespace

double Nonlinearity::partial(int m, double t, double s, double x, double y,
                             const ZState& z) const {
    if (partials[m]) return partials[m](t, s, x, y, z);
    const double h = h_z_base * (1.0 + std::fabs(z[m]));
    ZState zp = z, zm = z;
    zp[m] += h;
    zm[m] -= h;
    return (eval(t, s, x, y, zp) - eval(t, s, x, y, zm)) / (2.0 * h);
}

double Nonlinearity::ball_distance(const ZState& z) const {
    double s2 = 0.0;
    for (int m = 0; m < 6; ++m) {
        const double d = z[m] - z_center[m];
        s2 += d * d;
    }
    return std::sqrt(s2);
}

void Nonlinearity::check_ellipticity(const SpaceTimeGrid& g) const {
    if (lambda_ell <= 0.0) return; // no claimed constant, nothing to verify
    ZState z;
    for (int m = 0; m < 6; ++m) z[m] = z_center[m];
    const std::size_t step_s = std::max<std::size_t>(1, g.ns() / 5);
    const std::size_t step_y = std::max<std::size_t>(1, g.ny() / 5);
    for (std::size_t j = 0; j < g.ns(); j += step_s)
        for (std::size_t l = 0; l < g.ny(); l += step_y) {
            const double s = g.s_nodes[j], y = g.y_nodes[l];
            const double fq = partial(2, s, s, y, y, z);
            const double fqd = partial(5, s, s, y, y, z);
            if (fq < lambda_ell || fq + fqd < lambda_ell) {
                std::ostringstream msg;
                msg << "nonlinearity ellipticity violated at (s,y)=(" << s << ','
                    << y << "): dF/dq=" << fq << " dF/dqd=" << fqd
                    << " lambda=" << lambda_ell;
                throw ConfigError(msg.str());
            }
        }
}

CoefficientSet linearize_at_initial(const Nonlinearity& F, const Field3& g,
                                    const SpaceTimeGrid& grid, std::size_t j0) {
    const std::size_t ns = grid.ns(), ny = grid.ny();
    if (g.nt != ns || g.ny != ny)
        throw ConfigError("linearize_at_initial: data shape mismatch");

    struct Tables {
        Field3 g1, g2;              // y-derivatives of g
        std::array<std::vector<double>, 3> diag;
        SpaceTimeGrid grid;
        double s_frozen;
    };
    auto tb = std::make_shared<Tables>();
    tb->grid = grid;
    tb->s_frozen = grid.s_nodes[j0];
    tb->g1 = Field3(ns, ny);
    tb->g2 = Field3(ns, ny);
    std::vector<double> b1(ny), b2(ny);
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t k = 0; k < ny; ++k) {
            std::span<const double> line{&g.values[(i * ny + k) * ny], ny};
            line_dy(line, grid.dy(), grid.periodic(), b1);
            line_dyy(line, grid.dy(), grid.periodic(), b2);
            for (std::size_t l = 0; l < ny; ++l) {
                tb->g1.at(i, k, l) = b1[l];
                tb->g2.at(i, k, l) = b2[l];
            }
        }
    for (auto& v : tb->diag) v.assign(ny, 0.0);
    for (std::size_t l = 0; l < ny; ++l) {
        tb->diag[0][l] = g.at(j0, l, l);
        tb->diag[1][l] = tb->g1.at(j0, l, l);
        tb->diag[2][l] = tb->g2.at(j0, l, l);
    }

    auto theta0 = [tb, &g](double t, double x, double y) {
        const std::size_t i = node_index(t, tb->grid.s_nodes);
        const std::size_t k = node_index(x, tb->grid.y_nodes);
        const std::size_t l = node_index(y, tb->grid.y_nodes);
        ZState z;
        z.u = g.at(i, k, l);
        z.p = tb->g1.at(i, k, l);
        z.q = tb->g2.at(i, k, l);
        z.ud = tb->diag[0][l];
        z.pd = tb->diag[1][l];
        z.qd = tb->diag[2][l];
        return z;
    };

    // domain gate: theta0 must sit inside B(z_center, R0/2)
    double worst = 0.0;
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t k = 0; k < ny; ++k)
            for (std::size_t l = 0; l < ny; ++l) {
                ZState z = theta0(grid.s_nodes[i], grid.y_nodes[k], grid.y_nodes[l]);
                worst = std::max(worst, F.ball_distance(z));
            }
    if (worst > 0.5 * F.domain_radius)
        throw ConfigError("initial data outside nonlinearity domain");

    // The frozen coefficients depend on (t,x,y) only; tabulate them once so
    // the stepper's inner loops never re-evaluate F.
    struct CoefTables {
        std::array<Field3, 3> A, B;
        SpaceTimeGrid grid;
    };
    auto ct = std::make_shared<CoefTables>();
    ct->grid = grid;
    for (int I = 0; I < 3; ++I) {
        ct->A[I] = Field3(ns, ny);
        ct->B[I] = Field3(ns, ny);
    }
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t k = 0; k < ny; ++k)
            for (std::size_t l = 0; l < ny; ++l) {
                const double t = grid.s_nodes[i], x = grid.y_nodes[k],
                             y = grid.y_nodes[l];
                ZState z = theta0(t, x, y);
                for (int I = 0; I < 3; ++I) {
                    ct->A[I].at(i, k, l) = F.partial(I, t, tb->s_frozen, x, y, z);
                    ct->B[I].at(i, k, l) = -F.partial(3 + I, t, tb->s_frozen, x, y, z);
                }
            }

    CoefficientSet C;
    C.lambda_ell = F.lambda_ell;
    for (int I = 0; I < 3; ++I) {
        C.A[I] = [ct, I](double t, double, double x, double y) {
            return ct->A[I].at(node_index(t, ct->grid.s_nodes),
                               node_index(x, ct->grid.y_nodes),
                               node_index(y, ct->grid.y_nodes));
        };
        C.B[I] = [ct, I](double t, double, double x, double y) {
            return ct->B[I].at(node_index(t, ct->grid.s_nodes),
                               node_index(x, ct->grid.y_nodes),
                               node_index(y, ct->grid.y_nodes));
        };
    }
    return C;
}

Field4 picard_step(const Field4& u_k, const Nonlinearity& F,
                   const CoefficientSet& frozen, const Field3& g,
                   const SpaceTimeGrid& grid, const StepperConfig& cfg) {
    const std::size_t ns = grid.ns(), ny = grid.ny();
    const std::size_t jb = cfg.j_begin;
    const std::size_t je = std::min<std::size_t>(cfg.j_end, ns - 1);
    Field4 src(ns, ny);
    std::vector<double> bp(ny), bq(ny);
    for (std::size_t j = jb; j <= je; ++j) {
        PlaneTraces tr = plane_traces(u_k, grid, j);
        const double s = grid.s_nodes[j];
        for (std::size_t i = 0; i < ns; ++i) {
            const double t = grid.s_nodes[i];
            for (std::size_t k = 0; k < ny; ++k) {
                const double x = grid.y_nodes[k];
                auto line = u_k.line(i, j, k);
                line_dy(line, grid.dy(), grid.periodic(), bp);
                line_dyy(line, grid.dy(), grid.periodic(), bq);
                auto out = src.line(i, j, k);
                for (std::size_t l = 0; l < ny; ++l) {
                    const double y = grid.y_nodes[l];
                    ZState z{line[l], bp[l], bq[l],
                             tr.d[0][l], tr.d[1][l], tr.d[2][l]};
                    if (F.ball_distance(z) > F.domain_radius) {
                        std::ostringstream msg;
                        msg << "iterate left domain ball at (t,s,x,y)=(" << t
                            << ',' << s << ',' << x << ',' << y << ')';
                        throw DomainExitError(msg.str());
                    }
                    // L'u_k = sum A dI u_k - sum B dI u_k(diag)
                    double Lu = 0.0;
                    const double loc[3] = {z.u, z.p, z.q};
                    const double dia[3] = {z.ud, z.pd, z.qd};
                    for (int I = 0; I < 3; ++I) {
                        if (frozen.A[I]) Lu += frozen.A[I](t, s, x, y) * loc[I];
                        if (frozen.B[I]) Lu -= frozen.B[I](t, s, x, y) * dia[I];
                    }
                    out[l] = F.eval(t, s, x, y, z) - Lu;
                }
            }
        }
    }
    LinearProblem lp{grid, frozen, std::move(src), g};
    return solve_linear(lp, cfg);
}

NonlinearResult solve_nonlinear(const Nonlinearity& F, const Field3& g,
                                const SpaceTimeGrid& grid,
                                const NonlinearConfig& cfg) {
    const std::size_t ns = grid.ns(), ny = grid.ny();
    F.check_ellipticity(grid);
    const std::size_t j0 = std::min<std::size_t>(cfg.stepper.j_begin, ns - 1);
    const std::size_t j1 = std::min<std::size_t>(cfg.stepper.j_end, ns - 1);
    if (j0 >= j1)
        throw ConfigError("solve_nonlinear: empty march range");

    NonlinearResult res;
    res.u = Field4(ns, ny);
    res.log.blow_up_norm = cfg.blow_up_norm;
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t k = 0; k < ny; ++k)
            for (std::size_t l = 0; l < ny; ++l)
                res.u.at(i, j0, k, l) = g.at(i, k, l);

    auto plane_dist = [&](const Field4& a, const Field4& b, std::size_t j0,
                          std::size_t j1) {
        double m = 0.0;
        for (std::size_t j = j0; j <= j1; ++j)
            for (std::size_t i = 0; i < ns; ++i)
                for (std::size_t k = 0; k < ny; ++k) {
                    auto la = a.line(i, j, k);
                    auto lb = b.line(i, j, k);
                    for (std::size_t l = 0; l < ny; ++l)
                        m = std::max(m, std::fabs(la[l] - lb[l]));
                }
        return m;
    };

    std::size_t delta_steps = ns - 1;
    if (std::isfinite(cfg.delta_init)) {
        delta_steps = std::max<std::size_t>(
            1, std::size_t(std::lround(cfg.delta_init / grid.ds())));
    }

    std::size_t j_start = j0;
    Field3 gcur = g;
    while (j_start < j1) {
        const std::size_t j_end = std::min(j_start + delta_steps, j1);
        StepperConfig scfg = cfg.stepper;
        scfg.j_begin = j_start;
        scfg.j_end = j_end;

        CoefficientSet frozen = linearize_at_initial(F, gcur, grid, j_start);

        // initial iterate: constant extension of the interval's initial data
        Field4 cur(ns, ny);
        if (!cfg.initial_guess.values.empty() && j_start == j0) {
            cur = cfg.initial_guess;
        } else {
            for (std::size_t j = j_start; j <= j_end; ++j)
                for (std::size_t i = 0; i < ns; ++i)
                    for (std::size_t k = 0; k < ny; ++k)
                        for (std::size_t l = 0; l < ny; ++l)
                            cur.at(i, j, k, l) = gcur.at(i, k, l);
        }

        bool converged = false, halve = false;
        std::string stop_status;
        double prev_dist = -1.0;
        std::size_t bad_ratio_streak = 0;
        std::vector<double> hist, ratios;
        try {
            for (std::size_t it = 0; it < cfg.max_outer; ++it) {
                Field4 next = picard_step(cur, F, frozen, gcur, grid, scfg);
                const double dist = plane_dist(next, cur, j_start, j_end);
                hist.push_back(dist);
                if (prev_dist > 0.0) {
                    const double ratio = dist / prev_dist;
                    ratios.push_back(ratio);
                    if (ratio > cfg.rho_target && dist > cfg.outer_tol)
                        ++bad_ratio_streak;
                    else
                        bad_ratio_streak = 0;
                }
                prev_dist = dist;
                cur = std::move(next);
                double supn = 0.0;
                for (std::size_t j = j_start; j <= j_end; ++j)
                    for (std::size_t i = 0; i < ns; ++i)
                        for (std::size_t k = 0; k < ny; ++k)
                            for (double v : cur.line(i, j, k))
                                supn = std::max(supn, std::fabs(v));
                if (supn > cfg.blow_up_norm) {
                    stop_status = "max-interval-reached";
                    break;
                }
                if (dist <= cfg.outer_tol) {
                    converged = true;
                    break;
                }
                if (bad_ratio_streak >= 2) {
                    halve = true;
                    break;
                }
            }
        } catch (const DomainExitError&) {
            stop_status = "domain-exit";
        }

        for (double r : hist) res.picard.residual_history.push_back(r);
        for (double r : ratios) res.picard.contraction_ratios.push_back(r);

        if (!stop_status.empty()) {
            res.log.intervals.push_back(
                {grid.s_nodes[j_start], grid.s_nodes[j_end], stop_status});
            res.log.tau = grid.s_nodes[j_start];
            res.picard.iterate = std::move(cur);
            res.picard.delta = double(delta_steps) * grid.ds();
            return res;
        }
        if (!converged || halve) {
            if (delta_steps == 1) {
                std::ostringstream msg;
                msg << "solve_nonlinear: no convergent sub-interval at s="
                    << grid.s_nodes[j_start] << " (delta underflow); residuals:";
                for (double r : hist) msg << ' ' << r;
                throw SolverError(msg.str());
            }
            delta_steps = std::max<std::size_t>(1, delta_steps / 2);
            continue; // retry the same interval with a shorter delta
        }

        // accept: copy the interval's planes into the global field
        for (std::size_t j = j_start; j <= j_end; ++j)
            for (std::size_t i = 0; i < ns; ++i)
                for (std::size_t k = 0; k < ny; ++k) {
                    auto dst = res.u.line(i, j, k);
                    auto sl = cur.line(i, j, k);
                    std::copy(sl.begin(), sl.end(), dst.begin());
                }
        res.log.intervals.push_back(
            {grid.s_nodes[j_start], grid.s_nodes[j_end], "converged"});
        res.picard.iterate = std::move(cur);
        res.picard.delta = double(j_end - j_start) * grid.ds();

        // re-base: the s = s_{j_end} plane becomes the next interval's data
        j_start = j_end;
        for (std::size_t i = 0; i < ns; ++i)
            for (std::size_t k = 0; k < ny; ++k)
                for (std::size_t l = 0; l < ny; ++l)
                    gcur.at(i, k, l) = res.u.at(i, j_start, k, l);
    }
    res.log.reached_T = true;
    res.log.tau = grid.s_nodes[j1];
    return res;
}

Field4 quasilinear_solve(const CoefFn& a2, const NonlinFn& Q, const Field3& g,
                         const SpaceTimeGrid& grid, const StepperConfig& cfg,
                         const Field4* f) {
    const std::size_t ns = grid.ns(), ny = grid.ny();
    if (g.nt != ns || g.ny != ny)
        throw ConfigError("quasilinear_solve: data shape mismatch");
    const double theta = cfg.scheme == Scheme::BackwardEuler ? 1.0 : 0.5;
    const double dy = grid.dy(), dy2 = dy * dy;
    const bool wrap = grid.periodic();

    Field4 u(ns, ny);
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t k = 0; k < ny; ++k)
            for (std::size_t l = 0; l < ny; ++l)
                u.at(i, 0, k, l) = g.at(i, k, l);

    std::vector<double> bp(ny), av_n(ny), av_o(ny);
    std::vector<double> ta(ny), tb(ny), tc(ny), td(ny);
    // Q values per (i,k) at the old level
    Field3 q_old(ns, ny);

    auto q_at = [&](const Field4& fld, std::size_t i, std::size_t j, std::size_t k,
                    const PlaneTraces& tr, Field3& out) {
        const double t = grid.s_nodes[i], s = grid.s_nodes[j], x = grid.y_nodes[k];
        auto line = fld.line(i, j, k);
        line_dy(line, dy, wrap, bp);
        for (std::size_t l = 0; l < ny; ++l) {
            ZState z{line[l], bp[l], 0.0, tr.d[0][l], tr.d[1][l], 0.0};
            out.at(i, k, l) = Q(t, s, x, grid.y_nodes[l], z);
        }
    };

    for (std::size_t j = 0; j + 1 < ns; ++j) {
        const double so = grid.s_nodes[j], sn = grid.s_nodes[j + 1];
        const double ds = sn - so;
        PlaneTraces tr_old = plane_traces(u, grid, j);
        for (std::size_t i = 0; i < ns; ++i)
            for (std::size_t k = 0; k < ny; ++k) q_at(u, i, j, k, tr_old, q_old);

        // initial new-level guess: copy the old plane
        for (std::size_t i = 0; i < ns; ++i)
            for (std::size_t k = 0; k < ny; ++k) {
                auto src = u.line(i, j, k);
                auto dst = u.line(i, j + 1, k);
                std::copy(src.begin(), src.end(), dst.begin());
            }

        Field3 q_new(ns, ny);
        bool done = false;
        for (std::size_t sweep = 0; sweep < cfg.inner_picard_max && !done; ++sweep) {
            PlaneTraces tr_new = plane_traces(u, grid, j + 1);
            for (std::size_t i = 0; i < ns; ++i)
                for (std::size_t k = 0; k < ny; ++k) q_at(u, i, j + 1, k, tr_new, q_new);

            double change = 0.0;
            for (std::size_t i = 0; i < ns; ++i) {
                const double t = grid.s_nodes[i];
                for (std::size_t k = 0; k < ny; ++k) {
                    const double x = grid.y_nodes[k];
                    auto vold = u.line(i, j, k);
                    auto vnew = u.line(i, j + 1, k);
                    for (std::size_t l = 0; l < ny; ++l) {
                        const double y = grid.y_nodes[l];
                        av_n[l] = a2 ? a2(t, sn, x, y) : 0.0;
                        av_o[l] = a2 ? a2(t, so, x, y) : 0.0;
                    }
                    for (std::size_t l = 0; l < ny; ++l) {
                        const std::size_t lm = (l == 0) ? (wrap ? ny - 1 : 0) : l - 1;
                        const std::size_t lp = (l + 1 == ny) ? (wrap ? 0 : l) : l + 1;
                        double diff_old = 0.0;
                        if (lm != l || lp != l)
                            diff_old = av_o[l] *
                                       (vold[lm] - 2.0 * vold[l] + vold[lp]) / dy2;
                        double rhs = vold[l] +
                                     ds * ((1.0 - theta) *
                                               (diff_old + q_old.at(i, k, l)) +
                                           theta * q_new.at(i, k, l));
                        if (f) rhs += ds * ((1.0 - theta) * f->at(i, j, k, l) +
                                            theta * f->at(i, j + 1, k, l));
                        ta[l] = -theta * ds * av_n[l] / dy2;
                        tb[l] = 1.0 + 2.0 * theta * ds * av_n[l] / dy2;
                        tc[l] = -theta * ds * av_n[l] / dy2;
                        td[l] = rhs;
                    }
                    bool coupled = false;
                    for (std::size_t l = 0; l < ny; ++l)
                        if (ta[l] != 0.0 || tc[l] != 0.0) coupled = true;
                    if (!coupled) {
                        for (std::size_t l = 0; l < ny; ++l) {
                            change = std::max(change, std::fabs(td[l] - vnew[l]));
                            vnew[l] = td[l];
                        }
                        continue;
                    }
                    switch (grid.closure) {
                        case Closure::Periodic:
                            solve_cyclic_tridiag(ta, tb, tc, td);
                            break;
                        case Closure::DirichletFromData:
                            ta[0] = 0;
                            tb[0] = 1;
                            tc[0] = 0;
                            td[0] = g.at(i, k, 0);
                            ta[ny - 1] = 0;
                            tb[ny - 1] = 1;
                            tc[ny - 1] = 0;
                            td[ny - 1] = g.at(i, k, ny - 1);
                            solve_tridiag(ta, tb, tc, td);
                            break;
                        case Closure::Extrapolate: {
                            const std::size_t n = ny - 1;
                            tb[1] += 2.0 * ta[1];
                            tc[1] -= ta[1];
                            ta[1] = 0;
                            tb[n - 1] += 2.0 * tc[n - 1];
                            ta[n - 1] -= tc[n - 1];
                            tc[n - 1] = 0;
                            std::span<double> sa(ta.data() + 1, ny - 2),
                                sb(tb.data() + 1, ny - 2), sc(tc.data() + 1, ny - 2),
                                sd(td.data() + 1, ny - 2);
                            solve_tridiag(sa, sb, sc, sd);
                            td[0] = 2.0 * td[1] - td[2];
                            td[n] = 2.0 * td[n - 1] - td[n - 2];
                            break;
                        }
                        case Closure::ExtrapolateQuadratic: {
                            const std::size_t n = ny - 1;
                            if (ny < 5)
                                throw ConfigError(
                                    "extrapolate-quadratic closure needs ny >= 5");
                            double e = ta[1];
                            tb[1] += 3.0 * e;
                            tc[1] -= 3.0 * e;
                            ta[1] = 0;
                            if (e != 0.0) {
                                const double m = e / tc[2];
                                tb[1] -= m * ta[2];
                                tc[1] -= m * tb[2];
                                td[1] -= m * td[2];
                            }
                            e = tc[n - 1];
                            tb[n - 1] += 3.0 * e;
                            ta[n - 1] -= 3.0 * e;
                            tc[n - 1] = 0;
                            if (e != 0.0) {
                                const double m = e / ta[n - 2];
                                ta[n - 1] -= m * tb[n - 2];
                                tb[n - 1] -= m * tc[n - 2];
                                td[n - 1] -= m * td[n - 2];
                            }
                            std::span<double> sa(ta.data() + 1, ny - 2),
                                sb(tb.data() + 1, ny - 2), sc(tc.data() + 1, ny - 2),
                                sd(td.data() + 1, ny - 2);
                            solve_tridiag(sa, sb, sc, sd);
                            td[0] = 3.0 * td[1] - 3.0 * td[2] + td[3];
                            td[n] = 3.0 * td[n - 1] - 3.0 * td[n - 2] + td[n - 3];
                            break;
                        }
                    }
                    for (std::size_t l = 0; l < ny; ++l) {
                        change = std::max(change, std::fabs(td[l] - vnew[l]));
                        vnew[l] = td[l];
                    }
                }
            }
            if (change <= cfg.inner_picard_tol) done = true;
            if (sweep + 1 == cfg.inner_picard_max && !done)
                throw SolverError("quasilinear_solve: step fixed point stalled");
        }
        for (std::size_t i = 0; i < ns; ++i)
            for (std::size_t k = 0; k < ny; ++k)
                for (double v : u.line(i, j + 1, k))
                    if (!std::isfinite(v))
                        throw SolverError("quasilinear_solve: non-finite value");
    }
    return u;
}

double pde_residual(const Field4& u, const Nonlinearity& F, const SpaceTimeGrid& g) {
    Field4 us = derivative(u, g, Deriv::S);
    const std::size_t ns = g.ns(), ny = g.ny();
    std::vector<double> bp(ny), bq(ny);
    double worst = 0.0;
    for (std::size_t j = 0; j < ns; ++j) {
        PlaneTraces tr = plane_traces(u, g, j);
        for (std::size_t i = 0; i < ns; ++i)
            for (std::size_t k = 0; k < ny; ++k) {
                auto line = u.line(i, j, k);
                line_dy(line, g.dy(), g.periodic(), bp);
                line_dyy(line, g.dy(), g.periodic(), bq);
                for (std::size_t l = 0; l < ny; ++l) {
                    ZState z{line[l], bp[l], bq[l], tr.d[0][l], tr.d[1][l],
                             tr.d[2][l]};
                    const double rhs = F.eval(g.s_nodes[i], g.s_nodes[j],
                                              g.y_nodes[k], g.y_nodes[l], z);
                    worst = std::max(worst, std::fabs(us.at(i, j, k, l) - rhs));
                }
            }
    }
    return worst;
}

} // namespace tic
