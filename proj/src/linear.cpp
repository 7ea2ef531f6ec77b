#include "tic/linear.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "tic/holder.hpp"
#include "tic/tridiag.hpp"

namespace tic {

namespace {

// Index subsample for coefficient scans: at most `cap` points per axis,
// endpoints always included.
std::vector<std::size_t> scan_indices(std::size_t n, std::size_t cap) {
    std::vector<std::size_t> idx;
    if (n <= cap) {
        for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
        return idx;
    }
    for (std::size_t i = 0; i < cap; ++i)
        idx.push_back(i * (n - 1) / (cap - 1));
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return idx;
}

struct TraceSet {
    // d[I][l] = d_I u(s,s,x,y)|_{x=y=y_l}
    std::array<std::vector<double>, 3> d;
    explicit TraceSet(std::size_t ny) {
        for (auto& v : d) v.assign(ny, 0.0);
    }
    double sup_diff(const TraceSet& o) const {
        double m = 0.0;
        for (int I = 0; I < 3; ++I)
            for (std::size_t l = 0; l < d[I].size(); ++l)
                m = std::max(m, std::fabs(d[I][l] - o.d[I][l]));
        return m;
    }
};

// Traces of the s = s_j plane restricted to t = s_j.
TraceSet extract_traces(const Field4& u, const SpaceTimeGrid& g, std::size_t j) {
    const std::size_t ny = g.ny();
    TraceSet tr(ny);
    std::vector<double> buf(ny);
    for (std::size_t k = 0; k < ny; ++k) {
        auto line = u.line(j, j, k);
        tr.d[0][k] = line[k];
        line_dy(line, g.dy(), g.periodic(), buf);
        tr.d[1][k] = buf[k];
        line_dyy(line, g.dy(), g.periodic(), buf);
        tr.d[2][k] = buf[k];
    }
    return tr;
}

// Scratch for one slice advance.
struct SliceScratch {
    std::vector<double> a, b, c, d, lo_n, di_n, up_n, lo_o, di_o, up_o;
    void resize(std::size_t n) {
        for (auto* v : {&a, &b, &c, &d, &lo_n, &di_n, &up_n, &lo_o, &di_o, &up_o})
            v->assign(n, 0.0);
    }
};

class Stepper {
  public:
    Stepper(const LinearProblem& p, const StepperConfig& cfg)
        : p_(p), g_(p.grid), cfg_(cfg), ny_(g_.ny()), ns_(g_.ns()),
          theta_(cfg.scheme == Scheme::BackwardEuler ? 1.0 : 0.5),
          nonlocal_(p.coeffs.has_nonlocal(g_)) {
        if (p_.g.nt != ns_ || p_.g.ny != ny_)
            throw ConfigError("solve_linear: initial data shape mismatch");
        if (!p_.f.values.empty() && (p_.f.ns != ns_ || p_.f.ny != ny_))
            throw ConfigError("solve_linear: source shape mismatch");
        if (!(cfg.inner_picard_tol > 0.0) || cfg.inner_picard_max < 1)
            throw ConfigError("solve_linear: bad stepper config");
        ws_.resize(ny_);
    }

    Field4 run() {
        p_.coeffs.check_ellipticity(g_);
        const std::size_t jb = cfg_.j_begin;
        const std::size_t je = std::min<std::size_t>(cfg_.j_end, ns_ - 1);
        if (jb >= ns_ || jb > je) throw ConfigError("solve_linear: bad march range");
        Field4 u(ns_, ny_);
        for (std::size_t i = 0; i < ns_; ++i)
            for (std::size_t k = 0; k < ny_; ++k)
                for (std::size_t l = 0; l < ny_; ++l)
                    u.at(i, jb, k, l) = p_.g.at(i, k, l);

        TraceSet d_old = nonlocal_ ? extract_traces(u, g_, jb) : TraceSet(ny_);
        for (std::size_t j = jb; j < je; ++j) {
            TraceSet d_new = d_old;
            if (nonlocal_) d_new = resolve_trace(u, j, d_old);
            for (std::size_t i = 0; i < ns_; ++i) {
                if (nonlocal_ && i == j + 1) continue; // leading slice already advanced
                for (std::size_t k = 0; k < ny_; ++k)
                    advance_slice(u, i, j, k, d_old, d_new);
            }
            check_plane(u, j + 1);
            d_old = std::move(d_new);
        }
        return u;
    }

  private:
    // Inner fixed point on the diagonal trace at the leading slice t = s_{j+1}.
    TraceSet resolve_trace(Field4& u, std::size_t j, const TraceSet& d_old) {
        TraceSet d_new = d_old;
        std::vector<double> log;
        for (std::size_t it = 0; it < cfg_.inner_picard_max; ++it) {
            for (std::size_t k = 0; k < ny_; ++k)
                advance_slice(u, j + 1, j, k, d_old, d_new);
            TraceSet cand = extract_traces(u, g_, j + 1);
            const double change = cand.sup_diff(d_new);
            d_new = std::move(cand);
            log.push_back(change);
            if (change <= cfg_.inner_picard_tol || cfg_.lag_diagonal) return d_new;
        }
        std::ostringstream msg;
        msg << "solve_linear: diagonal fixed point failed to converge at s="
            << g_.s_nodes[j + 1] << "; residuals:";
        for (double r : log) msg << ' ' << r;
        throw SolverError(msg.str());
    }

    double src(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
        return p_.f.values.empty() ? 0.0 : p_.f.at(i, j, k, l);
    }

    // One implicit tridiagonal solve in y for the (t_i, x_k) slice, s_j -> s_{j+1}.
    void advance_slice(Field4& u, std::size_t i, std::size_t j, std::size_t k,
                       const TraceSet& d_old, const TraceSet& d_new) {
        const double t = g_.s_nodes[i], x = g_.y_nodes[k];
        const double so = g_.s_nodes[j], sn = g_.s_nodes[j + 1];
        const double ds = sn - so, dy = g_.dy(), dy2 = dy * dy;
        const auto& C = p_.coeffs;
        auto& w = ws_;

        bool coupled = false;
        for (std::size_t l = 0; l < ny_; ++l) {
            const double y = g_.y_nodes[l];
            const double a2n = C.eval_A(2, t, sn, x, y), a1n = C.eval_A(1, t, sn, x, y);
            const double a0n = C.eval_A(0, t, sn, x, y);
            const double a2o = C.eval_A(2, t, so, x, y), a1o = C.eval_A(1, t, so, x, y);
            const double a0o = C.eval_A(0, t, so, x, y);
            w.lo_n[l] = a2n / dy2 - a1n / (2 * dy);
            w.di_n[l] = -2 * a2n / dy2 + a0n;
            w.up_n[l] = a2n / dy2 + a1n / (2 * dy);
            w.lo_o[l] = a2o / dy2 - a1o / (2 * dy);
            w.di_o[l] = -2 * a2o / dy2 + a0o;
            w.up_o[l] = a2o / dy2 + a1o / (2 * dy);
            if (w.lo_n[l] != 0.0 || w.up_n[l] != 0.0 || w.lo_o[l] != 0.0 ||
                w.up_o[l] != 0.0)
                coupled = true;
        }

        auto vold = u.line(i, j, k);
        auto r_of = [&](std::size_t l, double s, const TraceSet& tr) {
            const double y = g_.y_nodes[l];
            double r = 0.0;
            for (int I = 0; I < 3; ++I)
                if (C.B[I]) r -= C.B[I](t, s, x, y) * tr.d[I][l];
            return r;
        };

        const bool wrap = g_.periodic();
        for (std::size_t l = 0; l < ny_; ++l) {
            const std::size_t lm = (l == 0) ? (wrap ? ny_ - 1 : 0) : l - 1;
            const std::size_t lp = (l + 1 == ny_) ? (wrap ? 0 : l) : l + 1;
            double e_old = w.di_o[l] * vold[l];
            if (lm != l) e_old += w.lo_o[l] * vold[lm];
            if (lp != l) e_old += w.up_o[l] * vold[lp];
            const double r_old = r_of(l, so, d_old) + src(i, j, k, l);
            const double r_new = r_of(l, sn, d_new) + src(i, j + 1, k, l);
            w.a[l] = -theta_ * ds * w.lo_n[l];
            w.b[l] = 1.0 - theta_ * ds * w.di_n[l];
            w.c[l] = -theta_ * ds * w.up_n[l];
            w.d[l] = vold[l] + ds * ((1.0 - theta_) * (e_old + r_old) + theta_ * r_new);
        }

        auto vnew = u.line(i, j + 1, k);
        if (!coupled) {
            // no y-coupling on this slice: a pointwise reaction equation, no
            // boundary closure applies
            for (std::size_t l = 0; l < ny_; ++l) vnew[l] = w.d[l] / w.b[l];
            return;
        }

        switch (g_.closure) {
            case Closure::Periodic:
                solve_cyclic_tridiag(w.a, w.b, w.c, w.d);
                break;
            case Closure::DirichletFromData: {
                w.a[0] = 0;
                w.b[0] = 1;
                w.c[0] = 0;
                w.d[0] = p_.g.at(i, k, 0);
                w.a[ny_ - 1] = 0;
                w.b[ny_ - 1] = 1;
                w.c[ny_ - 1] = 0;
                w.d[ny_ - 1] = p_.g.at(i, k, ny_ - 1);
                solve_tridiag(w.a, w.b, w.c, w.d);
                break;
            }
            case Closure::Extrapolate: {
                // zero second difference at the boundary rows: v0 = 2v1 - v2
                // and v_{n} = 2v_{n-1} - v_{n-2}; substitute into the adjacent
                // interior rows and solve the reduced interior system
                const std::size_t n = ny_ - 1;
                w.b[1] += 2.0 * w.a[1];
                w.c[1] -= w.a[1];
                w.a[1] = 0;
                w.b[n - 1] += 2.0 * w.c[n - 1];
                w.a[n - 1] -= w.c[n - 1];
                w.c[n - 1] = 0;
                std::span<double> a(w.a.data() + 1, ny_ - 2),
                    b(w.b.data() + 1, ny_ - 2), c(w.c.data() + 1, ny_ - 2),
                    d(w.d.data() + 1, ny_ - 2);
                solve_tridiag(a, b, c, d);
                w.d[0] = 2.0 * w.d[1] - w.d[2];
                w.d[n] = 2.0 * w.d[n - 1] - w.d[n - 2];
                break;
            }
            case Closure::ExtrapolateQuadratic: {
                // zero third difference at the boundary rows: v0 = 3v1 - 3v2
                // + v3 and v_n = 3v_{n-1} - 3v_{n-2} + v_{n-3}; substituting
                // leaves one out-of-band entry per end, removed by a single
                // elimination against the neighboring interior row
                const std::size_t n = ny_ - 1;
                if (ny_ < 5)
                    throw ConfigError("extrapolate-quadratic closure needs ny >= 5");
                double e = w.a[1]; // coefficient picked up on v3
                w.b[1] += 3.0 * e;
                w.c[1] -= 3.0 * e;
                w.a[1] = 0;
                if (e != 0.0) {
                    if (w.c[2] == 0.0)
                        throw SolverError("quadratic closure: zero elimination pivot");
                    const double m = e / w.c[2];
                    w.b[1] -= m * w.a[2];
                    w.c[1] -= m * w.b[2];
                    w.d[1] -= m * w.d[2];
                }
                e = w.c[n - 1]; // coefficient picked up on v_{n-3}
                w.b[n - 1] += 3.0 * e;
                w.a[n - 1] -= 3.0 * e;
                w.c[n - 1] = 0;
                if (e != 0.0) {
                    if (w.a[n - 2] == 0.0)
                        throw SolverError("quadratic closure: zero elimination pivot");
                    const double m = e / w.a[n - 2];
                    w.a[n - 1] -= m * w.b[n - 2];
                    w.b[n - 1] -= m * w.c[n - 2];
                    w.d[n - 1] -= m * w.d[n - 2];
                }
                std::span<double> a(w.a.data() + 1, ny_ - 2),
                    b(w.b.data() + 1, ny_ - 2), c(w.c.data() + 1, ny_ - 2),
                    d(w.d.data() + 1, ny_ - 2);
                solve_tridiag(a, b, c, d);
                w.d[0] = 3.0 * w.d[1] - 3.0 * w.d[2] + w.d[3];
                w.d[n] = 3.0 * w.d[n - 1] - 3.0 * w.d[n - 2] + w.d[n - 3];
                break;
            }
        }
        for (std::size_t l = 0; l < ny_; ++l) vnew[l] = w.d[l];
    }

    void check_plane(const Field4& u, std::size_t j) const {
        for (std::size_t i = 0; i < ns_; ++i)
            for (std::size_t k = 0; k < ny_; ++k)
                for (double v : u.line(i, j, k))
                    if (!std::isfinite(v)) {
                        std::ostringstream msg;
                        msg << "solve_linear: non-finite value at s=" << g_.s_nodes[j];
                        throw SolverError(msg.str());
                    }
    }

    const LinearProblem& p_;
    const SpaceTimeGrid& g_;
    StepperConfig cfg_;
    std::size_t ny_, ns_;
    double theta_;
    bool nonlocal_;
    SliceScratch ws_;
};

} // namespace

bool CoefficientSet::has_nonlocal(const SpaceTimeGrid& g) const {
    bool any = false;
    for (const auto& f : B) any = any || bool(f);
    if (!any) return false;
    auto si = scan_indices(g.ns(), 9), yi = scan_indices(g.ny(), 9);
    for (const auto& f : B) {
        if (!f) continue;
        for (auto i : si)
            for (auto j : si)
                for (auto k : yi)
                    for (auto l : yi)
                        if (f(g.s_nodes[i], g.s_nodes[j], g.y_nodes[k], g.y_nodes[l]) != 0.0)
                            return true;
    }
    return false;
}

void CoefficientSet::check_ellipticity(const SpaceTimeGrid& g) const {
    if (lambda_ell <= 0.0) return; // no claimed constant, nothing to verify
    auto si = scan_indices(g.ns(), 17), yi = scan_indices(g.ny(), 17);
    for (auto i : si)
        for (auto j : si)
            for (auto k : yi)
                for (auto l : yi) {
                    const double t = g.s_nodes[i], s = g.s_nodes[j];
                    const double x = g.y_nodes[k], y = g.y_nodes[l];
                    const double a2 = eval_A(2, t, s, x, y);
                    const double b2 = eval_B(2, t, s, x, y);
                    if (a2 < lambda_ell || a2 + b2 < lambda_ell) {
                        std::ostringstream msg;
                        msg << "ellipticity violated at (t,s,x,y)=(" << t << ',' << s
                            << ',' << x << ',' << y << "): A2=" << a2 << " B2=" << b2
                            << " lambda=" << lambda_ell;
                        throw ConfigError(msg.str());
                    }
                }
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "backward-euler") return Scheme::BackwardEuler;
    if (s == "crank-nicolson") return Scheme::CrankNicolson;
    throw ConfigError("unknown scheme: " + s);
}

Field4 apply_operator(const Field4& u, const CoefficientSet& coeffs,
                      const SpaceTimeGrid& g) {
    if (u.ns != g.ns() || u.ny != g.ny())
        throw ConfigError("apply_operator: shape mismatch");
    Field4 out = derivative(u, g, Deriv::S);
    Field4 uy = derivative(u, g, Deriv::Y);
    Field4 uyy = derivative(u, g, Deriv::YY);
    auto tr = diagonal_derivative_traces(u, g);
    const Field2* d[3] = {&tr.d0, &tr.d1, &tr.d2};
    for (std::size_t i = 0; i < u.ns; ++i)
        for (std::size_t j = 0; j < u.ns; ++j)
            for (std::size_t k = 0; k < u.ny; ++k)
                for (std::size_t l = 0; l < u.ny; ++l) {
                    const double t = g.s_nodes[i], s = g.s_nodes[j];
                    const double x = g.y_nodes[k], y = g.y_nodes[l];
                    const double loc[3] = {u.at(i, j, k, l), uy.at(i, j, k, l),
                                           uyy.at(i, j, k, l)};
                    double v = out.at(i, j, k, l);
                    for (int I = 0; I < 3; ++I) {
                        if (coeffs.A[I]) v -= coeffs.A[I](t, s, x, y) * loc[I];
                        if (coeffs.B[I]) v += coeffs.B[I](t, s, x, y) * d[I]->at(j, l);
                    }
                    out.at(i, j, k, l) = v;
                }
    return out;
}

Field4 solve_linear(const LinearProblem& p, const StepperConfig& cfg) {
    Stepper st(p, cfg);
    return st.run();
}

Field4 integral_rep(const Field4& ut, const Field4& ux, const SpaceTimeGrid& g,
                    int I, bool time_then_space) {
    if (I < 0 || I > 2) throw ConfigError("integral_rep: derivative order not in {0,1,2}");
    Field4 fT_store, fX_store;
    const Field4* pT = &ut;
    const Field4* pX = &ux;
    if (I != 0) {
        const Deriv which = (I == 1) ? Deriv::Y : Deriv::YY;
        fT_store = derivative(ut, g, which);
        fX_store = derivative(ux, g, which);
        pT = &fT_store;
        pX = &fX_store;
    }
    const std::size_t ns = g.ns(), ny = g.ny();
    const double ds = g.ds(), dy = g.dy();
    Field4 out(ns, ny);
    std::vector<double> cum(std::max(ns, ny));

    if (!time_then_space) {
        // path (s,s,y,y) -> (s,s,x,y) -> (t,s,x,y)
        for (std::size_t j = 0; j < ns; ++j)
            for (std::size_t l = 0; l < ny; ++l) {
                cum[0] = 0.0;
                for (std::size_t k = 1; k < ny; ++k)
                    cum[k] = cum[k - 1] +
                             0.5 * dy * (pX->at(j, j, k - 1, l) + pX->at(j, j, k, l));
                for (std::size_t i = 0; i < ns; ++i)
                    for (std::size_t k = 0; k < ny; ++k)
                        out.at(i, j, k, l) = cum[k] - cum[l];
            }
        for (std::size_t j = 0; j < ns; ++j)
            for (std::size_t k = 0; k < ny; ++k)
                for (std::size_t l = 0; l < ny; ++l) {
                    cum[0] = 0.0;
                    for (std::size_t i = 1; i < ns; ++i)
                        cum[i] = cum[i - 1] + 0.5 * ds * (pT->at(i - 1, j, k, l) +
                                                          pT->at(i, j, k, l));
                    for (std::size_t i = 0; i < ns; ++i)
                        out.at(i, j, k, l) += cum[i] - cum[j];
                }
    } else {
        // path (s,s,y,y) -> (t,s,y,y) -> (t,s,x,y)
        for (std::size_t j = 0; j < ns; ++j)
            for (std::size_t l = 0; l < ny; ++l) {
                cum[0] = 0.0;
                for (std::size_t i = 1; i < ns; ++i)
                    cum[i] = cum[i - 1] +
                             0.5 * ds * (pT->at(i - 1, j, l, l) + pT->at(i, j, l, l));
                for (std::size_t i = 0; i < ns; ++i)
                    for (std::size_t k = 0; k < ny; ++k)
                        out.at(i, j, k, l) = cum[i] - cum[j];
            }
        for (std::size_t i = 0; i < ns; ++i)
            for (std::size_t j = 0; j < ns; ++j)
                for (std::size_t l = 0; l < ny; ++l) {
                    cum[0] = 0.0;
                    for (std::size_t k = 1; k < ny; ++k)
                        cum[k] = cum[k - 1] + 0.5 * dy * (pX->at(i, j, k - 1, l) +
                                                          pX->at(i, j, k, l));
                    for (std::size_t k = 0; k < ny; ++k)
                        out.at(i, j, k, l) += cum[k] - cum[l];
                }
    }
    // d_I u(t,s,x,y) - d_I u(s,s,y,y) = -I^I, and the accumulators hold the
    // left-hand side
    for (double& v : out.values) v = -v;
    return out;
}

StabilityReport schauder_stability_probe(const LinearProblem& p,
                                         const StepperConfig& cfg,
                                         double perturbation_scale) {
    if (perturbation_scale == 0.0) return {0.0, true};
    Field4 base = solve_linear(p, cfg);
    LinearProblem q = p;
    for (std::size_t i = 0; i < q.g.nt; ++i)
        for (std::size_t k = 0; k < q.g.ny; ++k)
            for (std::size_t l = 0; l < q.g.ny; ++l)
                q.g.at(i, k, l) += perturbation_scale * std::sin(p.grid.y_nodes[l]);
    Field4 pert = solve_linear(q, cfg);

    Field4 diff(p.grid.ns(), p.grid.ny());
    for (std::size_t n = 0; n < diff.values.size(); ++n)
        diff.values[n] = pert.values[n] - base.values[n];
    Field4 dg(p.grid.ns(), p.grid.ny());
    for (std::size_t i = 0; i < dg.ns; ++i)
        for (std::size_t j = 0; j < dg.ns; ++j)
            for (std::size_t k = 0; k < dg.ny; ++k)
                for (std::size_t l = 0; l < dg.ny; ++l)
                    dg.at(i, j, k, l) =
                        perturbation_scale * std::sin(p.grid.y_nodes[l]);
    const double num = holder_norms(diff, p.grid, 0.5).total();
    const double den = holder_norms(dg, p.grid, 0.5).total();
    return {num / den, false};
}

} // namespace tic
