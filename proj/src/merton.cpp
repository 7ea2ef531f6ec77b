#include "tic/merton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tic/errors.hpp"

namespace tic {

namespace {

std::vector<double> uniform_nodes(double T, std::size_t n) {
    std::vector<double> s(n);
    const double ds = T / double(n - 1);
    for (std::size_t j = 0; j < n; ++j) s[j] = double(j) * ds;
    s.back() = T;
    return s;
}

// cum[j] = int_{s_0}^{s_j} f, composite trapezoid
std::vector<double> cum_trapz(const std::vector<double>& s, const std::vector<double>& f) {
    std::vector<double> c(s.size(), 0.0);
    for (std::size_t j = 1; j < s.size(); ++j)
        c[j] = c[j - 1] + 0.5 * (s[j] - s[j - 1]) * (f[j] + f[j - 1]);
    return c;
}

// suf[j] = int_{s_j}^{T} f
std::vector<double> suffix_trapz(const std::vector<double>& s, const std::vector<double>& f) {
    std::vector<double> c(s.size(), 0.0);
    for (std::size_t j = s.size() - 1; j-- > 0;)
        c[j] = c[j + 1] + 0.5 * (s[j + 1] - s[j]) * (f[j] + f[j + 1]);
    return c;
}

} // namespace

MertonParams MertonParams::defaults() {
    MertonParams p;
    p.v = [](double t, double s) { return std::exp(-0.1 * (s - t)); };
    p.w = [](double, double) { return 0.1; };
    p.z = [](double, double) { return 0.05; };
    p.g1 = [](double) { return 1.0; };
    p.g2 = [](double) { return 1.0; };
    return p;
}

void MertonParams::validate(std::size_t n_check) const {
    if (sigma <= 0.0) throw ConfigError("merton: sigma must be positive");
    if (T <= 0.0) throw ConfigError("merton: horizon must be positive");
    if (beta <= 0.0 || beta >= 1.0 || gamma <= 0.0 || gamma >= 1.0)
        throw ConfigError("merton: utility exponents must lie in (0,1)");
    if (!v || !w || !z || !g1 || !g2)
        throw ConfigError("merton: v, w, z, g1, g2 must all be set");
    const auto s = uniform_nodes(T, n_check);
    for (std::size_t i = 0; i < n_check; ++i) {
        if (g1(s[i]) <= 0.0 || g2(s[i]) <= 0.0)
            throw ConfigError("merton: terminal weights must be positive");
        for (std::size_t j = i; j < n_check; ++j) {
            if (v(s[i], s[j]) <= 0.0)
                throw ConfigError("merton: consumption weight v must be positive");
            if (w(s[i], s[j]) < 0.0)
                throw ConfigError("merton: discount w must be nonnegative");
            if (z(s[i], s[j]) < 0.0)
                throw ConfigError("merton: salary weight z must be nonnegative");
        }
    }
}

double TsTable::interp_s(std::size_t i, double s) const {
    const auto& sn = s_nodes;
    if (s <= sn.front()) return at(i, 0);
    if (s >= sn.back()) return at(i, sn.size() - 1);
    const double ds = sn[1] - sn[0];
    auto j = std::min(std::size_t((s - sn.front()) / ds), sn.size() - 2);
    const double w1 = (s - sn[j]) / (sn[j + 1] - sn[j]);
    return (1.0 - w1) * at(i, j) + w1 * at(i, j + 1);
}

TsTable solve_phi2(const MertonParams& p, std::size_t n) {
    if (n < 2) throw ConfigError("solve_phi2: need at least 2 nodes");
    TsTable tab;
    tab.s_nodes = uniform_nodes(p.T, n);
    tab.values.assign(n * n, 0.0);
    const auto& s = tab.s_nodes;
    std::vector<double> wrow(n), E(n), zE(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = s[i];
        for (std::size_t m = 0; m < n; ++m) wrow[m] = p.w(t, s[m]);
        const auto cw = cum_trapz(s, wrow);
        for (std::size_t m = 0; m < n; ++m) {
            E[m] = std::exp(-cw[m]);
            zE[m] = E[m] * p.z(t, s[m]);
        }
        const auto S = suffix_trapz(s, zE);
        const double gt = p.g2(t);
        for (std::size_t j = 0; j < n; ++j)
            tab.at(i, j) = (E[n - 1] * gt + S[j]) / E[j];
    }
    return tab;
}

namespace {

// RHS of the diagonal integral equation evaluated at every node of s.
std::vector<double> integral_rhs(const MertonParams& p, const std::vector<double>& s,
                                 const std::vector<double>& phibar) {
    const std::size_t n = s.size();
    const double e_pow = 1.0 / (p.beta - 1.0);  // < 0
    const double u_pow = p.beta / (p.beta - 1.0); // < 0
    std::vector<double> rhs(n), m(n), vphi(n), E(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double t = s[j];
        const double gbar = p.g1(t) / p.v(t, t);
        for (std::size_t l = 0; l < n; ++l)
            m[l] = p.k(t, s[l]) - p.beta * std::pow(phibar[l], e_pow);
        const auto M = cum_trapz(s, m);
        for (std::size_t l = 0; l < n; ++l) {
            E[l] = std::exp(M[l] - M[j]);
            vphi[l] = E[l] * (p.v(t, s[l]) / p.v(t, t)) * std::pow(phibar[l], u_pow);
        }
        double acc = 0.0;
        for (std::size_t l = n - 1; l-- > j;)
            acc += 0.5 * (s[l + 1] - s[l]) * (vphi[l] + vphi[l + 1]);
        rhs[j] = E[n - 1] * gbar + acc;
    }
    return rhs;
}

} // namespace

PhibarResult solve_integral_equation(const MertonParams& p, std::size_t n_quad,
                                     double damping, double tol, std::size_t max_iter) {
    p.validate();
    if (n_quad < 3) throw ConfigError("solve_integral_equation: need at least 3 nodes");
    if (damping <= 0.0 || damping > 1.0)
        throw ConfigError("solve_integral_equation: damping must lie in (0,1]");
    constexpr double floor = 1e-12;
    PhibarResult res;
    res.s_nodes = uniform_nodes(p.T, n_quad);
    res.phibar.resize(n_quad);
    for (std::size_t j = 0; j < n_quad; ++j) {
        const double t = res.s_nodes[j];
        res.phibar[j] = std::max(p.g1(t) / p.v(t, t), floor);
    }
    for (std::size_t it = 0; it < max_iter; ++it) {
        const auto rhs = integral_rhs(p, res.s_nodes, res.phibar);
        double resid = 0.0;
        for (std::size_t j = 0; j < n_quad; ++j) {
            resid = std::max(resid, std::abs(rhs[j] - res.phibar[j]));
            double next = (1.0 - damping) * res.phibar[j] + damping * rhs[j];
            if (next < floor) {
                next = floor;
                ++res.floor_hits;
            }
            res.phibar[j] = next;
        }
        res.residuals.push_back(resid);
        res.iterations = it + 1;
        if (resid <= tol) return res;
    }
    std::ostringstream oss;
    oss << "solve_integral_equation: no convergence after " << max_iter
        << " iterations; residuals:";
    for (std::size_t i = res.residuals.size() > 8 ? res.residuals.size() - 8 : 0;
         i < res.residuals.size(); ++i)
        oss << ' ' << res.residuals[i];
    throw SolverError(oss.str());
}

double fixed_point_residual(const MertonParams& p, const PhibarResult& pb,
                            std::size_t refine) {
    const std::size_t n = pb.s_nodes.size();
    const std::size_t nf = (n - 1) * refine + 1;
    const auto sf = uniform_nodes(p.T, nf);
    std::vector<double> phif(nf);
    for (std::size_t m = 0; m < nf; ++m) {
        const double pos = double(m) / double(refine);
        const auto j = std::min(std::size_t(pos), n - 2);
        const double w1 = pos - double(j);
        phif[m] = (1.0 - w1) * pb.phibar[j] + w1 * pb.phibar[j + 1];
    }
    const auto rhs = integral_rhs(p, sf, phif);
    double resid = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        resid = std::max(resid, std::abs(rhs[j * refine] - pb.phibar[j]));
    return resid;
}

TsTable solve_phi1(const MertonParams& p, const PhibarResult& pb) {
    const std::size_t n = pb.s_nodes.size();
    TsTable tab;
    tab.s_nodes = pb.s_nodes;
    tab.values.assign(n * n, 0.0);
    const auto& s = tab.s_nodes;
    const double e_pow = 1.0 / (p.beta - 1.0);
    const double u_pow = p.beta / (p.beta - 1.0);
    std::vector<double> m(n), E(n), vphi(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = s[i];
        for (std::size_t l = 0; l < n; ++l)
            m[l] = p.k(t, s[l]) - p.beta * std::pow(pb.phibar[l], e_pow);
        const auto M = cum_trapz(s, m);
        for (std::size_t l = 0; l < n; ++l) {
            E[l] = std::exp(M[l]);
            vphi[l] = E[l] * p.v(t, s[l]) * std::pow(pb.phibar[l], u_pow);
        }
        const auto S = suffix_trapz(s, vphi);
        const double gt = p.g1(t);
        for (std::size_t j = 0; j < n; ++j)
            tab.at(i, j) = (E[n - 1] * gt + S[j]) / E[j];
    }
    return tab;
}

MertonBounds compute_bounds(const MertonParams& p, const PhibarResult& pb) {
    const auto& s = pb.s_nodes;
    const std::size_t n = s.size();
    MertonBounds b;
    std::vector<double> krow(n);
    // ghat(s) = gbar(s) * exp{int_s^T k(s,.)}
    b.g0 = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        const double t = s[j];
        for (std::size_t l = 0; l < n; ++l) krow[l] = p.k(t, s[l]);
        const auto K = cum_trapz(s, krow);
        const double ghat = p.g1(t) / p.v(t, t) * std::exp(K[n - 1] - K[j]);
        b.g0 = std::min(b.g0, ghat);
    }
    // rho: smallest decay rate with vhat(t,s) >= e^{-rho (s-t)}
    b.rho = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = s[i];
        for (std::size_t l = 0; l < n; ++l) krow[l] = p.k(t, s[l]);
        const auto K = cum_trapz(s, krow);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double vhat = p.v(t, s[j]) / p.v(t, t) * std::exp(K[j] - K[i]);
            b.rho = std::max(b.rho, -std::log(vhat) / (s[j] - s[i]));
        }
    }
    b.delta = std::exp(-b.rho * p.T) * b.g0;
    const double u_pow = p.beta / (p.beta - 1.0); // < 0, so phibar >= delta caps it
    const double cap = std::pow(b.delta, u_pow);
    b.lower.resize(n);
    b.upper.resize(n);
    b.K = 0.0;
    std::vector<double> E(n), vc(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double t = s[j];
        b.lower[j] = std::exp(-b.rho * (p.T - s[j])) * b.g0;
        for (std::size_t l = 0; l < n; ++l) krow[l] = p.k(t, s[l]);
        const auto K = cum_trapz(s, krow);
        for (std::size_t l = 0; l < n; ++l) {
            E[l] = std::exp(K[l] - K[j]);
            vc[l] = E[l] * (p.v(t, s[l]) / p.v(t, t)) * cap;
        }
        double acc = 0.0;
        for (std::size_t l = n - 1; l-- > j;)
            acc += 0.5 * (s[l + 1] - s[l]) * (vc[l] + vc[l + 1]);
        b.upper[j] = E[n - 1] * p.g1(t) / p.v(t, t) + acc;
        b.K = std::max(b.K, b.upper[j]);
    }
    return b;
}

MertonClosedForm equilibrium_closed_form(const MertonParams& p, const TsTable& phi1,
                                         const TsTable& phi2, const SpaceTimeGrid& grid) {
    if (grid.y_min() <= 0.0)
        throw ConfigError("equilibrium_closed_form: wealth grid must have y_min > 0");
    const std::size_t n = phi1.s_nodes.size();
    std::vector<double> d1(n), d2(n);
    for (std::size_t j = 0; j < n; ++j) {
        d1[j] = phi1.at(j, j);
        d2[j] = phi2.at(j, j);
    }
    auto interp = [&](const std::vector<double>& d, double s) {
        if (s <= phi1.s_nodes.front()) return d.front();
        if (s >= phi1.s_nodes.back()) return d.back();
        const double ds = phi1.s_nodes[1] - phi1.s_nodes[0];
        const auto j = std::min(std::size_t((s - phi1.s_nodes.front()) / ds), n - 2);
        const double w1 = (s - phi1.s_nodes[j]) / ds;
        return (1.0 - w1) * d[j] + w1 * d[j + 1];
    };
    const double a_slope = -(p.mu - p.r) / (p.sigma * p.sigma * (p.beta - 1.0));
    const double e_pow = 1.0 / (p.beta - 1.0);
    MertonClosedForm cf{Field2(grid.ns(), grid.ny()), Field2(grid.ns(), grid.ny()),
                        Field2(grid.ns(), grid.ny())};
    for (std::size_t j = 0; j < grid.ns(); ++j) {
        const double s = grid.s_nodes[j];
        const double p1 = interp(d1, s), p2 = interp(d2, s);
        const double cbar = std::pow(p1 / p.v(s, s), e_pow);
        for (std::size_t l = 0; l < grid.ny(); ++l) {
            const double y = grid.y_nodes[l];
            cf.V.at(j, l) = p1 * std::pow(y, p.beta) + p2 * std::pow(y, p.gamma);
            cf.a_policy.at(j, l) = a_slope * y;
            cf.c_policy.at(j, l) = cbar * y;
        }
    }
    return cf;
}

std::vector<double> time_consistent_ode_oracle(const MertonParams& p,
                                               const std::vector<double>& s_nodes,
                                               std::size_t substeps) {
    const double e_pow = 1.0 / (p.beta - 1.0);
    const double u_pow = p.beta / (p.beta - 1.0);
    auto f = [&](double s, double phi) {
        const double vv = p.v(s, s);
        const double ratio = std::max(phi / vv, 1e-300);
        return -(p.k(s, s) - p.beta * std::pow(ratio, e_pow)) * phi -
               vv * std::pow(ratio, u_pow);
    };
    const std::size_t n = s_nodes.size();
    std::vector<double> phi(n);
    phi[n - 1] = p.g1(s_nodes[n - 1]);
    for (std::size_t j = n - 1; j-- > 0;) {
        double cur = phi[j + 1];
        const double h = (s_nodes[j] - s_nodes[j + 1]) / double(substeps); // negative
        double s = s_nodes[j + 1];
        for (std::size_t m = 0; m < substeps; ++m) {
            const double k1 = f(s, cur);
            const double k2 = f(s + 0.5 * h, cur + 0.5 * h * k1);
            const double k3 = f(s + 0.5 * h, cur + 0.5 * h * k2);
            const double k4 = f(s + h, cur + h * k3);
            cur += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            s += h;
        }
        phi[j] = cur;
    }
    return phi;
}

} // namespace tic
