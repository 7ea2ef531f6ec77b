#include "tic/holder.hpp"

#include <algorithm>
#include <cmath>

namespace tic {

namespace {

struct SliceNorms {
    double sup = 0.0, semi_y = 0.0, semi_s = 0.0;
};

// phi given as ns x ny row-major values over (s,y).
SliceNorms slice_norms(const double* phi, std::size_t ns, std::size_t ny,
                       const SpaceTimeGrid& g, double alpha) {
    SliceNorms r;
    for (std::size_t j = 0; j < ns * ny; ++j) r.sup = std::max(r.sup, std::fabs(phi[j]));

    // <.>_y: same s, 0 < |y-y'| <= 1
    for (std::size_t j = 0; j < ns; ++j) {
        const double* row = phi + j * ny;
        for (std::size_t l = 0; l < ny; ++l)
            for (std::size_t m = l + 1; m < ny; ++m) {
                const double dy = g.y_nodes[m] - g.y_nodes[l];
                if (dy > 1.0) break;
                const double q = std::fabs(row[m] - row[l]) / std::pow(dy, alpha);
                r.semi_y = std::max(r.semi_y, q);
            }
    }
    // <.>_s: same y, s < s'
    const double ha = alpha / 2.0;
    for (std::size_t l = 0; l < ny; ++l)
        for (std::size_t j = 0; j < ns; ++j)
            for (std::size_t j2 = j + 1; j2 < ns; ++j2) {
                const double dsp = g.s_nodes[j2] - g.s_nodes[j];
                const double q =
                    std::fabs(phi[j2 * ny + l] - phi[j * ny + l]) / std::pow(dsp, ha);
                r.semi_s = std::max(r.semi_s, q);
            }
    return r;
}

} // namespace

HolderReport holder_norms(const Field2& phi, const SpaceTimeGrid& g, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("holder_norms: alpha not in (0,1)");
    HolderReport rep;
    rep.alpha = alpha;
    SliceNorms n = slice_norms(phi.values.data(), phi.ns, phi.ny, g, alpha);
    rep.sup_norm = n.sup;
    rep.seminorm_y_alpha = n.semi_y;
    rep.seminorm_s_halfalpha = n.semi_s;
    rep.per_slice_norms[{0, 0}] = n.sup + n.semi_y + n.semi_s;
    return rep;
}

HolderReport holder_norms(const Field4& u, const SpaceTimeGrid& g, double alpha,
                          bool with_parameter_derivs) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("holder_norms: alpha not in (0,1)");
    HolderReport rep;
    rep.alpha = alpha;

    std::vector<const Field4*> parts{&u};
    Field4 ut, ux, uxx;
    if (with_parameter_derivs) {
        ut = derivative(u, g, Deriv::T);
        ux = derivative(u, g, Deriv::X);
        uxx = derivative(u, g, Deriv::XX);
        parts.push_back(&ut);
        parts.push_back(&ux);
        parts.push_back(&uxx);
    }

    const std::size_t ns = u.ns, ny = u.ny;
    std::vector<double> slice(ns * ny);
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t k = 0; k < ny; ++k) {
            double tot = 0.0;
            for (const Field4* p : parts) {
                for (std::size_t j = 0; j < ns; ++j)
                    for (std::size_t l = 0; l < ny; ++l)
                        slice[j * ny + l] = p->at(i, j, k, l);
                SliceNorms n = slice_norms(slice.data(), ns, ny, g, alpha);
                tot += n.sup + n.semi_y + n.semi_s;
                rep.sup_norm = std::max(rep.sup_norm, n.sup);
                rep.seminorm_y_alpha = std::max(rep.seminorm_y_alpha, n.semi_y);
                rep.seminorm_s_halfalpha = std::max(rep.seminorm_s_halfalpha, n.semi_s);
            }
            rep.per_slice_norms[{i, k}] = tot;
        }
    return rep;
}

} // namespace tic
