#pragma once

#include <map>
#include <utility>

#include "tic/field.hpp"

namespace tic {

// Discrete surrogate of the parabolic Holder norm over an (s,y) slice family.
// Seminorms are maxima of Holder quotients over grid-node pairs; the y-pair
// constraint |y - y'| <= 1 follows the continuous definition.
struct HolderReport {
    double sup_norm = 0.0;
    double seminorm_y_alpha = 0.0;     // <.>_y^(alpha)
    double seminorm_s_halfalpha = 0.0; // <.>_s^(alpha/2)
    double alpha = 0.0;
    // per (t_i,x_k) slice: sup + both seminorms of that slice
    std::map<std::pair<std::size_t, std::size_t>, double> per_slice_norms;

    double total() const { return sup_norm + seminorm_y_alpha + seminorm_s_halfalpha; }
};

// Slice-wise report for a single 2-index function phi(s,y).
HolderReport holder_norms(const Field2& phi, const SpaceTimeGrid& g, double alpha);

// Report for u(t,s,x,y): maxima over (t,x) slices of the slice reports of u
// itself.  `with_parameter_derivs` additionally folds in the u_t, u_x, u_xx
// slice norms, mirroring the ||.|| norm that stacks (psi, psi_t, psi_x, psi_xx).
HolderReport holder_norms(const Field4& u, const SpaceTimeGrid& g, double alpha,
                          bool with_parameter_derivs = false);

} // namespace tic
