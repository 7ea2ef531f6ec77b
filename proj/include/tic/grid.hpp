#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "tic/errors.hpp"

namespace tic {

// Boundary treatment along the state axes (x and y).
// Periodic wraps the stencil; DirichletFromData pins boundary nodes to the
// initial data for all times; Extrapolate imposes a vanishing second
// difference at the boundary rows (linearity closure); ExtrapolateQuadratic a
// vanishing third difference, which preserves boundary curvature and keeps
// second-derivative traces honest there.
enum class Closure { Periodic, DirichletFromData, Extrapolate, ExtrapolateQuadratic };

inline std::string to_string(Closure c) {
    switch (c) {
        case Closure::Periodic: return "periodic";
        case Closure::DirichletFromData: return "dirichlet-from-data";
        case Closure::Extrapolate: return "extrapolate";
        case Closure::ExtrapolateQuadratic: return "extrapolate-quadratic";
    }
    return "?";
}

Closure closure_from_string(const std::string& s);

// Tensor-product grid for u(t,s,x,y).  The t-axis aliases the s-axis and the
// x-axis aliases the y-axis, so diagonal traces are exact index extractions.
struct SpaceTimeGrid {
    std::vector<double> s_nodes; // also the t nodes
    std::vector<double> y_nodes; // also the x nodes
    Closure closure = Closure::DirichletFromData;

    std::size_t ns() const { return s_nodes.size(); }
    std::size_t ny() const { return y_nodes.size(); }
    double T() const { return s_nodes.back(); }
    double ds() const { return s_nodes[1] - s_nodes[0]; }
    double dy() const { return y_nodes[1] - y_nodes[0]; }
    double y_min() const { return y_nodes.front(); }
    double y_max() const { return y_nodes.back(); }
    bool periodic() const { return closure == Closure::Periodic; }

    bool same_shape(const SpaceTimeGrid& o) const {
        return ns() == o.ns() && ny() == o.ny();
    }
};

// Uniform nodes, s in [0,T], y in [y_min,y_max], endpoints included.
SpaceTimeGrid make_grid(double T, std::size_t n_s, double y_min, double y_max,
                        std::size_t n_y, Closure closure);

// Periodic convenience: n_y cells on [y_lo, y_hi); the stored last node is
// y_hi - dy and the wrap distance equals dy.
SpaceTimeGrid make_periodic_grid(double T, std::size_t n_s, double y_lo,
                                 double y_hi, std::size_t n_y);

} // namespace tic
