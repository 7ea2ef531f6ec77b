#include "tic/grid.hpp"

namespace tic {

Closure closure_from_string(const std::string& s) {
    if (s == "periodic") return Closure::Periodic;
    if (s == "dirichlet-from-data") return Closure::DirichletFromData;
    if (s == "extrapolate") return Closure::Extrapolate;
    if (s == "extrapolate-quadratic") return Closure::ExtrapolateQuadratic;
    throw ConfigError("unknown closure tag: " + s);
}

static std::vector<double> uniform_nodes(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    const double h = (hi - lo) / double(n - 1);
    for (std::size_t i = 0; i < n; ++i) v[i] = lo + h * double(i);
    v.front() = lo;
    v.back() = hi;
    return v;
}

SpaceTimeGrid make_grid(double T, std::size_t n_s, double y_min, double y_max,
                        std::size_t n_y, Closure closure) {
    if (!(T > 0)) throw ConfigError("make_grid: horizon T must be positive");
    if (n_s < 2) throw ConfigError("make_grid: too few time nodes (need >= 2)");
    if (n_y < 3) throw ConfigError("make_grid: too few state nodes (need >= 3)");
    if (!(y_min < y_max)) throw ConfigError("make_grid: inverted state bounds");
    SpaceTimeGrid g;
    g.s_nodes = uniform_nodes(0.0, T, n_s);
    g.s_nodes.front() = 0.0;
    g.y_nodes = uniform_nodes(y_min, y_max, n_y);
    g.closure = closure;
    return g;
}

SpaceTimeGrid make_periodic_grid(double T, std::size_t n_s, double y_lo,
                                 double y_hi, std::size_t n_y) {
    if (n_y < 3) throw ConfigError("make_periodic_grid: too few state nodes");
    const double h = (y_hi - y_lo) / double(n_y);
    SpaceTimeGrid g = make_grid(T, n_s, y_lo, y_hi - h, n_y, Closure::Periodic);
    return g;
}

} // namespace tic
