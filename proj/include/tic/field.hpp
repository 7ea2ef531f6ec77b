#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "tic/errors.hpp"
#include "tic/grid.hpp"

namespace tic {

// Two-index field over (s,y): value functions, policies, diagonal traces.
struct Field2 {
    std::size_t ns = 0, ny = 0;
    std::vector<double> values;

    Field2() = default;
    Field2(std::size_t ns_, std::size_t ny_, double fill = 0.0)
        : ns(ns_), ny(ny_), values(ns_ * ny_, fill) {}

    double& at(std::size_t j, std::size_t l) { return values[j * ny + l]; }
    double at(std::size_t j, std::size_t l) const { return values[j * ny + l]; }

    static Field2 from_function(const SpaceTimeGrid& g,
                                const std::function<double(double, double)>& f) {
        Field2 out(g.ns(), g.ny());
        for (std::size_t j = 0; j < g.ns(); ++j)
            for (std::size_t l = 0; l < g.ny(); ++l)
                out.at(j, l) = f(g.s_nodes[j], g.y_nodes[l]);
        return out;
    }
};

// Initial data g(t,x,y) on the t- and (x,y)-axes of a grid.
struct Field3 {
    std::size_t nt = 0, ny = 0;
    std::vector<double> values;

    Field3() = default;
    Field3(std::size_t nt_, std::size_t ny_, double fill = 0.0)
        : nt(nt_), ny(ny_), values(nt_ * ny_ * ny_, fill) {}

    double& at(std::size_t i, std::size_t k, std::size_t l) {
        return values[(i * ny + k) * ny + l];
    }
    double at(std::size_t i, std::size_t k, std::size_t l) const {
        return values[(i * ny + k) * ny + l];
    }

    static Field3 from_function(const SpaceTimeGrid& g,
                                const std::function<double(double, double, double)>& f) {
        Field3 out(g.ns(), g.ny());
        for (std::size_t i = 0; i < g.ns(); ++i)
            for (std::size_t k = 0; k < g.ny(); ++k)
                for (std::size_t l = 0; l < g.ny(); ++l)
                    out.at(i, k, l) = f(g.s_nodes[i], g.y_nodes[k], g.y_nodes[l]);
        return out;
    }
};

// The 4-index unknown u(t_i, s_j, x_k, y_l), row-major in (t,s,x,y).
struct Field4 {
    std::size_t ns = 0, ny = 0;
    std::vector<double> values;

    Field4() = default;
    Field4(std::size_t ns_, std::size_t ny_, double fill = 0.0)
        : ns(ns_), ny(ny_), values(ns_ * ns_ * ny_ * ny_, fill) {}

    std::size_t index(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
        return ((i * ns + j) * ny + k) * ny + l;
    }
    double& at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
        return values[index(i, j, k, l)];
    }
    double at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
        return values[index(i, j, k, l)];
    }

    // Contiguous y-line at fixed (t,s,x).
    std::span<double> line(std::size_t i, std::size_t j, std::size_t k) {
        return {values.data() + index(i, j, k, 0), ny};
    }
    std::span<const double> line(std::size_t i, std::size_t j, std::size_t k) const {
        return {values.data() + index(i, j, k, 0), ny};
    }

    static Field4 from_function(
        const SpaceTimeGrid& g,
        const std::function<double(double, double, double, double)>& f) {
        Field4 out(g.ns(), g.ny());
        for (std::size_t i = 0; i < g.ns(); ++i)
            for (std::size_t j = 0; j < g.ns(); ++j)
                for (std::size_t k = 0; k < g.ny(); ++k)
                    for (std::size_t l = 0; l < g.ny(); ++l)
                        out.at(i, j, k, l) =
                            f(g.s_nodes[i], g.s_nodes[j], g.y_nodes[k], g.y_nodes[l]);
        return out;
    }

    void check_finite(const char* who) const {
        for (double v : values)
            if (!std::isfinite(v))
                throw SolverError(std::string(who) + ": non-finite field entry");
    }
};

double sup_norm(const Field4& a);
double sup_norm(const Field2& a);
double sup_diff(const Field4& a, const Field4& b);
double sup_diff(const Field2& a, const Field2& b);

// Which derivative of u(t,s,x,y) to take.
enum class Deriv { T, S, X, Y, XX, YY };

// Second-order finite differences: central in the interior, one-sided at the
// ends of non-periodic axes, wrapped for periodic state axes.  t and s are
// never periodic.
Field4 derivative(const Field4& u, const SpaceTimeGrid& g, Deriv which);

// v(s,y) = u(s,s,y,y); exact index extraction.
Field2 diagonal_trace(const Field4& u);

// Diagonal derivative traces d_I(s,y) = (d/dy)^I u(s,s,x,y)|_{x=y}, I=0,1,2.
struct DiagonalTraces {
    Field2 d0, d1, d2;
};
DiagonalTraces diagonal_derivative_traces(const Field4& u, const SpaceTimeGrid& g);

// Differentiate a single y-line in place of output buffers.
void line_dy(std::span<const double> f, double h, bool periodic, std::span<double> out);
void line_dyy(std::span<const double> f, double h, bool periodic, std::span<double> out);

} // namespace tic
