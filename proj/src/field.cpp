#include "tic/field.hpp"

#include <algorithm>
#include <cmath>

namespace tic {

double sup_norm(const Field4& a) {
    double m = 0.0;
    for (double v : a.values) m = std::max(m, std::fabs(v));
    return m;
}

double sup_norm(const Field2& a) {
    double m = 0.0;
    for (double v : a.values) m = std::max(m, std::fabs(v));
    return m;
}

double sup_diff(const Field4& a, const Field4& b) {
    if (a.values.size() != b.values.size()) throw ConfigError("sup_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        m = std::max(m, std::fabs(a.values[i] - b.values[i]));
    return m;
}

double sup_diff(const Field2& a, const Field2& b) {
    if (a.values.size() != b.values.size()) throw ConfigError("sup_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        m = std::max(m, std::fabs(a.values[i] - b.values[i]));
    return m;
}

void line_dy(std::span<const double> f, double h, bool periodic, std::span<double> out) {
    const std::size_t n = f.size();
    if (n < 3) throw ConfigError("derivative: axis too short");
    const double i2h = 1.0 / (2.0 * h);
    if (periodic) {
        out[0] = (f[1] - f[n - 1]) * i2h;
        out[n - 1] = (f[0] - f[n - 2]) * i2h;
    } else {
        out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * i2h;
        out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * i2h;
    }
    for (std::size_t l = 1; l + 1 < n; ++l) out[l] = (f[l + 1] - f[l - 1]) * i2h;
}

void line_dyy(std::span<const double> f, double h, bool periodic, std::span<double> out) {
    const std::size_t n = f.size();
    if (n < 3) throw ConfigError("derivative: axis too short");
    const double ih2 = 1.0 / (h * h);
    if (periodic) {
        out[0] = (f[1] - 2.0 * f[0] + f[n - 1]) * ih2;
        out[n - 1] = (f[0] - 2.0 * f[n - 1] + f[n - 2]) * ih2;
    } else if (n >= 4) {
        // second-order one-sided second difference
        out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * ih2;
        out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) * ih2;
    } else {
        out[0] = (f[0] - 2.0 * f[1] + f[2]) * ih2;
        out[n - 1] = (f[n - 1] - 2.0 * f[n - 2] + f[n - 3]) * ih2;
    }
    for (std::size_t l = 1; l + 1 < n; ++l)
        out[l] = (f[l + 1] - 2.0 * f[l] + f[l - 1]) * ih2;
}

namespace {

// Gather a non-contiguous line with stride, differentiate, scatter back.
template <typename F>
void apply_along(Field4& out, const Field4& u, std::size_t n, std::size_t stride,
                 std::size_t base, F&& diff) {
    static thread_local std::vector<double> buf, res;
    buf.resize(n);
    res.resize(n);
    for (std::size_t a = 0; a < n; ++a) buf[a] = u.values[base + a * stride];
    diff(std::span<const double>(buf), std::span<double>(res));
    for (std::size_t a = 0; a < n; ++a) out.values[base + a * stride] = res[a];
}

} // namespace

Field4 derivative(const Field4& u, const SpaceTimeGrid& g, Deriv which) {
    if (u.ns != g.ns() || u.ny != g.ny()) throw ConfigError("derivative: grid mismatch");
    const std::size_t ns = u.ns, ny = u.ny;
    Field4 out(ns, ny);
    const bool per = g.periodic();
    const double hs = g.ds(), hy = g.dy();

    const bool first = (which == Deriv::T || which == Deriv::S || which == Deriv::X ||
                        which == Deriv::Y);
    const bool state_axis = (which == Deriv::X || which == Deriv::Y ||
                             which == Deriv::XX || which == Deriv::YY);
    const double h = state_axis ? hy : hs;
    const bool wrap = state_axis && per;
    auto diff = [&](std::span<const double> f, std::span<double> o) {
        if (first)
            line_dy(f, h, wrap, o);
        else
            line_dyy(f, h, wrap, o);
    };

    // strides in the flat layout (t,s,x,y)
    const std::size_t st_t = ns * ny * ny, st_s = ny * ny, st_x = ny, st_y = 1;
    switch (which) {
        case Deriv::T:
            for (std::size_t j = 0; j < ns; ++j)
                for (std::size_t k = 0; k < ny; ++k)
                    for (std::size_t l = 0; l < ny; ++l)
                        apply_along(out, u, ns, st_t, (j * ny + k) * ny + l, diff);
            break;
        case Deriv::S:
            for (std::size_t i = 0; i < ns; ++i)
                for (std::size_t k = 0; k < ny; ++k)
                    for (std::size_t l = 0; l < ny; ++l)
                        apply_along(out, u, ns, st_s, ((i * ns) * ny + k) * ny + l, diff);
            break;
        case Deriv::X:
        case Deriv::XX:
            for (std::size_t i = 0; i < ns; ++i)
                for (std::size_t j = 0; j < ns; ++j)
                    for (std::size_t l = 0; l < ny; ++l)
                        apply_along(out, u, ny, st_x, (i * ns + j) * ny * ny + l, diff);
            break;
        case Deriv::Y:
        case Deriv::YY:
            for (std::size_t i = 0; i < ns; ++i)
                for (std::size_t j = 0; j < ns; ++j)
                    for (std::size_t k = 0; k < ny; ++k)
                        apply_along(out, u, ny, st_y, ((i * ns + j) * ny + k) * ny, diff);
            break;
    }
    (void)st_y;
    return out;
}

Field2 diagonal_trace(const Field4& u) {
    Field2 out(u.ns, u.ny);
    for (std::size_t j = 0; j < u.ns; ++j)
        for (std::size_t l = 0; l < u.ny; ++l)
            out.at(j, l) = u.at(j, j, l, l);
    return out;
}

DiagonalTraces diagonal_derivative_traces(const Field4& u, const SpaceTimeGrid& g) {
    const std::size_t ns = u.ns, ny = u.ny;
    DiagonalTraces tr{Field2(ns, ny), Field2(ns, ny), Field2(ns, ny)};
    std::vector<double> d1(ny), d2(ny);
    for (std::size_t j = 0; j < ns; ++j)
        for (std::size_t k = 0; k < ny; ++k) {
            auto f = u.line(j, j, k);
            line_dy(f, g.dy(), g.periodic(), d1);
            line_dyy(f, g.dy(), g.periodic(), d2);
            tr.d0.at(j, k) = f[k];
            tr.d1.at(j, k) = d1[k];
            tr.d2.at(j, k) = d2[k];
        }
    return tr;
}

} // namespace tic
