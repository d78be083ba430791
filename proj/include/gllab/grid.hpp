#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <type_traits>
#include <vector>

#include "gllab/errors.hpp"

namespace gllab {

using cplx = std::complex<double>;

/**
 * Dense 2D array stored x-fastest: element (i, j) lives at i + ni * j.
 */
template <class T>
class Array2 {
public:
    Array2() = default;
    Array2(int ni, int nj, T fill = T{})
        : ni_(ni), nj_(nj), v_(static_cast<std::size_t>(ni) * static_cast<std::size_t>(nj), fill) {
        if (ni < 0 || nj < 0) throw DimensionError("Array2: negative extent");
    }

    int ni() const { return ni_; }
    int nj() const { return nj_; }
    std::size_t size() const { return v_.size(); }

    T& operator()(int i, int j) { return v_[index(i, j)]; }
    const T& operator()(int i, int j) const { return v_[index(i, j)]; }
    T& operator[](std::size_t k) { return v_[k]; }
    const T& operator[](std::size_t k) const { return v_[k]; }

    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(ni_) * static_cast<std::size_t>(j);
    }

    std::vector<T>& values() { return v_; }
    const std::vector<T>& values() const { return v_; }
    T* data() { return v_.data(); }
    const T* data() const { return v_.data(); }

    bool same_shape(const Array2& o) const { return ni_ == o.ni_ && nj_ == o.nj_; }

    void fill(const T& t) { std::fill(v_.begin(), v_.end(), t); }

    friend bool operator==(const Array2&, const Array2&) = default;

private:
    int ni_ = 0;
    int nj_ = 0;
    std::vector<T> v_;
};

// Location tags keep node, cell and edge quantities from being mixed up.
struct NodeTag {};
struct CellTag {};
struct XEdgeTag {};
struct YEdgeTag {};

template <class T, class Tag>
class Field : public Array2<T> {
public:
    using Array2<T>::Array2;
    using tag = Tag;
    friend bool operator==(const Field&, const Field&) = default;
};

using NodeField = Field<double, NodeTag>;
using ComplexField = Field<cplx, NodeTag>;
using CellField = Field<double, CellTag>;
using CellComplexField = Field<cplx, CellTag>;
using XEdgeField = Field<double, XEdgeTag>;
using YEdgeField = Field<double, YEdgeTag>;
using XEdgeComplexField = Field<cplx, XEdgeTag>;
using YEdgeComplexField = Field<cplx, YEdgeTag>;

// Tangential components of a vector field: x holds A1 at the midpoints of
// horizontal edges, y holds A2 at the midpoints of vertical edges. The normal
// component on the outer boundary is not a degree of freedom; it is zero.
struct EdgeField {
    XEdgeField x;
    YEdgeField y;
    friend bool operator==(const EdgeField&, const EdgeField&) = default;
};

struct EdgeComplexField {
    XEdgeComplexField x;
    YEdgeComplexField y;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

enum class Boundary { neumann, dirichlet };

// Boundary type per side of the rectangle. Dirichlet nodes are held fixed by
// the magnetic operators and excluded from their residuals.
struct SideConditions {
    Boundary left = Boundary::neumann;    // x = 0
    Boundary right = Boundary::neumann;   // x = Lx
    Boundary bottom = Boundary::neumann;  // y = 0
    Boundary top = Boundary::neumann;     // y = Ly

    static SideConditions all_neumann() { return {}; }
    static SideConditions all_dirichlet() {
        return {Boundary::dirichlet, Boundary::dirichlet, Boundary::dirichlet, Boundary::dirichlet};
    }
};

/**
 * Uniform staggered grid on the rectangle [0, Lx] x [0, Ly].
 *
 * Layouts: nodes (nx+1) x (ny+1), x-edges nx x (ny+1), y-edges (nx+1) x ny,
 * cells nx x ny. Node (i, j) sits at (i hx, j hy).
 */
class Grid {
public:
    Grid(int nx, int ny, double lx, double ly) : nx_(nx), ny_(ny), lx_(lx), ly_(ly) {
        if (nx < 4 || ny < 4) throw DimensionError("Grid: need at least 4 cells per axis");
        if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly))
            throw DomainError("Grid: side lengths must be positive and finite");
    }

    // n x n cells on [0, L]^2.
    static Grid square(int n, double side = 1.0) { return Grid(n, n, side, side); }

    // Square cells of size h; sides are rounded to whole cells.
    static Grid with_spacing(double lx, double ly, double h) {
        const int nx = std::max(4, static_cast<int>(std::lround(lx / h)));
        const int ny = std::max(4, static_cast<int>(std::lround(ly / h)));
        return Grid(nx, ny, nx * h, ny * h);
    }

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double lx() const { return lx_; }
    double ly() const { return ly_; }
    double hx() const { return lx_ / nx_; }
    double hy() const { return ly_ / ny_; }
    double cell_area() const { return hx() * hy(); }
    double area() const { return lx_ * ly_; }

    Point node(int i, int j) const { return {i * hx(), j * hy()}; }
    Point cell_center(int i, int j) const { return {(i + 0.5) * hx(), (j + 0.5) * hy()}; }
    Point xedge_mid(int i, int j) const { return {(i + 0.5) * hx(), j * hy()}; }
    Point yedge_mid(int i, int j) const { return {i * hx(), (j + 0.5) * hy()}; }

    bool contains(Point p, double slack = 0.0) const {
        return p.x >= -slack && p.x <= lx_ + slack && p.y >= -slack && p.y <= ly_ + slack;
    }

    double distance_to_boundary(Point p) const {
        return std::min(std::min(p.x, lx_ - p.x), std::min(p.y, ly_ - p.y));
    }

    bool on_boundary(int i, int j) const { return i == 0 || j == 0 || i == nx_ || j == ny_; }

    NodeField node_field(double v = 0.0) const { return NodeField(nx_ + 1, ny_ + 1, v); }
    ComplexField complex_field(cplx v = {}) const { return ComplexField(nx_ + 1, ny_ + 1, v); }
    CellField cell_field(double v = 0.0) const { return CellField(nx_, ny_, v); }
    EdgeField edge_field(double v = 0.0) const {
        return {XEdgeField(nx_, ny_ + 1, v), YEdgeField(nx_ + 1, ny_, v)};
    }

    // Trapezoid weights: interior h^2, boundary sides half, corners a quarter.
    double node_weight(int i, int j) const {
        double w = cell_area();
        if (i == 0 || i == nx_) w *= 0.5;
        if (j == 0 || j == ny_) w *= 0.5;
        return w;
    }
    // Horizontal edges on y = 0 or y = Ly carry half a dual cell.
    double xedge_weight(int, int j) const { return (j == 0 || j == ny_) ? 0.5 * cell_area() : cell_area(); }
    double yedge_weight(int i, int) const { return (i == 0 || i == nx_) ? 0.5 * cell_area() : cell_area(); }

    bool node_is_dirichlet(int i, int j, const SideConditions& s) const {
        return (i == 0 && s.left == Boundary::dirichlet) || (i == nx_ && s.right == Boundary::dirichlet) ||
               (j == 0 && s.bottom == Boundary::dirichlet) || (j == ny_ && s.top == Boundary::dirichlet);
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    int nx_;
    int ny_;
    double lx_;
    double ly_;
};

inline void require_nodes(const Grid& g, const Array2<double>& f, const char* what) {
    if (f.ni() != g.nx() + 1 || f.nj() != g.ny() + 1)
        throw DimensionError(std::string(what) + ": node field shape does not match grid");
}
inline void require_nodes(const Grid& g, const Array2<cplx>& f, const char* what) {
    if (f.ni() != g.nx() + 1 || f.nj() != g.ny() + 1)
        throw DimensionError(std::string(what) + ": node field shape does not match grid");
}
inline void require_cells(const Grid& g, const Array2<double>& f, const char* what) {
    if (f.ni() != g.nx() || f.nj() != g.ny())
        throw DimensionError(std::string(what) + ": cell field shape does not match grid");
}
inline void require_edges(const Grid& g, const EdgeField& a, const char* what) {
    if (a.x.ni() != g.nx() || a.x.nj() != g.ny() + 1 || a.y.ni() != g.nx() + 1 || a.y.nj() != g.ny())
        throw DimensionError(std::string(what) + ": edge field shape does not match grid");
}

template <class F>
bool all_finite(const F& f) {
    for (const auto& v : f.values()) {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, cplx>) {
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        } else {
            if (!std::isfinite(v)) return false;
        }
    }
    return true;
}

// Samplers for closed-form fields.
template <class Fn>
NodeField sample_nodes(const Grid& g, Fn&& f) {
    NodeField out = g.node_field();
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) out(i, j) = f(g.node(i, j));
    return out;
}

template <class Fn>
ComplexField sample_complex(const Grid& g, Fn&& f) {
    ComplexField out = g.complex_field();
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) out(i, j) = f(g.node(i, j));
    return out;
}

template <class Fn>
CellField sample_cells(const Grid& g, Fn&& f) {
    CellField out = g.cell_field();
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) out(i, j) = f(g.cell_center(i, j));
    return out;
}

// Midpoint samples of the tangential components of a vector field f(p) -> Point.
template <class Fn>
EdgeField sample_edges(const Grid& g, Fn&& f) {
    EdgeField a = g.edge_field();
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) a.x(i, j) = f(g.xedge_mid(i, j)).x;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) a.y(i, j) = f(g.yedge_mid(i, j)).y;
    return a;
}

inline EdgeField operator+(const EdgeField& a, const EdgeField& b) {
    EdgeField c = a;
    for (std::size_t k = 0; k < c.x.size(); ++k) c.x[k] += b.x[k];
    for (std::size_t k = 0; k < c.y.size(); ++k) c.y[k] += b.y[k];
    return c;
}
inline EdgeField operator-(const EdgeField& a, const EdgeField& b) {
    EdgeField c = a;
    for (std::size_t k = 0; k < c.x.size(); ++k) c.x[k] -= b.x[k];
    for (std::size_t k = 0; k < c.y.size(); ++k) c.y[k] -= b.y[k];
    return c;
}
inline EdgeField operator*(double s, const EdgeField& a) {
    EdgeField c = a;
    for (auto& v : c.x.values()) v *= s;
    for (auto& v : c.y.values()) v *= s;
    return c;
}

}  // namespace gllab
