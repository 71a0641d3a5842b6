#pragma once

// Hand-rolled generators for property tests. Every generator draws from a
// caller-owned engine so that a failing case is reproducible from its seed.

#include <cstdint>
#include <random>
#include <vector>

#include "rbo/disorder.hpp"
#include "rbo/lattice.hpp"
#include "rbo/operators.hpp"

namespace gen {

using Engine = std::mt19937_64;

inline double uniform(Engine& g, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(g); }
inline int integer(Engine& g, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g); }

inline rbo::Site site(Engine& g, int dim, int radius) {
    std::vector<int> c;
    for (int k = 0; k < dim; ++k) c.push_back(integer(g, -radius, radius));
    return rbo::Site{c};
}

/// Random measure of any of the four kinds with support inside [lo, hi].
inline rbo::SiteMeasure measure(Engine& g, double lo, double hi) {
    const double a = uniform(g, lo, hi);
    const double b = uniform(g, lo, hi);
    const double x = std::min(a, b), y = std::max(a, b) + 1e-3;
    switch (integer(g, 0, 3)) {
    case 0: return rbo::SiteMeasure::uniform(x, y);
    case 1: return rbo::SiteMeasure::triangular(x, y);
    case 2: return rbo::SiteMeasure::point_mass(x);
    default: return rbo::SiteMeasure::two_point(x, uniform(g, 0.1, 0.9), y);
    }
}

/// Field with values drawn uniformly from [vlo, vhi] and [blo, bhi].
inline rbo::FieldSample field(Engine& g, const rbo::Region& where, double vlo, double vhi, double blo, double bhi) {
    rbo::FieldSample f{where, {}, {}, 0};
    for (std::size_t i = 0; i < where.size(); ++i) {
        f.v.push_back(uniform(g, vlo, vhi));
        f.b.push_back(uniform(g, blo, bhi));
    }
    return f;
}

inline rbo::Matrix symmetric(Engine& g, int n, double scale = 1.0) {
    rbo::Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = uniform(g, -scale, scale);
    return m;
}

/// Symmetric positive definite matrix with spectrum >= floor.
inline rbo::Matrix positive(Engine& g, int n, double floor = 0.5) {
    rbo::Matrix a = symmetric(g, n);
    return a * a.transpose() + floor * rbo::Matrix::Identity(n, n);
}

struct Triple {
    rbo::Region inner, middle, outer;
};

/// Concentric or off-centre nested cubes Λ1 ⊏ Λ2 ⊏ Λ3.
inline Triple nested_cubes(Engine& g, int dim, int max_outer) {
    for (;;) {
        const int l3 = integer(g, 5, max_outer);
        const int l2 = integer(g, 3, l3 - 2);
        const int l1 = integer(g, 1, l2 - 2);
        const rbo::CubeSpec c3(dim, l3);
        const int room2 = (static_cast<int>(c3.side()) - static_cast<int>(rbo::CubeSpec(dim, l2).side())) / 2 - 1;
        const rbo::Site centre2 = site(g, dim, std::max(room2, 0));
        const rbo::CubeSpec c2(dim, l2, centre2);
        const int room1 = (static_cast<int>(c2.side()) - static_cast<int>(rbo::CubeSpec(dim, l1).side())) / 2 - 1;
        std::vector<int> c1 = centre2.coords;
        for (auto& x : c1) x += integer(g, -std::max(room1, 0), std::max(room1, 0));
        Triple t{rbo::region(rbo::CubeSpec(dim, l1, rbo::Site{c1})), rbo::region(c2), rbo::region(c3)};
        if (rbo::strictly_inside(t.inner, t.middle) && rbo::strictly_inside(t.middle, t.outer)) return t;
    }
}

} // namespace gen
