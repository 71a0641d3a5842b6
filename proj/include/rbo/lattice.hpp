#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rbo {

/// A point of Z^d.
struct Site {
    std::vector<int> coords;

    int dim() const { return static_cast<int>(coords.size()); }
    int operator[](std::size_t k) const { return coords[k]; }
    auto operator<=>(const Site&) const = default;
    bool operator==(const Site&) const = default;
};

inline std::string to_string(const Site& s) {
    std::string out;
    for (std::size_t k = 0; k < s.coords.size(); ++k) {
        if (k) out += ':';
        out += std::to_string(s.coords[k]);
    }
    return out;
}

/// 1-norm distance |n - m|.
inline int dist1(const Site& n, const Site& m) {
    if (n.dim() != m.dim()) throw std::invalid_argument("dist1: dimension mismatch");
    int d = 0;
    for (int k = 0; k < n.dim(); ++k) d += std::abs(n[k] - m[k]);
    return d;
}

inline int norm_inf(const Site& n) {
    int r = 0;
    for (int c : n.coords) r = std::max(r, std::abs(c));
    return r;
}

/// The 2d nearest neighbours of n, in lexicographic order.
inline std::vector<Site> neighbors(const Site& n) {
    std::vector<Site> out;
    out.reserve(2 * n.coords.size());
    for (std::size_t k = 0; k < n.coords.size(); ++k) {
        for (int step : {-1, 1}) {
            Site m = n;
            m.coords[k] += step;
            out.push_back(std::move(m));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Discrete cube (center + ]-L/2, L/2[^d) ∩ Z^d.
struct CubeSpec {
    int dim = 1;
    double length = 1.0;
    Site center{};

    CubeSpec() = default;
    CubeSpec(int d, double L) : dim(d), length(L), center{std::vector<int>(static_cast<std::size_t>(d), 0)} {}
    CubeSpec(int d, double L, Site c) : dim(d), length(L), center(std::move(c)) {}

    /// Integer offsets k with -L/2 < k < L/2, per axis.
    int lowest_offset() const { return static_cast<int>(std::floor(-length / 2.0)) + 1; }
    int highest_offset() const { return static_cast<int>(std::ceil(length / 2.0)) - 1; }
    std::size_t side() const { return static_cast<std::size_t>(highest_offset() - lowest_offset() + 1); }
    std::size_t volume() const {
        std::size_t v = 1;
        for (int k = 0; k < dim; ++k) v *= side();
        return v;
    }
};

/// Finite set of sites kept in lexicographic order; the position of a site in
/// this order is its canonical matrix index.
class Region {
public:
    Region() = default;
    Region(int dim, std::vector<Site> sites) : dim_(dim), sites_(std::move(sites)) {
        for (const auto& s : sites_)
            if (s.dim() != dim_) throw std::invalid_argument("Region: site of wrong dimension");
        std::sort(sites_.begin(), sites_.end());
        sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
    }

    int dim() const { return dim_; }
    std::size_t size() const { return sites_.size(); }
    bool empty() const { return sites_.empty(); }
    const Site& operator[](std::size_t i) const { return sites_[i]; }
    auto begin() const { return sites_.begin(); }
    auto end() const { return sites_.end(); }
    const std::vector<Site>& sites() const { return sites_; }

    std::optional<std::size_t> index_of(const Site& s) const {
        auto it = std::lower_bound(sites_.begin(), sites_.end(), s);
        if (it == sites_.end() || *it != s) return std::nullopt;
        return static_cast<std::size_t>(it - sites_.begin());
    }
    bool contains(const Site& s) const { return index_of(s).has_value(); }

    bool operator==(const Region&) const = default;

private:
    int dim_ = 1;
    std::vector<Site> sites_;
};

/// Sites of a cube in lexicographic order. Any L > 0 gives a nonempty cube.
inline std::vector<Site> sites(const CubeSpec& cube) {
    if (cube.dim < 1) throw std::invalid_argument("sites: dimension must be >= 1");
    if (!(cube.length > 0.0) || !std::isfinite(cube.length))
        throw std::invalid_argument("sites: cube length must be a finite positive number");
    if (cube.center.dim() != cube.dim) throw std::invalid_argument("sites: center has wrong dimension");

    const int lo = cube.lowest_offset();
    const int hi = cube.highest_offset();
    std::vector<Site> out;
    out.reserve(cube.volume());
    std::vector<int> offset(static_cast<std::size_t>(cube.dim), lo);
    // odometer over [lo, hi]^d, last coordinate fastest -> lexicographic order
    while (true) {
        Site s = cube.center;
        for (int k = 0; k < cube.dim; ++k) s.coords[k] += offset[k];
        out.push_back(std::move(s));
        int k = cube.dim - 1;
        while (k >= 0 && offset[k] == hi) offset[k--] = lo;
        if (k < 0) break;
        ++offset[k];
    }
    return out;
}

inline Region region(const CubeSpec& cube) { return Region(cube.dim, sites(cube)); }

/// Sites of `a` not in `b`.
inline Region difference(const Region& a, const Region& b) {
    std::vector<Site> out;
    for (const auto& s : a)
        if (!b.contains(s)) out.push_back(s);
    return Region(a.dim(), std::move(out));
}

struct Edge {
    Site from;
    Site to;
    auto operator<=>(const Edge&) const = default;
    bool operator==(const Edge&) const = default;
};

using EdgeSet = std::vector<Edge>;

/// ∂Λ: ordered nearest-neighbour pairs with exactly one endpoint in Λ, both orientations.
inline EdgeSet boundary(const Region& inner) {
    EdgeSet out;
    for (const auto& n : inner) {
        for (auto& m : neighbors(n)) {
            if (inner.contains(m)) continue;
            out.push_back({n, m});
            out.push_back({m, n});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline Region inner_boundary(const Region& r) {
    std::vector<Site> out;
    for (const auto& n : r) {
        auto nb = neighbors(n);
        if (std::any_of(nb.begin(), nb.end(), [&](const Site& m) { return !r.contains(m); })) out.push_back(n);
    }
    return Region(r.dim(), std::move(out));
}

inline Region outer_boundary(const Region& r) {
    std::vector<Site> out;
    for (const auto& n : r)
        for (auto& m : neighbors(n))
            if (!r.contains(m)) out.push_back(std::move(m));
    return Region(r.dim(), std::move(out));
}

/// Λ1 ⊏ Λ2: every edge of ∂Λ1 has both endpoints in Λ2.
inline bool strictly_inside(const Region& inner, const Region& outer) {
    for (const auto& e : boundary(inner))
        if (!outer.contains(e.from) || !outer.contains(e.to)) return false;
    return true;
}

} // namespace rbo
