#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rbo/disorder.hpp"
#include "rbo/ensemble.hpp"
#include "rbo/lattice.hpp"
#include "rbo/operators.hpp"
#include "rbo/report.hpp"
#include "rbo/spectral.hpp"

namespace rbo {

/// E lies in or numerically too close to the spectrum.
class SpectralProximityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// 𝔾_Λ(E) = (Ĥ_Λ - E)^{-1} together with δ = dist(E, σ(Ĥ_Λ)).
struct GreenFunction {
    Region region;
    double energy = 0.0;
    double distance = 0.0;
    Matrix inverse;

    Eigen::Index half() const { return static_cast<Eigen::Index>(region.size()); }
};

inline double spectral_distance(const Spectrum& s, double energy) {
    double d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < s.values.size(); ++j) d = std::min(d, std::abs(s.values(j) - energy));
    return d;
}

inline GreenFunction resolvent(const BlockOperator& op, double energy, const Spectrum& spectrum) {
    const double delta = spectral_distance(spectrum, energy);
    if (!(delta >= 1e-8 * std::max(spectrum.norm(), 1.0)))
        throw SpectralProximityError("resolvent: energy is within 1e-8 ||H|| of the spectrum");
    const auto n = op.matrix.rows();
    Matrix shifted = op.matrix - energy * Matrix::Identity(n, n);
    Eigen::PartialPivLU<Matrix> lu(shifted);
    return {op.region, energy, delta, lu.inverse()};
}

inline GreenFunction resolvent(const BlockOperator& op, double energy) {
    return resolvent(op, energy, eigensolve(op));
}

/// 2x2-matrix-valued element 𝔸(n,m) of an operator on ℓ²(Λ)⊕ℓ²(Λ).
inline Eigen::Matrix2d block_element(const Matrix& a, Eigen::Index n, Eigen::Index m) {
    const auto h = a.rows() / 2;
    Eigen::Matrix2d out;
    out << a(n, m), a(n, h + m), a(h + n, m), a(h + n, h + m);
    return out;
}

enum class BlockNorm { frobenius, spectral };

inline double block_norm(const Eigen::Matrix2d& b, BlockNorm kind = BlockNorm::frobenius) {
    if (kind == BlockNorm::frobenius) return b.norm();
    return Eigen::JacobiSVD<Eigen::Matrix2d>(b).singularValues()(0);
}

inline Matrix select(const Matrix& m, const std::vector<Eigen::Index>& rows, const std::vector<Eigen::Index>& cols) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(rows[i], cols[j]);
    return out;
}

inline double operator_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

/// ‖𝟙_X A 𝟙_Y‖ for an operator on ℓ²(ambient)⊕ℓ²(ambient).
inline double restricted_norm(const Matrix& a, const Region& rows, const Region& cols, const Region& ambient) {
    return operator_norm(select(a, block_indices(rows, ambient), block_indices(cols, ambient)));
}

/// ‖𝟙_n A 𝟙_m‖_HS computed on the full space.
inline double hs_norm_local(const Matrix& a, const Site& n, const Site& m, const Region& ambient) {
    const Region rn(ambient.dim(), {n});
    const Region rm(ambient.dim(), {m});
    return (lifted_indicator(rn, ambient).asDiagonal() * a * lifted_indicator(rm, ambient).asDiagonal()).norm();
}

/// Plain block operator of `field` restricted to `where` (simple boundary conditions).
inline BlockOperator local_block(const FieldSample& field, const Region& where) {
    return assemble_block(restrict_field(field, where));
}

struct NestedTriple {
    Region inner;  // Λ1
    Region middle; // Λ2
    Region outer;  // Λ3
};

inline void require_nested(const NestedTriple& t) {
    if (!strictly_inside(t.inner, t.middle)) throw PreconditionError("nested triple: Λ1 is not strictly inside Λ2");
    if (!strictly_inside(t.middle, t.outer)) throw PreconditionError("nested triple: Λ2 is not strictly inside Λ3");
}

struct GriResidual {
    double residual = 0.0;
    double delta_middle = 0.0;
    double delta_outer = 0.0;
    double scale = 0.0; // max entry of the left-hand side

    double contract() const { return 1e-9 * (1.0 + 1.0 / delta_middle) * (1.0 + 1.0 / delta_outer); }
};

/// Max-entry residual of
///   𝟙_{∂ⁱΛ3} 𝔾_{Λ3} 𝟙_{Λ1} = -𝟙_{∂ⁱΛ3} 𝔾_{Λ3} 𝟙_{∂ᵒΛ2} 𝚪_{Λ2} 𝟙_{∂ⁱΛ2} 𝔾_{Λ2} 𝟙_{Λ1}
/// computed in ℓ²(Λ3)⊕ℓ²(Λ3).
inline GriResidual gri_residual(const NestedTriple& t, const FieldSample& field, double energy) {
    require_nested(t);
    const auto g3 = resolvent(local_block(field, t.outer), energy);
    const auto g2 = resolvent(local_block(field, t.middle), energy);
    const Matrix g2_emb = embed_block(g2.inverse, t.middle, t.outer);
    const Matrix gamma = build_gamma(t.middle, t.outer).lifted();

    const Vector p_outer_bdry = lifted_indicator(inner_boundary(t.outer), t.outer);
    const Vector p_inner = lifted_indicator(t.inner, t.outer);
    const Vector p_mid_out = lifted_indicator(outer_boundary(t.middle), t.outer);
    const Vector p_mid_in = lifted_indicator(inner_boundary(t.middle), t.outer);

    const Matrix lhs = p_outer_bdry.asDiagonal() * g3.inverse * p_inner.asDiagonal();
    const Matrix rhs = -(p_outer_bdry.asDiagonal() * g3.inverse * p_mid_out.asDiagonal() * gamma *
                         p_mid_in.asDiagonal() * g2_emb * p_inner.asDiagonal());
    return {(lhs - rhs).cwiseAbs().maxCoeff(), g2.distance, g3.distance, lhs.cwiseAbs().maxCoeff()};
}

/// ‖𝟙_{∂ⁱΛ3}𝔾_{Λ3}𝟙_{Λ1}‖ <= γ ‖𝟙_{∂ⁱΛ3}𝔾_{Λ3}𝟙_{∂ᵒΛ2}‖ ‖𝟙_{∂ⁱΛ2}𝔾_{Λ2}𝟙_{Λ1}‖ with γ = ‖𝚪_{Λ2}‖.
inline CheckReport sli_check(const NestedTriple& t, const FieldSample& field, double energy, double rel_tol = 1e-9) {
    require_nested(t);
    const auto g3 = resolvent(local_block(field, t.outer), energy);
    const auto g2 = resolvent(local_block(field, t.middle), energy);
    const double gamma = build_gamma(t.middle, t.outer).norm();
    const Region bdry3 = inner_boundary(t.outer);

    const double lhs = restricted_norm(g3.inverse, bdry3, t.inner, t.outer);
    const double rhs = gamma * restricted_norm(g3.inverse, bdry3, outer_boundary(t.middle), t.outer) *
                       restricted_norm(g2.inverse, inner_boundary(t.middle), t.inner, t.middle);
    CheckReport rep("sli", rel_tol);
    rep.record((rhs - lhs) / std::max({lhs, rhs, 1e-300}));
    rep.set("lhs", lhs);
    rep.set("rhs", rhs);
    rep.set("gamma", gamma);
    return rep;
}

/// ‖𝟙_nΨ‖ <= γ ‖𝟙_n 𝔾_Λ(E) 𝟙_{∂ⁱΛ}‖ ‖𝟙_{∂ᵒΛ}Ψ‖ for an exact eigenpair (E, Ψ) of Ĥ_{Λ3}, Λ ⊏ Λ3.
/// All n ∈ Λ are checked when `site` is empty.
inline CheckReport edi_check(const Region& box, const Region& ambient, const FieldSample& field,
                             std::size_t eigen_index, std::optional<Site> site = std::nullopt,
                             double rel_tol = 1e-9) {
    if (!strictly_inside(box, ambient)) throw PreconditionError("edi_check: Λ is not strictly inside Λ3");
    const auto big = local_block(field, ambient);
    const auto s = eigensolve(big, true);
    const auto k = static_cast<Eigen::Index>(eigen_index);
    if (k >= s.values.size()) throw std::out_of_range("edi_check: eigen index out of range");
    const double e = s.values(k);
    const Vector psi = s.vectors->col(k);
    const auto g = resolvent(local_block(field, box), e);
    const double gamma = build_gamma(box, ambient).norm();

    const auto out_idx = block_indices(outer_boundary(box), ambient);
    double outside = 0.0;
    for (auto i : out_idx) outside += psi(i) * psi(i);
    outside = std::sqrt(outside);
    const Region bdry = inner_boundary(box);

    CheckReport rep("edi", rel_tol);
    double worst_rel = -std::numeric_limits<double>::infinity();
    std::vector<Site> targets = site ? std::vector<Site>{*site} : box.sites();
    for (const auto& n : targets) {
        if (!box.contains(n)) throw std::invalid_argument("edi_check: site not in Λ");
        const Region single(box.dim(), {n});
        const auto a = static_cast<Eigen::Index>(*ambient.index_of(n));
        const double lhs = std::hypot(psi(a), psi(a + big.half()));
        const double rhs = gamma * restricted_norm(g.inverse, single, bdry, box) * outside;
        rep.record((rhs - lhs) / std::max({lhs, rhs, 1e-300}));
        worst_rel = std::max(worst_rel, lhs / std::max(rhs, 1e-300));
    }
    rep.set("energy", e);
    rep.set("gamma", gamma);
    rep.set("max_lhs_over_rhs", worst_rel);
    return rep;
}

struct DecayPoint {
    Site n;
    Site m;
    int distance = 0;
    double block_norm = 0.0;
    double bound = 0.0;
};

/// (4/δ) e^{-(δ/12d)|n-m|} with δ = min(dist(E,σ), 1).
inline double combes_thomas_bound(double delta, int dim, int distance) {
    return 4.0 / delta * std::exp(-(delta / (12.0 * dim)) * distance);
}

/// Block norms ‖𝔾(n,m)‖_F against the Combes–Thomas bound. All pairs when `pairs` is empty.
inline std::vector<DecayPoint> decay_profile(const GreenFunction& g, std::vector<std::pair<Site, Site>> pairs = {}) {
    const double delta = std::min(g.distance, 1.0);
    const int dim = g.region.dim();
    if (pairs.empty())
        for (const auto& n : g.region)
            for (const auto& m : g.region) pairs.emplace_back(n, m);
    std::vector<DecayPoint> out;
    out.reserve(pairs.size());
    for (auto& [n, m] : pairs) {
        const auto i = g.region.index_of(n);
        const auto j = g.region.index_of(m);
        if (!i || !j) throw std::invalid_argument("decay_profile: site outside the cube");
        const int dist = dist1(n, m);
        const double norm = block_norm(block_element(g.inverse, static_cast<Eigen::Index>(*i), static_cast<Eigen::Index>(*j)));
        out.push_back({n, m, dist, norm, combes_thomas_bound(delta, dim, dist)});
    }
    return out;
}

inline CheckReport combes_thomas_check(const GreenFunction& g, std::vector<std::pair<Site, Site>> pairs = {}) {
    CheckReport rep("combes_thomas", 1e-12);
    for (const auto& p : decay_profile(g, std::move(pairs))) rep.record(p.bound - p.block_norm);
    rep.set("delta", std::min(g.distance, 1.0));
    return rep;
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t points = 0;
};

inline LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
    LinearFit fit;
    fit.points = x.size();
    if (x.size() < 2) return fit;
    const auto mx = mean_stderr(x).mean;
    const auto my = mean_stderr(y).mean;
    CompensatedSum sxy, sxx;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy.add((x[i] - mx) * (y[i] - my));
        sxx.add((x[i] - mx) * (x[i] - mx));
    }
    fit.slope = sxx.value() > 0.0 ? sxy.value() / sxx.value() : 0.0;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

/// Least-squares fit of ln ‖𝔾(n,m)‖ against |n-m| over nonzero block norms.
inline LinearFit decay_rate_fit(const std::vector<DecayPoint>& profile) {
    std::vector<double> x, y;
    for (const auto& p : profile) {
        if (!(p.block_norm > 1e-300)) continue;
        x.push_back(p.distance);
        y.push_back(std::log(p.block_norm));
    }
    return least_squares(x, y);
}

} // namespace rbo
