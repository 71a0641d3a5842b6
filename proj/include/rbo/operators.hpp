#pragma once

#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rbo/disorder.hpp"
#include "rbo/lattice.hpp"

namespace rbo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Restrictions of the negative lattice Laplacian to a finite region.
///   simple:    diagonal 2d (truncated matrix elements)
///   neumann:   diagonal = number of neighbours inside the region
///   dirichlet: diagonal = 2d + number of neighbours outside the region
/// so that H^N <= H_simple <= H^D as quadratic forms.
enum class BoundaryCondition { simple, dirichlet, neumann };

inline const char* to_string(BoundaryCondition bc) {
    switch (bc) {
    case BoundaryCondition::simple: return "simple";
    case BoundaryCondition::dirichlet: return "dirichlet";
    case BoundaryCondition::neumann: return "neumann";
    }
    return "?";
}

struct ScalarOperator {
    enum class Role { laplacian, schrodinger, multiplication };

    Region region;
    Matrix matrix;
    Role role = Role::laplacian;
    BoundaryCondition bc = BoundaryCondition::simple;
};

enum class BlockVariant { plain, beta_reference, bracketing };

inline const char* to_string(BlockVariant v) {
    switch (v) {
    case BlockVariant::plain: return "plain";
    case BlockVariant::beta_reference: return "beta_reference";
    case BlockVariant::bracketing: return "bracketing";
    }
    return "?";
}

/// 2|Λ| x 2|Λ| block matrix; rows [0,|Λ|) are the upper component, [|Λ|,2|Λ|) the lower.
struct BlockOperator {
    Region region;
    Matrix matrix;
    BlockVariant variant = BlockVariant::plain;
    double beta = 0.0; // only meaningful for beta_reference

    Eigen::Index half() const { return static_cast<Eigen::Index>(region.size()); }
};

inline ScalarOperator build_h0(const Region& where, BoundaryCondition bc) {
    const auto n = static_cast<Eigen::Index>(where.size());
    const int d = where.dim();
    Matrix h = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        int inside = 0;
        for (const auto& m : neighbors(where[static_cast<std::size_t>(i)])) {
            if (auto j = where.index_of(m)) {
                h(i, static_cast<Eigen::Index>(*j)) = -1.0;
                ++inside;
            }
        }
        switch (bc) {
        case BoundaryCondition::simple: h(i, i) = 2.0 * d; break;
        case BoundaryCondition::neumann: h(i, i) = inside; break;
        case BoundaryCondition::dirichlet: h(i, i) = 2.0 * d + (2 * d - inside); break;
        }
    }
    return {where, std::move(h), ScalarOperator::Role::laplacian, bc};
}

inline void require_same_region(const Region& a, const Region& b, const char* what) {
    if (!(a == b)) throw std::invalid_argument(std::string(what) + ": field region does not match operator region");
}

/// H_L = H_{0,L} + V.
inline ScalarOperator build_h(const Region& where, BoundaryCondition bc, const FieldSample& field) {
    require_same_region(where, field.region, "build_h");
    auto h = build_h0(where, bc);
    for (std::size_t i = 0; i < where.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        h.matrix(k, k) += field.v[i];
    }
    h.role = ScalarOperator::Role::schrodinger;
    return h;
}

inline ScalarOperator multiplication(const Region& where, const std::vector<double>& values) {
    if (values.size() != where.size()) throw std::invalid_argument("multiplication: size mismatch");
    Vector diag = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    return {where, Matrix(diag.asDiagonal()), ScalarOperator::Role::multiplication, BoundaryCondition::simple};
}

/// (A B; B -D) as a dense matrix.
inline Matrix block_matrix(const Matrix& a, const Matrix& b, const Matrix& d) {
    const auto n = a.rows();
    if (a.cols() != n || b.rows() != n || b.cols() != n || d.rows() != n || d.cols() != n)
        throw std::invalid_argument("block_matrix: blocks must be square of equal size");
    Matrix m(2 * n, 2 * n);
    m.topLeftCorner(n, n) = a;
    m.topRightCorner(n, n) = b;
    m.bottomLeftCorner(n, n) = b;
    m.bottomRightCorner(n, n) = -d;
    return m;
}

/// (H B; B -H) with B the multiplication by the field's pairing values.
inline BlockOperator assemble_block(const ScalarOperator& h, const FieldSample& field) {
    require_same_region(h.region, field.region, "assemble_block");
    const auto b = multiplication(field.region, field.b);
    return {h.region, block_matrix(h.matrix, b.matrix, h.matrix), BlockVariant::plain, 0.0};
}

/// Plain block operator with simple boundary conditions.
inline BlockOperator assemble_block(const FieldSample& field) {
    return assemble_block(build_h(field.region, BoundaryCondition::simple, field), field);
}

/// (H beta·1; beta·1 -H).
inline BlockOperator assemble_beta_reference(const ScalarOperator& h, double beta) {
    const auto n = h.matrix.rows();
    return {h.region, block_matrix(h.matrix, beta * Matrix::Identity(n, n), h.matrix), BlockVariant::beta_reference,
            beta};
}

/// (H^D B; B -H^N).
inline BlockOperator assemble_bracketing(const FieldSample& field) {
    const auto hd = build_h(field.region, BoundaryCondition::dirichlet, field);
    const auto hn = build_h(field.region, BoundaryCondition::neumann, field);
    const auto b = multiplication(field.region, field.b);
    return {field.region, block_matrix(hd.matrix, b.matrix, hn.matrix), BlockVariant::bracketing, 0.0};
}

/// Index map of `sub` sites into `ambient`.
inline std::vector<Eigen::Index> embedding(const Region& sub, const Region& ambient) {
    std::vector<Eigen::Index> idx;
    idx.reserve(sub.size());
    for (const auto& s : sub) {
        auto i = ambient.index_of(s);
        if (!i) throw std::invalid_argument("embedding: site " + to_string(s) + " not in ambient region");
        idx.push_back(static_cast<Eigen::Index>(*i));
    }
    return idx;
}

/// Block matrix on ℓ²(sub)⊕ℓ²(sub) placed into ℓ²(ambient)⊕ℓ²(ambient), zero elsewhere.
inline Matrix embed_block(const Matrix& m, const Region& sub, const Region& ambient) {
    const auto idx = embedding(sub, ambient);
    const auto ns = static_cast<Eigen::Index>(sub.size());
    const auto na = static_cast<Eigen::Index>(ambient.size());
    Matrix out = Matrix::Zero(2 * na, 2 * na);
    for (Eigen::Index bi = 0; bi < 2; ++bi)
        for (Eigen::Index bj = 0; bj < 2; ++bj)
            for (Eigen::Index i = 0; i < ns; ++i)
                for (Eigen::Index j = 0; j < ns; ++j)
                    out(bi * na + idx[i], bj * na + idx[j]) = m(bi * ns + i, bj * ns + j);
    return out;
}

/// Γ_{Λ1} on ℓ²(Λ2) and its lift 𝚪 = Γ ⊕ (-Γ).
struct BoundaryOperator {
    Region ambient;
    Region inner;
    Matrix gamma;

    Matrix lifted() const {
        const auto n = gamma.rows();
        Matrix m = Matrix::Zero(2 * n, 2 * n);
        m.topLeftCorner(n, n) = gamma;
        m.bottomRightCorner(n, n) = -gamma;
        return m;
    }

    /// Operator norm ‖𝚪‖ (= ‖Γ‖).
    double norm() const {
        if (gamma.rows() == 0) return 0.0;
        Eigen::SelfAdjointEigenSolver<Matrix> es(gamma, Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }
};

inline BoundaryOperator build_gamma(const Region& inner, const Region& ambient) {
    if (!strictly_inside(inner, ambient))
        throw std::invalid_argument("build_gamma: inner region is not strictly inside the ambient region");
    const auto n = static_cast<Eigen::Index>(ambient.size());
    Matrix g = Matrix::Zero(n, n);
    for (const auto& e : boundary(inner)) {
        const auto i = static_cast<Eigen::Index>(*ambient.index_of(e.from));
        const auto j = static_cast<Eigen::Index>(*ambient.index_of(e.to));
        g(i, j) = -1.0;
    }
    return {ambient, inner, std::move(g)};
}

/// max |entry| of Ĥ_{Λ3} - (Ĥ_{Λ2} ⊕ Ĥ_{Λ3∖Λ2}) - 𝚪_{Λ2}, all with simple boundary conditions.
inline double decomposition_residual(const FieldSample& field, const Region& middle) {
    const Region& outer = field.region;
    const Region rest = difference(outer, middle);
    Matrix r = assemble_block(field).matrix;
    r -= embed_block(assemble_block(restrict_field(field, middle)).matrix, middle, outer);
    if (rest.size()) r -= embed_block(assemble_block(restrict_field(field, rest)).matrix, rest, outer);
    r -= build_gamma(middle, outer).lifted();
    return r.cwiseAbs().maxCoeff();
}

/// Diagonal of the projection 1_Λ on ℓ²(ambient).
inline Vector indicator(const Region& subset, const Region& ambient) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(ambient.size()));
    for (auto i : embedding(subset, ambient)) v(i) = 1.0;
    return v;
}

/// Diagonal of 𝟙_Λ = 1_Λ ⊕ 1_Λ on ℓ²(ambient)⊕ℓ²(ambient).
inline Vector lifted_indicator(const Region& subset, const Region& ambient) {
    const Vector v = indicator(subset, ambient);
    Vector out(2 * v.size());
    out << v, v;
    return out;
}

/// Block indices (upper and lower component) of `subset` inside `ambient`.
inline std::vector<Eigen::Index> block_indices(const Region& subset, const Region& ambient) {
    const auto base = embedding(subset, ambient);
    const auto n = static_cast<Eigen::Index>(ambient.size());
    std::vector<Eigen::Index> out(base.begin(), base.end());
    for (auto i : base) out.push_back(i + n);
    return out;
}

/// Text dump: one row per line, space separated, rows in canonical site order.
inline void dump_matrix(std::ostream& os, const Matrix& m) {
    char buf[32];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            if (j) os << ' ';
            os << buf;
        }
        os << '\n';
    }
}

} // namespace rbo
