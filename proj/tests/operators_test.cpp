#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "rbo/operators.hpp"
#include "rbo/spectral.hpp"
#include "support/generators.hpp"

using namespace rbo;

namespace {

Region interval(int l) { return region(CubeSpec(1, l)); }

Vector sorted_eigs(const Matrix& m) { return eigensolve(m).values; }

} // namespace

TEST(BuildH0, SimpleTridiagonal) {
    const auto h = build_h0(interval(3), BoundaryCondition::simple);
    Matrix expect(3, 3);
    expect << 2, -1, 0, -1, 2, -1, 0, -1, 2;
    EXPECT_EQ(h.matrix, expect);
    const Vector e = sorted_eigs(h.matrix);
    EXPECT_NEAR(e(0), 2 - std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(e(1), 2.0, 1e-14);
    EXPECT_NEAR(e(2), 2 + std::sqrt(2.0), 1e-14);
}

TEST(BuildH0, Neumann) {
    const auto h = build_h0(interval(3), BoundaryCondition::neumann);
    EXPECT_EQ(h.matrix.diagonal(), Vector::Map(std::vector<double>{1, 2, 1}.data(), 3));
    EXPECT_NEAR(sorted_eigs(h.matrix)(0), 0.0, 1e-14);
    EXPECT_NEAR((h.matrix * Vector::Ones(3)).norm(), 0.0, 0.0);
}

TEST(BuildH0, Dirichlet) {
    const auto h = build_h0(interval(3), BoundaryCondition::dirichlet);
    EXPECT_EQ(h.matrix.diagonal(), Vector::Map(std::vector<double>{3, 2, 3}.data(), 3));
}

TEST(BuildH0, OffDiagonalsExactlyNeighbours) {
    for (auto bc : {BoundaryCondition::simple, BoundaryCondition::dirichlet, BoundaryCondition::neumann}) {
        const Region r = region(CubeSpec(2, 4));
        const auto h = build_h0(r, bc);
        EXPECT_EQ(h.matrix, h.matrix.transpose());
        for (std::size_t i = 0; i < r.size(); ++i)
            for (std::size_t j = 0; j < r.size(); ++j)
                if (i != j) EXPECT_EQ(h.matrix(i, j), dist1(r[i], r[j]) == 1 ? -1.0 : 0.0);
    }
}

TEST(BuildH, DiagonalShift) {
    const Region one = interval(1);
    EXPECT_EQ(build_h(one, BoundaryCondition::simple, constant_field(one, 1, 0)).matrix(0, 0), 3.0);
    const Region r = interval(5);
    EXPECT_EQ(build_h(r, BoundaryCondition::simple, constant_field(r, 0, 0)).matrix,
              build_h0(r, BoundaryCondition::simple).matrix);
}

TEST(BuildH, PositiveForNonnegativePotential) {
    gen::Engine g(3);
    for (int trial = 0; trial < 50; ++trial) {
        const Region r = region(CubeSpec(gen::integer(g, 1, 2), gen::integer(g, 2, 8)));
        const auto f = gen::field(g, r, 0, 1, 0, 0);
        EXPECT_GT(sorted_eigs(build_h(r, BoundaryCondition::simple, f).matrix)(0), 0.0);
    }
}

TEST(AssembleBlock, TwoByTwo) {
    const Region one = interval(1);
    const auto op = assemble_block(constant_field(one, 1, 2));
    Matrix expect(2, 2);
    expect << 3, 2, 2, -3;
    EXPECT_EQ(op.matrix, expect);
    const auto s = sorted_eigs(op.matrix);
    EXPECT_NEAR(s(0), -std::sqrt(13.0), 1e-14);
    EXPECT_NEAR(s(1), std::sqrt(13.0), 1e-14);
}

TEST(AssembleBlock, LayoutInvariants) {
    gen::Engine g(4);
    const Region r = region(CubeSpec(2, 4));
    const auto f = gen::field(g, r, -1, 1, -1, 1);
    const auto h = build_h(r, BoundaryCondition::simple, f);
    const auto op = assemble_block(h, f);
    const auto n = static_cast<Eigen::Index>(r.size());
    EXPECT_EQ(op.matrix.topLeftCorner(n, n), h.matrix);
    EXPECT_EQ(op.matrix.bottomRightCorner(n, n), -h.matrix);
    EXPECT_EQ(op.matrix.topRightCorner(n, n), op.matrix.bottomLeftCorner(n, n));
    Matrix b = op.matrix.topRightCorner(n, n);
    EXPECT_EQ(Matrix(b.diagonal().asDiagonal()), b);
    for (Eigen::Index i = 0; i < n; ++i) EXPECT_EQ(b(i, i), f.b[static_cast<std::size_t>(i)]);
    EXPECT_EQ(op.matrix, op.matrix.transpose());
}

TEST(AssembleBetaReference, ZeroBetaIsBlockDiagonal) {
    gen::Engine g(5);
    const Region r = interval(6);
    const auto h = build_h(r, BoundaryCondition::simple, gen::field(g, r, 0, 1, 0, 0));
    const auto op = assemble_beta_reference(h, 0.0);
    const auto n = h.matrix.rows();
    EXPECT_TRUE(op.matrix.topRightCorner(n, n).isZero(0));
    std::vector<double> both;
    const Vector e = sorted_eigs(h.matrix);
    for (double x : e) {
        both.push_back(x);
        both.push_back(-x);
    }
    std::sort(both.begin(), both.end());
    const Vector s = sorted_eigs(op.matrix);
    for (Eigen::Index i = 0; i < 2 * n; ++i) EXPECT_NEAR(s(i), both[static_cast<std::size_t>(i)], 1e-12);
}

TEST(AssembleBracketing, FreeCaseMatchesDirichletAndNeumann) {
    const Region r = interval(3);
    const auto op = assemble_bracketing(constant_field(r, 0, 0));
    std::vector<double> expect;
    for (double x : sorted_eigs(build_h0(r, BoundaryCondition::dirichlet).matrix)) expect.push_back(x);
    for (double x : sorted_eigs(build_h0(r, BoundaryCondition::neumann).matrix)) expect.push_back(-x);
    std::sort(expect.begin(), expect.end());
    const Vector s = sorted_eigs(op.matrix);
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(s(i), expect[static_cast<std::size_t>(i)], 1e-12);
}

TEST(BuildGamma, StarGraph) {
    const Region inner(1, {Site{{0}}});
    const Region ambient = interval(3);
    const auto g = build_gamma(inner, ambient);
    Matrix expect(3, 3);
    expect << 0, -1, 0, -1, 0, -1, 0, -1, 0;
    EXPECT_EQ(g.gamma, expect);
    EXPECT_NEAR(g.norm(), std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(eigensolve(g.lifted()).norm(), g.norm(), 1e-14);
}

TEST(BuildGamma, RequiresStrictInclusion) {
    EXPECT_THROW(build_gamma(interval(3), interval(3)), std::invalid_argument);
}

TEST(BuildGamma, EntriesAreBoundaryEdges) {
    gen::Engine g(6);
    for (int trial = 0; trial < 30; ++trial) {
        const auto t = gen::nested_cubes(g, gen::integer(g, 1, 2), 9);
        const auto gm = build_gamma(t.middle, t.outer);
        const auto edges = boundary(t.middle);
        for (std::size_t i = 0; i < t.outer.size(); ++i)
            for (std::size_t j = 0; j < t.outer.size(); ++j) {
                const bool edge = std::binary_search(edges.begin(), edges.end(), Edge{t.outer[i], t.outer[j]});
                EXPECT_EQ(gm.gamma(i, j), edge ? -1.0 : 0.0);
            }
        EXPECT_EQ(gm.lifted(), gm.lifted().transpose());
    }
}

TEST(Decomposition, ExactOnRandomTriples) {
    gen::Engine g(7);
    for (int trial = 0; trial < 60; ++trial) {
        const int d = gen::integer(g, 1, 2);
        const auto t = gen::nested_cubes(g, d, d == 1 ? 15 : 8);
        const auto f = gen::field(g, t.outer, -3, 3, -2, 2);
        EXPECT_LE(decomposition_residual(f, t.middle), 1e-14);
        EXPECT_LE(decomposition_residual(restrict_field(f, t.middle), t.inner), 1e-14);
    }
}

TEST(Gamma, SandwichIdentity) {
    // 𝚪 𝟙_{Λ2} = 𝟙_{∂ᵒΛ2} 𝚪 𝟙_{∂ⁱΛ2}
    gen::Engine g(8);
    for (int trial = 0; trial < 30; ++trial) {
        const auto t = gen::nested_cubes(g, gen::integer(g, 1, 2), 9);
        const Matrix gm = build_gamma(t.middle, t.outer).lifted();
        const Matrix lhs = gm * lifted_indicator(t.middle, t.outer).asDiagonal();
        const Matrix rhs = lifted_indicator(outer_boundary(t.middle), t.outer).asDiagonal() * gm *
                           lifted_indicator(inner_boundary(t.middle), t.outer).asDiagonal();
        EXPECT_EQ(lhs, rhs);
    }
}

TEST(Indicator, Projections) {
    const Region amb = region(CubeSpec(2, 4));
    const Region sub = region(CubeSpec(2, 2));
    const Matrix p = lifted_indicator(sub, amb).asDiagonal();
    EXPECT_EQ(p * p, p);
    EXPECT_EQ(Matrix(lifted_indicator(amb, amb).asDiagonal()), Matrix::Identity(18, 18));
    const Matrix pn = lifted_indicator(Region(2, {amb[0]}), amb).asDiagonal();
    const Matrix pm = lifted_indicator(Region(2, {amb[1]}), amb).asDiagonal();
    EXPECT_TRUE((pn * pm).isZero(0));
}

TEST(Bracketing, QuadraticForms) {
    gen::Engine g(9);
    for (int d = 1; d <= 2; ++d)
        for (int l = 2; l <= 10; l += 2) {
            const Region r = region(CubeSpec(d, l));
            const auto hn = build_h0(r, BoundaryCondition::neumann).matrix;
            const auto hs = build_h0(r, BoundaryCondition::simple).matrix;
            const auto hd = build_h0(r, BoundaryCondition::dirichlet).matrix;
            for (int k = 0; k < 200 / 10; ++k) {
                Vector v(static_cast<Eigen::Index>(r.size()));
                for (auto& x : v) x = gen::uniform(g, -1, 1);
                EXPECT_LE(v.dot(hn * v), v.dot(hs * v) + 1e-12);
                EXPECT_LE(v.dot(hs * v), v.dot(hd * v) + 1e-12);
            }
        }
}

TEST(DumpMatrix, RowsAndRoundTrip) {
    Matrix m(2, 2);
    m << 0.1, -2, 1.0 / 3.0, 4;
    std::ostringstream os;
    dump_matrix(os, m);
    std::istringstream in(os.str());
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double x;
            in >> x;
            EXPECT_EQ(x, m(i, j));
        }
    const std::string text = os.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
}
