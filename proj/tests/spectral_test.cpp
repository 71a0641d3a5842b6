#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "rbo/spectral.hpp"
#include "support/generators.hpp"

using namespace rbo;

namespace {

Spectrum two_by_two() {
    Matrix m(2, 2);
    m << 3, 2, 2, -3;
    return eigensolve(m);
}

DisorderConfig uniform_both(double v_lo, double v_hi, double b_lo, double b_hi, std::uint64_t seed = 1) {
    return {SiteMeasure::uniform(v_lo, v_hi), SiteMeasure::uniform(b_lo, b_hi), seed};
}

} // namespace

TEST(Eigensolve, Examples) {
    const auto s = two_by_two();
    EXPECT_NEAR(s.values(0), -std::sqrt(13.0), 1e-14);
    EXPECT_NEAR(s.values(1), std::sqrt(13.0), 1e-14);

    const auto lap = eigensolve(build_h0(region(CubeSpec(1, 3)), BoundaryCondition::simple));
    EXPECT_NEAR(lap.values(0), 2 - std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(lap.values(2), 2 + std::sqrt(2.0), 1e-14);
}

TEST(Eigensolve, RejectsNonFinite) {
    Matrix m = Matrix::Identity(2, 2);
    m(0, 1) = m(1, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(eigensolve(m), std::domain_error);
}

TEST(Eigensolve, VectorsSatisfyEigenEquation) {
    gen::Engine g(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Region r = region(CubeSpec(gen::integer(g, 1, 2), gen::integer(g, 2, 7)));
        const auto op = assemble_block(gen::field(g, r, -2, 2, -2, 2));
        const auto s = eigensolve(op, true);
        ASSERT_EQ(s.size(), 2 * r.size());
        ASSERT_TRUE(s.vectors.has_value());
        const Matrix& u = *s.vectors;
        const double scale = std::max(s.norm(), 1.0);
        EXPECT_LE((op.matrix * u - u * s.values.asDiagonal()).cwiseAbs().maxCoeff(), 1e-12 * scale);
        EXPECT_LE((u.transpose() * u - Matrix::Identity(u.cols(), u.cols()))
                      .cwiseAbs()
                      .maxCoeff(),
                  1e-12);
    }
}

TEST(Counting, Examples) {
    const auto s = two_by_two();
    EXPECT_EQ(counting(s, 0.0), 0.5);
    EXPECT_EQ(counting(s, 100.0), 1.0);
    EXPECT_EQ(counting(s, -100.0), 0.0);
    EXPECT_EQ(counting(s, s.values(0)), 0.5); // closed at the right end
    EXPECT_EQ(counting(s, std::nextafter(s.values(0), -1e9)), 0.0);
}

TEST(Counting, MonotoneAndBounded) {
    gen::Engine g(12);
    for (int trial = 0; trial < 30; ++trial) {
        const Region r = region(CubeSpec(1, gen::integer(g, 2, 20)));
        const auto s = eigensolve(assemble_block(gen::field(g, r, -1, 3, -1, 1)));
        double prev = 0.0;
        for (double e = -10; e <= 10; e += 0.05) {
            const double c = counting(s, e);
            EXPECT_GE(c, prev);
            EXPECT_LE(c, 1.0);
            prev = c;
        }
    }
}

TEST(Spectrum, BlockWithoutPairingIsSymmetricUnion) {
    gen::Engine g(13);
    const Region r = region(CubeSpec(1, 8));
    const auto f = gen::field(g, r, 0, 2, 0, 0);
    const auto s = eigensolve(assemble_block(f));
    const auto h = eigensolve(build_h(r, BoundaryCondition::simple, f));
    for (Eigen::Index i = 0; i < h.values.size(); ++i) {
        EXPECT_NEAR(s.values(h.values.size() + i), h.values(i), 1e-12);
        EXPECT_NEAR(s.values(h.values.size() - 1 - i), -h.values(i), 1e-12);
    }
}

TEST(IdsMonteCarlo, DeterministicFieldHasZeroError) {
    const DisorderConfig cfg{SiteMeasure::point_mass(0.5), SiteMeasure::point_mass(0.25), 3};
    const Region r = region(CubeSpec(1, 9));
    const std::vector<double> grid{-3, -1, 0, 1, 3};
    const auto est = ids_monte_carlo(cfg, r, grid, 6);
    const auto s = eigensolve(assemble_block(constant_field(r, 0.5, 0.25)));
    for (std::size_t k = 0; k < grid.size(); ++k) {
        EXPECT_EQ(est.std_error[k], 0.0);
        EXPECT_DOUBLE_EQ(est.mean[k], counting(s, grid[k]));
    }
}

TEST(IdsMonteCarlo, SingleRealization) {
    const auto cfg = uniform_both(0, 1, 0, 1, 7);
    const Region r = region(CubeSpec(1, 12));
    const std::vector<double> grid{-2, 0.5, 2.5};
    const auto est = ids_monte_carlo(cfg, r, grid, 1);
    const auto s = realization_spectrum(cfg, r, 0);
    for (std::size_t k = 0; k < grid.size(); ++k) EXPECT_EQ(est.mean[k], counting(s, grid[k]));
}

TEST(IdsMonteCarlo, HalfAtZeroForNonnegativeDisorder) {
    const auto cfg = uniform_both(0, 1, 0, 1, 8);
    const std::vector<double> grid{0.0};
    const auto est = ids_monte_carlo(cfg, region(CubeSpec(1, 50)), grid, 40);
    EXPECT_EQ(est.mean[0], 0.5);
    EXPECT_EQ(est.std_error[0], 0.0);
}

TEST(IdsMonteCarlo, MeanMonotoneInUnitInterval) {
    const auto cfg = uniform_both(-1, 1, 0, 1, 9);
    std::vector<double> grid;
    for (double e = -8; e <= 8; e += 0.25) grid.push_back(e);
    const auto est = ids_monte_carlo(cfg, region(CubeSpec(2, 5)), grid, 10);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        EXPECT_GE(est.mean[k], 0.0);
        EXPECT_LE(est.mean[k], 1.0);
        if (k) EXPECT_GE(est.mean[k], est.mean[k - 1]);
    }
}

TEST(IdsMonteCarlo, WorkerCountDoesNotChangeResult) {
    const auto cfg = uniform_both(0, 2, -1, 1, 10);
    const std::vector<double> grid{-1, 0.3, 1.7};
    const Region r = region(CubeSpec(1, 16));
    const auto a = ids_monte_carlo(cfg, r, grid, 33, 1);
    const auto b = ids_monte_carlo(cfg, r, grid, 33, 4);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std_error, b.std_error);
}

TEST(IdsMonteCarlo, SelfAveraging) {
    // variance of the counting function shrinks with L, with 3σ slack on the estimated variances
    const auto cfg = uniform_both(0, 1, 0, 1, 14);
    const std::vector<double> grid{2.0};
    const std::size_t reps = 200;
    std::vector<double> var, var_err;
    for (int l : {20, 40, 80}) {
        const auto est = ids_monte_carlo(cfg, region(CubeSpec(1, l)), grid, reps);
        var.push_back(est.variance[0]);
        // standard error of a sample variance, Gaussian approximation
        var_err.push_back(est.variance[0] * std::sqrt(2.0 / static_cast<double>(reps - 1)));
    }
    for (std::size_t i = 1; i < var.size(); ++i) {
        EXPECT_LE(var[i], var[i - 1] + 3 * std::hypot(var_err[i], var_err[i - 1]));
    }
    EXPECT_LT(var.back(), var.front());
}

TEST(DosHistogram, OutsideSpectrumIsZero) {
    const auto cfg = uniform_both(0, 1, 0, 1, 15);
    const Region r = region(CubeSpec(1, 10));
    const double radius = finite_volume_radius(1, cfg);
    const auto h = dos_histogram(cfg, r, {radius + 0.1, radius + 5, 10}, 5);
    for (double d : h.density) EXPECT_EQ(d, 0.0);
}

TEST(DosHistogram, IntegratesToOne) {
    const auto cfg = uniform_both(0, 1, 0, 1, 16);
    const Region r = region(CubeSpec(1, 10));
    const double radius = finite_volume_radius(1, cfg) + 0.5;
    const auto h = dos_histogram(cfg, r, {-radius, radius, 37}, 8);
    EXPECT_NEAR(h.integral(), 1.0, 1e-12);
    for (double d : h.density) EXPECT_GE(d, 0.0);
}

TEST(DosHistogram, BelowWegnerBoundForUniform) {
    const auto cfg = uniform_both(0, 1, 0, 1, 17);
    const auto h = dos_histogram(cfg, region(CubeSpec(1, 40)), {-6, 6, 48}, 40);
    for (std::size_t k = 0; k < h.density.size(); ++k) EXPECT_LE(h.density[k], 8.0 + 3 * h.std_error[k]);
}

TEST(DosHistogram, RejectsEmptyBins) {
    const auto cfg = uniform_both(0, 1, 0, 1);
    EXPECT_THROW(dos_histogram(cfg, region(CubeSpec(1, 3)), {1, 1, 4}, 1), std::invalid_argument);
    EXPECT_THROW(dos_histogram(cfg, region(CubeSpec(1, 3)), {0, 1, 0}, 1), std::invalid_argument);
}

TEST(SpectralGap, Examples) {
    const auto g = spectral_gap(two_by_two());
    EXPECT_NEAR(g.below, -std::sqrt(13.0), 1e-14);
    EXPECT_NEAR(g.above, std::sqrt(13.0), 1e-14);
}

TEST(SpectralGap, PotentialOpensGap) {
    const Region r = region(CubeSpec(1, 30));
    for (std::uint64_t k = 0; k < 10; ++k) {
        const auto s = realization_spectrum({SiteMeasure::uniform(1, 2), SiteMeasure::point_mass(0), 18}, r, k);
        EXPECT_GE(s.values.cwiseAbs().minCoeff(), 1.0);
        const auto t = realization_spectrum(uniform_both(1, 2, 1, 2, 19), r, k);
        EXPECT_GE(t.values.cwiseAbs().minCoeff(), std::sqrt(2.0) - 1e-12);
    }
}

TEST(StructuralChecks, HoldOnRandomRealizations) {
    gen::Engine g(20);
    for (int trial = 0; trial < 25; ++trial) {
        const int d = gen::integer(g, 1, 2);
        const auto cfg = uniform_both(gen::uniform(g, -2, 0), gen::uniform(g, 0.1, 2), gen::uniform(g, -1, 0),
                                      gen::uniform(g, 0.1, 1), static_cast<std::uint64_t>(trial));
        const auto s = realization_spectrum(cfg, region(CubeSpec(d, gen::integer(g, 3, 9))), 0);
        EXPECT_TRUE(symmetry_check(s).ok());
        EXPECT_TRUE(nondegeneracy_check(s).ok());
        EXPECT_TRUE(radius_check(s, finite_volume_radius(d, cfg)).ok());
    }
}

TEST(StructuralChecks, DetectBrokenSpectra) {
    Spectrum s;
    s.values = Vector::LinSpaced(4, 0.0, 3.0);
    EXPECT_FALSE(symmetry_check(s).ok());
    EXPECT_FALSE(radius_check(s, 2.0).ok());
    s.values << -1, 0, 0, 1;
    EXPECT_FALSE(nondegeneracy_check(s).ok());
}
