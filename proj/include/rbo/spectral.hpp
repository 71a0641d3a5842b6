#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rbo/disorder.hpp"
#include "rbo/ensemble.hpp"
#include "rbo/operators.hpp"
#include "rbo/report.hpp"

namespace rbo {

/// Sorted eigenvalues (with multiplicity) and optionally the orthonormal eigenvectors as columns.
struct Spectrum {
    Vector values;
    std::optional<Matrix> vectors;
    std::size_t sites = 0; // |Λ|
    std::uint64_t realization = 0;

    std::size_t size() const { return static_cast<std::size_t>(values.size()); }
    double norm() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }
};

inline Spectrum eigensolve(const Matrix& m, bool want_vectors = false) {
    if (m.rows() != m.cols()) throw std::invalid_argument("eigensolve: matrix is not square");
    if (!m.allFinite()) throw std::domain_error("eigensolve: matrix has non-finite entries");
    Spectrum s;
    if (m.rows() == 0) return s;
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigensolve: no convergence");
    s.values = es.eigenvalues(); // ascending
    if (want_vectors) s.vectors = es.eigenvectors();
    return s;
}

inline Spectrum eigensolve(const BlockOperator& op, bool want_vectors = false) {
    auto s = eigensolve(op.matrix, want_vectors);
    s.sites = op.region.size();
    return s;
}

inline Spectrum eigensolve(const ScalarOperator& op, bool want_vectors = false) {
    auto s = eigensolve(op.matrix, want_vectors);
    s.sites = op.region.size();
    return s;
}

/// Number of eigenvalues in ]-inf, E].
inline std::size_t count_at_most(const Spectrum& s, double energy) {
    const double* b = s.values.data();
    return static_cast<std::size_t>(std::upper_bound(b, b + s.values.size(), energy) - b);
}

/// Number of eigenvalues in [lo, hi[.
inline std::size_t count_in(const Spectrum& s, double lo, double hi) {
    const double* b = s.values.data();
    const double* e = b + s.values.size();
    return static_cast<std::size_t>(std::lower_bound(b, e, hi) - std::lower_bound(b, e, lo));
}

/// Normalized counting function: |σ ∩ ]-inf,E]| / dim. For a block operator
/// dim = 2|Λ|, for a scalar operator dim = |Λ|.
inline double counting(const Spectrum& s, double energy) {
    if (s.values.size() == 0) return 0.0;
    return static_cast<double>(count_at_most(s, energy)) / static_cast<double>(s.values.size());
}

/// Eigenvalues of the plain block operator for one realization.
inline Spectrum realization_spectrum(const DisorderConfig& config, const Region& where, std::uint64_t index,
                                     bool want_vectors = false) {
    auto s = eigensolve(assemble_block(sample_field(where, config, index)), want_vectors);
    s.realization = index;
    return s;
}

struct IdsEstimate {
    std::vector<double> energies;
    std::vector<double> mean;
    std::vector<double> std_error;
    std::vector<double> variance;
    std::size_t realizations = 0;
    std::size_t sites = 0;
};

inline IdsEstimate aggregate_counting(std::span<const double> energies, const std::vector<std::vector<double>>& per_real,
                                      std::size_t sites) {
    IdsEstimate est;
    est.energies.assign(energies.begin(), energies.end());
    est.realizations = per_real.size();
    est.sites = sites;
    std::vector<double> column(per_real.size());
    for (std::size_t k = 0; k < energies.size(); ++k) {
        for (std::size_t r = 0; r < per_real.size(); ++r) column[r] = per_real[r][k];
        const auto ms = mean_stderr(column);
        est.mean.push_back(ms.mean);
        est.std_error.push_back(ms.std_error);
        est.variance.push_back(ms.variance);
    }
    return est;
}

/// Monte Carlo estimate of E[𝔑_{Ĥ_L}(E)] on an energy grid.
inline IdsEstimate ids_monte_carlo(const DisorderConfig& config, const Region& where, std::span<const double> energies,
                                   std::size_t realizations, unsigned workers = 1) {
    auto per_real = map_realizations(realizations, workers, [&](std::size_t r) {
        const auto s = realization_spectrum(config, where, r);
        std::vector<double> row;
        row.reserve(energies.size());
        for (double e : energies) row.push_back(counting(s, e));
        return row;
    });
    return aggregate_counting(energies, per_real, where.size());
}

struct BinSpec {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t bins = 1;

    double width() const { return (hi - lo) / static_cast<double>(bins); }
    double edge(std::size_t k) const { return lo + width() * static_cast<double>(k); }
    double center(std::size_t k) const { return lo + width() * (static_cast<double>(k) + 0.5); }
};

/// Histogram estimate of the density of states d𝔑/dE.
struct DosHistogram {
    BinSpec bins;
    std::vector<double> density;
    std::vector<double> std_error;
    std::size_t realizations = 0;
    std::size_t sites = 0;

    double integral() const {
        CompensatedSum s;
        for (double d : density) s.add(d * bins.width());
        return s.value();
    }
    double max_density() const { return density.empty() ? 0.0 : *std::max_element(density.begin(), density.end()); }
};

/// Bin k covers [edge(k), edge(k+1)[.
inline std::vector<double> bin_counts(const Spectrum& s, const BinSpec& bins) {
    std::vector<double> c(bins.bins, 0.0);
    for (std::size_t k = 0; k < bins.bins; ++k) c[k] = static_cast<double>(count_in(s, bins.edge(k), bins.edge(k + 1)));
    return c;
}

inline DosHistogram histogram_from_counts(const BinSpec& bins, const std::vector<std::vector<double>>& counts,
                                          std::size_t sites) {
    DosHistogram h{bins, {}, {}, counts.size(), sites};
    const double scale = 1.0 / (2.0 * static_cast<double>(sites) * bins.width());
    std::vector<double> column(counts.size());
    for (std::size_t k = 0; k < bins.bins; ++k) {
        for (std::size_t r = 0; r < counts.size(); ++r) column[r] = counts[r][k];
        const auto ms = mean_stderr(column);
        h.density.push_back(ms.mean * scale);
        h.std_error.push_back(ms.std_error * scale);
    }
    return h;
}

inline DosHistogram dos_histogram(const DisorderConfig& config, const Region& where, const BinSpec& bins,
                                  std::size_t realizations, unsigned workers = 1) {
    if (!(bins.hi > bins.lo) || bins.bins == 0) throw std::invalid_argument("dos_histogram: bin width must be positive");
    auto counts = map_realizations(realizations, workers,
                                   [&](std::size_t r) { return bin_counts(realization_spectrum(config, where, r), bins); });
    return histogram_from_counts(bins, counts, where.size());
}

/// (largest eigenvalue <= 0, smallest eigenvalue >= 0); infinities when a side is empty.
struct SpectralGap {
    double below = -std::numeric_limits<double>::infinity();
    double above = std::numeric_limits<double>::infinity();

    double half_width() const { return std::min(-below, above); }
};

inline SpectralGap spectral_gap(const Spectrum& s) {
    SpectralGap g;
    for (Eigen::Index i = 0; i < s.values.size(); ++i) {
        const double e = s.values(i);
        if (e <= 0.0) g.below = std::max(g.below, e);
        if (e >= 0.0) g.above = std::min(g.above, e);
    }
    return g;
}

/// max_j |E_j + E_{2N+1-j}|.
inline double symmetry_residual(const Spectrum& s) {
    double r = 0.0;
    const auto n = s.values.size();
    for (Eigen::Index j = 0; j < n; ++j) r = std::max(r, std::abs(s.values(j) + s.values(n - 1 - j)));
    return r;
}

inline double min_spacing(const Spectrum& s) {
    double m = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 1; j < s.values.size(); ++j) m = std::min(m, s.values(j) - s.values(j - 1));
    return m;
}

inline CheckReport symmetry_check(const Spectrum& s, double rel_tol = 1e-9) {
    CheckReport r("spectrum_symmetry");
    r.record(rel_tol * std::max(s.norm(), 1.0) - symmetry_residual(s));
    return r;
}

inline CheckReport nondegeneracy_check(const Spectrum& s, double min_gap = 1e-12) {
    CheckReport r("nondegeneracy");
    r.record(min_spacing(s) - min_gap);
    return r;
}

/// Deterministic finite-volume radius 4d + max|supp μ_V| + max|supp μ_B|.
inline double finite_volume_radius(int dim, const DisorderConfig& config) {
    return 4.0 * dim + config.mu_v.max_abs_support() + config.mu_b.max_abs_support();
}

inline CheckReport radius_check(const Spectrum& s, double radius) {
    CheckReport r("spectral_radius", 1e-12 * std::max(radius, 1.0));
    r.record(radius - s.norm());
    return r;
}

} // namespace rbo
