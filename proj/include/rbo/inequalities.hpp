#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rbo/disorder.hpp"
#include "rbo/ensemble.hpp"
#include "rbo/operators.hpp"
#include "rbo/report.hpp"
#include "rbo/spectral.hpp"

namespace rbo {

namespace detail {

inline std::optional<std::string> wegner2_hypotheses(const DisorderConfig& c) {
    if (!c.mu_v.has_density()) return "Wegner II requires an absolutely continuous mu_V with BV density";
    if (!c.mu_b.has_density()) return "Wegner II requires an absolutely continuous mu_B with BV density";
    if (c.mu_v.support_inf() < 0.0) return "Wegner II requires inf supp mu_V >= 0";
    if (c.mu_b.support_inf() < 0.0) return "Wegner II requires inf supp mu_B >= 0";
    return std::nullopt;
}

/// Sign hypothesis tying the realized pairing field to beta: beta == 0 admits
/// any B, otherwise B must lie on beta's side of it sitewise.
inline std::optional<std::string> pairing_hypothesis(const FieldSample& f, double beta) {
    for (double b : f.b) {
        if (beta > 0.0 && b < beta) return "pairing field dips below beta > 0";
        if (beta < 0.0 && b > beta) return "pairing field exceeds beta < 0";
    }
    return std::nullopt;
}

inline double min_eigenvalue(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

} // namespace detail

/// Wegner II hypotheses, or nullopt when they hold.
inline std::optional<std::string> wegner2_diagnostic(const DisorderConfig& c) { return detail::wegner2_hypotheses(c); }

/// Upper bound 2(‖φ_V‖_BV + ‖φ_B‖_BV) on the density of states.
inline double wegner2_dos_bound(const DisorderConfig& c) { return 2.0 * (c.mu_v.bv_norm() + c.mu_b.bv_norm()); }

/// Finite-volume Wegner estimate E tr 1_{[E-ε,E+ε[}(Ĥ_L) <= 8ε|Λ|(‖φ_V‖_BV + ‖φ_B‖_BV), with 3σ slack,
/// over precomputed spectra of one ensemble.
inline CheckReport wegner_from_spectra(const DisorderConfig& config, std::span<const Spectrum> spectra, std::size_t sites,
                                       double energy, double eps) {
    const std::string name = "wegner_finite_volume";
    if (auto why = detail::wegner2_hypotheses(config)) return CheckReport::unmet(name, *why);
    if (!(energy > 0.0)) return CheckReport::unmet(name, "Wegner window requires E > 0");
    if (!(eps > 0.0 && 3.0 * eps < energy)) return CheckReport::unmet(name, "Wegner window requires 0 < 3 eps < E");

    std::vector<double> counts;
    counts.reserve(spectra.size());
    for (const auto& s : spectra) counts.push_back(static_cast<double>(count_in(s, energy - eps, energy + eps)));
    const auto ms = mean_stderr(counts);
    const double bound = 8.0 * eps * static_cast<double>(sites) * (config.mu_v.bv_norm() + config.mu_b.bv_norm());

    CheckReport rep(name);
    rep.record(bound - (ms.mean - 3.0 * ms.std_error));
    rep.set("energy", energy);
    rep.set("eps", eps);
    rep.set("mean", ms.mean);
    rep.set("std_error", ms.std_error);
    rep.set("bound", bound);
    rep.set("realizations", static_cast<double>(spectra.size()));
    return rep;
}

inline CheckReport wegner_finite_volume(const DisorderConfig& config, const Region& where, double energy, double eps,
                                        std::size_t realizations, unsigned workers = 1) {
    if (auto why = detail::wegner2_hypotheses(config)) return CheckReport::unmet("wegner_finite_volume", *why);
    const auto spectra =
        map_realizations(realizations, workers, [&](std::size_t r) { return realization_spectrum(config, where, r); });
    return wegner_from_spectra(config, spectra, where.size(), energy, eps);
}

/// Energy-dependent bound 2(|E|+1)/λ ‖φ_V‖_BV (or with β, φ_B); the smaller
/// of the two when both hypotheses hold. nullopt when neither holds.
inline std::optional<double> wegner1_bound(const DisorderConfig& c, double energy) {
    std::optional<double> best;
    const double lam = c.mu_v.support_inf();
    if (lam > 0.0 && c.mu_v.has_density()) best = 2.0 * (std::abs(energy) + 1.0) / lam * c.mu_v.bv_norm();
    const double beta = c.mu_b.support_inf();
    if (beta > 0.0 && c.mu_b.has_density()) {
        const double b = 2.0 * (std::abs(energy) + 1.0) / beta * c.mu_b.bv_norm();
        best = best ? std::min(*best, b) : b;
    }
    return best;
}

/// Binwise comparison of a DOS histogram against a bound evaluated at bin centres, 3σ slack.
template <class BoundFn>
CheckReport compare_histogram(std::string name, const DosHistogram& h, BoundFn&& bound) {
    CheckReport rep(std::move(name));
    double worst_ratio = 0.0;
    for (std::size_t k = 0; k < h.density.size(); ++k) {
        const double b = bound(h.bins.center(k));
        rep.record(b - (h.density[k] - 3.0 * h.std_error[k]));
        worst_ratio = std::max(worst_ratio, h.density[k] / b);
    }
    rep.set("max_density", h.max_density());
    rep.set("max_density_over_bound", worst_ratio);
    rep.set("realizations", static_cast<double>(h.realizations));
    return rep;
}

inline CheckReport dos_bound_thm1(const DisorderConfig& config, const Region& where, const BinSpec& bins,
                                  std::size_t realizations, unsigned workers = 1) {
    const std::string name = "dos_bound_energy_dependent";
    if (!wegner1_bound(config, 0.0))
        return CheckReport::unmet(name, "Wegner I requires inf supp mu_V > 0 with a BV density for mu_V, "
                                        "or inf supp mu_B > 0 with a BV density for mu_B");
    const auto h = dos_histogram(config, where, bins, realizations, workers);
    return compare_histogram(name, h, [&](double e) { return *wegner1_bound(config, e); });
}

inline CheckReport dos_bound_uniform(const DisorderConfig& config, const Region& where, const BinSpec& bins,
                                     std::size_t realizations, unsigned workers = 1) {
    const std::string name = "dos_bound_uniform";
    if (auto why = detail::wegner2_hypotheses(config)) return CheckReport::unmet(name, *why);
    const auto h = dos_histogram(config, where, bins, realizations, workers);
    const double b = wegner2_dos_bound(config);
    auto rep = compare_histogram(name, h, [b](double) { return b; });
    rep.set("bound", b);
    return rep;
}

struct FeynmanHellmannSum {
    double energy = 0.0;
    double finite_difference = 0.0;      // step h
    double finite_difference_half = 0.0; // step h/2
    double richardson_error = 0.0;       // |fd - fd_half| * 4/3
    double analytic = 0.0;               // ‖ψ1‖² - ‖ψ2‖² + 2⟨ψ1,ψ2⟩
};

namespace detail {

inline FieldSample shifted(const FieldSample& f, double t) {
    FieldSample g = f;
    for (auto& v : g.v) v += t;
    for (auto& b : g.b) b += t;
    return g;
}

inline double eigenvalue_at(const FieldSample& f, Eigen::Index k) {
    return eigensolve(assemble_block(f)).values(k);
}

} // namespace detail

/// Σ_n (∂/∂V_n + ∂/∂B_n) E_k by central differences along the all-ones direction.
inline FeynmanHellmannSum feynman_hellmann_sum(const FieldSample& field, std::size_t eigen_index, double h = 1e-5) {
    const auto hl = build_h(field.region, BoundaryCondition::simple, field);
    if (detail::min_eigenvalue(hl.matrix) < 0.0) throw PreconditionError("Feynman-Hellmann bound requires H_L >= 0");
    for (double b : field.b)
        if (b < 0.0) throw PreconditionError("Feynman-Hellmann bound requires B >= 0");

    const auto s = eigensolve(assemble_block(hl, field), true);
    const auto k = static_cast<Eigen::Index>(eigen_index);
    if (k >= s.values.size()) throw std::out_of_range("feynman_hellmann_sum: eigen index out of range");
    const double e = s.values(k);
    if (!(e > 0.0)) throw std::domain_error("feynman_hellmann_sum: eigenvalue is not positive");
    double spacing = std::numeric_limits<double>::infinity();
    if (k > 0) spacing = std::min(spacing, e - s.values(k - 1));
    if (k + 1 < s.values.size()) spacing = std::min(spacing, s.values(k + 1) - e);
    if (!(spacing > 10.0 * h)) throw std::domain_error("feynman_hellmann_sum: eigenvalue is not simple at step scale");

    FeynmanHellmannSum out;
    out.energy = e;
    out.finite_difference =
        (detail::eigenvalue_at(detail::shifted(field, h), k) - detail::eigenvalue_at(detail::shifted(field, -h), k)) /
        (2.0 * h);
    out.finite_difference_half = (detail::eigenvalue_at(detail::shifted(field, h / 2), k) -
                                  detail::eigenvalue_at(detail::shifted(field, -h / 2), k)) /
                                 h;
    out.richardson_error = std::abs(out.finite_difference - out.finite_difference_half) * 4.0 / 3.0;

    const auto n = hl.matrix.rows();
    const auto psi = s.vectors->col(k);
    const auto up = psi.head(n);
    const auto lo = psi.tail(n);
    out.analytic = up.squaredNorm() - lo.squaredNorm() + 2.0 * up.dot(lo);
    return out;
}

/// The |Λ| largest eigenvalues, ascending.
inline Vector upper_half(const Spectrum& s) {
    const auto n = s.values.size() / 2;
    return s.values.tail(s.values.size() - n);
}

/// λ_j(Ĥ_L) >= μ_j(Ĥ_L(β)) for the positive eigenvalues, paired by rank.
inline CheckReport interlacing_check(const FieldSample& field, double beta, double tol = 1e-10) {
    const std::string name = "interlacing";
    const auto hl = build_h(field.region, BoundaryCondition::simple, field);
    if (!(detail::min_eigenvalue(hl.matrix) > 0.0)) return CheckReport::unmet(name, "interlacing requires H_L > 0");
    if (auto why = detail::pairing_hypothesis(field, beta)) return CheckReport::unmet(name, *why);

    const auto lam = upper_half(eigensolve(assemble_block(hl, field)));
    const auto mu = upper_half(eigensolve(assemble_beta_reference(hl, beta)));
    CheckReport rep(name, tol);
    for (Eigen::Index j = 0; j < lam.size(); ++j) rep.record(lam(j) - mu(j));
    rep.set("beta", beta);
    return rep;
}

/// σ(Ĥ_L(β)) = {±√(e² + β²) : e ∈ σ(H_L)}.
inline CheckReport beta_map_check(const ScalarOperator& h, double beta, double rel_tol = 1e-9) {
    const auto assembled = eigensolve(assemble_beta_reference(h, beta));
    const auto scalar = eigensolve(h);
    std::vector<double> predicted;
    for (Eigen::Index j = 0; j < scalar.values.size(); ++j) {
        const double r = std::hypot(scalar.values(j), beta);
        predicted.push_back(r);
        predicted.push_back(-r);
    }
    std::sort(predicted.begin(), predicted.end());
    CheckReport rep("beta_map", rel_tol * std::max(1.0, assembled.norm()));
    for (Eigen::Index j = 0; j < assembled.values.size(); ++j)
        rep.record(-std::abs(assembled.values(j) - predicted[static_cast<std::size_t>(j)]));
    rep.set("beta", beta);
    return rep;
}

namespace detail {

inline std::optional<std::string> edge_hypotheses(const FieldSample& f, double lambda, double beta) {
    if (lambda < 0.0) return "edge requires lambda >= 0";
    for (double v : f.v)
        if (v < lambda) return "potential field dips below lambda";
    return pairing_hypothesis(f, beta);
}

} // namespace detail

/// Exactly |Λ| of the 2|Λ| eigenvalues of Ĥ_L and of Ĥ_L(β) lie at or below √(λ² + β²).
inline CheckReport half_half_check(const FieldSample& field, double lambda, double beta) {
    const std::string name = "half_half";
    if (auto why = detail::edge_hypotheses(field, lambda, beta)) return CheckReport::unmet(name, *why);
    const double edge = std::hypot(lambda, beta);
    const auto hl = build_h(field.region, BoundaryCondition::simple, field);
    const auto n = static_cast<double>(field.region.size());
    CheckReport rep(name);
    for (const auto& op : {assemble_block(hl, field), assemble_beta_reference(hl, beta)}) {
        const auto c = static_cast<double>(count_at_most(eigensolve(op), edge));
        rep.record(-std::abs(c - n));
    }
    rep.set("edge", edge);
    return rep;
}

/// Eigenvalues of (A B; B -D) above sup σ(-D), ascending.
inline Vector positive_branch(const Matrix& a, const Matrix& b, const Matrix& d) {
    const double threshold = -detail::min_eigenvalue(d);
    const auto s = eigensolve(block_matrix(a, b, d));
    std::vector<double> keep;
    for (Eigen::Index j = 0; j < s.values.size(); ++j)
        if (s.values(j) > threshold) keep.push_back(s.values(j));
    return Eigen::Map<Vector>(keep.data(), static_cast<Eigen::Index>(keep.size()));
}

struct MinMaxMaxResult {
    double lambda1 = 0.0;
    std::size_t iterations = 0;
    std::size_t starts = 0;
};

namespace detail {

/// Max over unit g of the variational functional for fixed unit f. The maximum
/// over g equals the top eigenvalue of the compression of the block operator
/// to {(s f, g)}, i.e. of [[⟨f,Af⟩, (Bf)^T], [Bf, -D]]; returns it together
/// with the gradient in f of the functional at the maximizing (s, g).
inline std::pair<double, Vector> inner_max(const Matrix& a, const Matrix& b, const Matrix& d, const Vector& f) {
    const auto n = a.rows();
    Matrix m(n + 1, n + 1);
    m(0, 0) = f.dot(a * f);
    const Vector bf = b * f;
    m.block(0, 1, 1, n) = bf.transpose();
    m.block(1, 0, n, 1) = bf;
    m.block(1, 1, n, n) = -d;
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    const double top = es.eigenvalues()(n);
    const Vector u = es.eigenvectors().col(n);
    const double s = u(0);
    const Vector w = u.tail(n);
    Vector grad = 2.0 * s * s * (a * f) + 2.0 * s * (b * w);
    return {top, grad};
}

} // namespace detail

/// λ_1 = min_f max_g Φ(f,g) for the block operator (A B; B -D) with A > -D.
/// Outer minimization over the unit sphere by projected gradient descent with
/// Armijo backtracking from several random starts.
inline MinMaxMaxResult minmaxmax_lambda1(const Matrix& a, const Matrix& b, const Matrix& d, std::size_t budget = 200000,
                                         std::uint64_t seed = 1, std::size_t starts = 8) {
    const auto n = a.rows();
    if (n < 1 || n > 8) throw PreconditionError("minmaxmax_lambda1: block size must be between 1 and 8");
    if (!(detail::min_eigenvalue(a + d) > 0.0)) throw PreconditionError("min-max-max principle requires A > -D");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    MinMaxMaxResult out;
    out.lambda1 = std::numeric_limits<double>::infinity();
    // the gradient floor from rounding sits near 1e-9 * scale, so stop there or on a stall
    const double scale = std::max({1.0, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(), d.cwiseAbs().maxCoeff()});
    const double grad_tol = 1e-8 * scale;
    constexpr int stall_limit = 50;

    for (std::size_t st = 0; st < starts; ++st) {
        Vector f(n);
        for (Eigen::Index i = 0; i < n; ++i) f(i) = normal(rng);
        f.normalize();
        auto [value, grad] = detail::inner_max(a, b, d, f);
        double step = 1.0;
        bool converged = false;
        int stalled = 0;
        while (out.iterations < budget) {
            ++out.iterations;
            Vector tangent = grad - grad.dot(f) * f;
            const double gnorm = tangent.norm();
            if (gnorm < grad_tol) {
                converged = true;
                break;
            }
            step = std::min(step * 2.0, 1.0);
            bool accepted = false;
            while (step > 1e-16) {
                Vector trial = (f - step * tangent).normalized();
                auto [tv, tg] = detail::inner_max(a, b, d, trial);
                if (tv <= value - 1e-4 * step * gnorm * gnorm) {
                    stalled = value - tv <= 8.0 * std::numeric_limits<double>::epsilon() * std::abs(value) ? stalled + 1 : 0;
                    f = trial;
                    value = tv;
                    grad = tg;
                    accepted = true;
                    break;
                }
                step /= 2.0;
            }
            if (!accepted || stalled >= stall_limit) { // no descent at machine resolution
                converged = true;
                break;
            }
        }
        out.lambda1 = std::min(out.lambda1, value);
        ++out.starts;
        if (!converged) throw std::runtime_error("minmaxmax_lambda1: optimization budget exhausted");
    }
    return out;
}

/// (a) every one of the |Λ| upper eigenvalues of Ĥ_L^+ exceeds √(λ² + β²).
inline CheckReport bracketing_edge_check(const FieldSample& field, double lambda, double beta) {
    const std::string name = "bracketing_edge";
    if (auto why = detail::edge_hypotheses(field, lambda, beta)) return CheckReport::unmet(name, *why);
    const double edge = std::hypot(lambda, beta);
    const auto upper = upper_half(eigensolve(assemble_bracketing(field)));
    CheckReport rep(name);
    for (Eigen::Index j = 0; j < upper.size(); ++j) rep.record_strict(upper(j) - edge);
    rep.set("edge", edge);
    return rep;
}

/// Mean counting function of the bracketing operator Ĥ_L^+.
inline IdsEstimate bracketing_ids(const DisorderConfig& config, const Region& where, std::span<const double> energies,
                                  std::size_t realizations, unsigned workers = 1) {
    auto per_real = map_realizations(realizations, workers, [&](std::size_t r) {
        const auto s = eigensolve(assemble_bracketing(sample_field(where, config, r)));
        std::vector<double> row;
        for (double e : energies) row.push_back(counting(s, e));
        return row;
    });
    return aggregate_counting(energies, per_real, where.size());
}

/// (b) E[𝔑_{Ĥ_{L'}}(E)] >= E[𝔑_{Ĥ_L^+}(E)] - 3σ with the large cube as IDS proxy.
inline CheckReport bracketing_ids_check(const DisorderConfig& config, const Region& small, const Region& large,
                                        std::span<const double> energies, std::size_t realizations,
                                        unsigned workers = 1) {
    const auto plus = bracketing_ids(config, small, energies, realizations, workers);
    DisorderConfig other = config;
    other.master_seed = config.master_seed ^ 0x9e3779b97f4a7c15ULL; // independent ensemble
    const auto proxy = ids_monte_carlo(other, large, energies, realizations, workers);
    CheckReport rep("bracketing_ids");
    for (std::size_t k = 0; k < energies.size(); ++k) {
        const double sigma = std::hypot(plus.std_error[k], proxy.std_error[k]);
        rep.record(proxy.mean[k] - plus.mean[k] + 3.0 * sigma);
    }
    return rep;
}

} // namespace rbo
