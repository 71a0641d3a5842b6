#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rbo/disorder.hpp"
#include "rbo/ensemble.hpp"
#include "rbo/green.hpp"
#include "rbo/inequalities.hpp"
#include "rbo/lattice.hpp"
#include "rbo/operators.hpp"
#include "rbo/report.hpp"
#include "rbo/spectral.hpp"

namespace rbo {

// ---------------------------------------------------------------- band edge

struct GapEdge {
    double lambda = 0.0; // inf supp mu_V
    double beta = 0.0;   // signed edge parameter of mu_B
    double edge = 0.0;   // sqrt(lambda^2 + beta^2)
    BetaCase which = BetaCase::nonnegative;
    double alpha_upper = 0.0; // exponent the upper bound delivers
    double alpha_lower = 0.0; // exponent the lower bound delivers
    std::string label;
};

inline GapEdge gap_edge(const DisorderConfig& config, int dim) {
    const double lambda = config.mu_v.support_inf();
    if (lambda < 0.0) throw PreconditionError("band edge requires lambda = inf supp mu_V >= 0");
    BetaChoice bc;
    try {
        bc = case_beta(config.mu_b);
    } catch (const std::domain_error& e) {
        throw PreconditionError(e.what());
    }
    GapEdge g;
    g.lambda = lambda;
    g.beta = bc.beta;
    g.edge = std::hypot(lambda, bc.beta);
    g.which = bc.which;
    g.alpha_lower = dim / 2.0;
    g.alpha_upper = (lambda == 0.0 && bc.beta != 0.0) ? dim / 4.0 : dim / 2.0;
    g.label = to_string(bc.which);
    return g;
}

// ---------------------------------------------------------------- tail curve

/// Cube length used at tail offset eps: max(l_min, ceil(10/sqrt(eps))), capped at l_max.
struct TailSchedule {
    double l_min = 200;
    double l_max = 2001;

    double length(double eps) const {
        const double need = std::ceil(10.0 / std::sqrt(eps));
        return std::min(l_max, std::max(l_min, need));
    }
};

struct TailPoint {
    double eps = 0.0;
    double length = 0.0;
    double delta_n = 0.0; // mean counting(edge + eps) - 1/2
    double std_error = 0.0;
    bool censored = false; // no eigenvalue captured in any realization
};

struct TailCurve {
    GapEdge edge;
    int dim = 1;
    std::size_t realizations = 0;
    std::vector<TailPoint> points; // ascending eps
};

/// ΔN(ε) = E[𝔑_{Ĥ_L}(edge + ε)] - 1/2 on an ε grid, realizations shared across ε at equal L.
inline TailCurve tail_curve(const DisorderConfig& config, int dim, std::vector<double> eps_grid,
                            const TailSchedule& schedule, std::size_t realizations, unsigned workers = 1) {
    TailCurve curve;
    curve.edge = gap_edge(config, dim);
    curve.dim = dim;
    curve.realizations = realizations;
    for (double e : eps_grid)
        if (!(e > 0.0)) throw std::invalid_argument("tail_curve: eps must be positive");
    std::sort(eps_grid.begin(), eps_grid.end());

    std::map<double, std::vector<std::size_t>> by_length;
    for (std::size_t k = 0; k < eps_grid.size(); ++k) by_length[schedule.length(eps_grid[k])].push_back(k);

    curve.points.resize(eps_grid.size());
    for (const auto& [length, ks] : by_length) {
        const Region box = region(CubeSpec(dim, length));
        const auto n = static_cast<double>(box.size());
        auto rows = map_realizations(realizations, workers, [&](std::size_t r) {
            const auto s = realization_spectrum(config, box, r);
            std::vector<double> row;
            for (auto k : ks) {
                const double c = static_cast<double>(count_at_most(s, curve.edge.edge + eps_grid[k]));
                row.push_back((c - n) / (2.0 * n));
            }
            return row;
        });
        std::vector<double> column(realizations);
        for (std::size_t i = 0; i < ks.size(); ++i) {
            for (std::size_t r = 0; r < realizations; ++r) column[r] = rows[r][i];
            const auto ms = mean_stderr(column);
            curve.points[ks[i]] = {eps_grid[ks[i]], length, ms.mean, ms.std_error, ms.mean == 0.0};
        }
    }
    return curve;
}

/// ΔN(ε₁) <= ΔN(ε₂) + 3σ for consecutive ε₁ < ε₂.
inline CheckReport tail_monotonicity(const TailCurve& c) {
    CheckReport rep("tail_monotone");
    for (std::size_t k = 1; k < c.points.size(); ++k) {
        const auto& lo = c.points[k - 1];
        const auto& hi = c.points[k];
        rep.record(hi.delta_n - lo.delta_n + 3.0 * std::hypot(lo.std_error, hi.std_error));
    }
    return rep;
}

struct TailFit {
    double alpha = std::numeric_limits<double>::quiet_NaN();
    double intercept = std::numeric_limits<double>::quiet_NaN();
    std::size_t points = 0;
};

/// Regression of ln|ln ΔN| on ln ε over points with ΔN in ]0, 0.4[; α̂ = -slope.
inline TailFit tail_exponent_fit(const TailCurve& c) {
    std::vector<double> x, y;
    for (const auto& p : c.points) {
        if (p.censored || !(p.delta_n > 0.0 && p.delta_n < 0.4)) continue;
        x.push_back(std::log(p.eps));
        y.push_back(std::log(std::abs(std::log(p.delta_n))));
    }
    TailFit fit;
    fit.points = x.size();
    if (x.size() < 2) return fit;
    const auto lf = least_squares(x, y);
    fit.alpha = -lf.slope;
    fit.intercept = lf.intercept;
    return fit;
}

/// 𝔑_{Ĥ_L}(edge+ε) - 1/2 <= (1/2) N_{H_L}(√((edge+ε)² - β²)) in exact counts.
inline CheckReport finite_volume_tail_bound(const FieldSample& field, double lambda, double beta, double eps) {
    const std::string name = "tail_bound";
    if (auto why = detail::edge_hypotheses(field, lambda, beta)) return CheckReport::unmet(name, *why);
    const auto hl = build_h(field.region, BoundaryCondition::simple, field);
    if (!(detail::min_eigenvalue(hl.matrix) > 0.0)) return CheckReport::unmet(name, "tail bound requires H_L > 0");

    const double e = std::hypot(lambda, beta) + eps;
    const auto n = static_cast<double>(field.region.size());
    const auto c_block = static_cast<double>(count_at_most(eigensolve(assemble_block(hl, field)), e));
    const auto c_scalar = static_cast<double>(count_at_most(eigensolve(hl), std::sqrt(e * e - beta * beta)));
    CheckReport rep(name);
    rep.record(c_scalar - (c_block - n)); // c/(2N) - 1/2 <= c'/(2N)
    rep.set("lhs", (c_block - n) / (2.0 * n));
    rep.set("rhs", c_scalar / (2.0 * n));
    return rep;
}

// ---------------------------------------------------------------- test function

/// ⟨ψ, H^D_{0,L} ψ⟩ for ψ ∝ L/2 - |n|_∞ on Λ_L.
inline double test_function_energy(const CubeSpec& cube) {
    if (cube.length < 4) throw PreconditionError("test function requires L >= 4");
    const Region box = region(cube);
    Vector psi(static_cast<Eigen::Index>(box.size()));
    for (std::size_t i = 0; i < box.size(); ++i) {
        const Site& s = box[i];
        int r = 0;
        for (int k = 0; k < s.dim(); ++k) r = std::max(r, std::abs(s[k] - cube.center[k]));
        psi(static_cast<Eigen::Index>(i)) = cube.length / 2.0 - r;
    }
    psi.normalize();
    return psi.dot(build_h0(box, BoundaryCondition::dirichlet).matrix * psi);
}

struct C0Estimate {
    double c0 = 0.0; // max of L² ⟨ψ, H^D ψ⟩ over the grid
    std::vector<double> lengths;
    std::vector<double> scaled; // L² ⟨ψ, H^D ψ⟩
};

inline C0Estimate c0_estimate(std::span<const double> lengths, int dim) {
    C0Estimate out;
    for (double l : lengths) {
        const double v = l * l * test_function_energy(CubeSpec(dim, l));
        out.lengths.push_back(l);
        out.scaled.push_back(v);
        out.c0 = std::max(out.c0, v);
    }
    return out;
}

/// Smallest integer L >= 4 with c0 L^{-2} < ε/2.
inline double lower_bound_length(double c0, double eps) {
    double l = std::max(4.0, std::floor(std::sqrt(2.0 * c0 / eps)));
    while (!(c0 / (l * l) < eps / 2.0)) l += 1.0;
    return l;
}

/// Frequency of ⟨ψ,(V-λ)ψ⟩ + ⟨ψ,(B-β)²ψ⟩^{1/2} < ε/2 against
/// μ_V([λ, λ+ε/4[)^{|Λ|} μ_B([β-ε/4, β+ε/4[)^{|Λ|}. Censored (no instance
/// recorded) when the bound is below 10/R.
inline CheckReport lower_bound_probability(const DisorderConfig& config, int dim, double eps, double c0,
                                           std::size_t realizations, unsigned workers = 1) {
    const std::string name = "lifschitz_lower_bound";
    const GapEdge g = gap_edge(config, dim);
    const double length = lower_bound_length(c0, eps);
    const CubeSpec cube(dim, length);
    const Region box = region(cube);
    const double sites = static_cast<double>(box.size());
    const double bound = std::pow(config.mu_v.probability(g.lambda, g.lambda + eps / 4.0), sites) *
                         std::pow(config.mu_b.probability(g.beta - eps / 4.0, g.beta + eps / 4.0), sites);

    Vector w(static_cast<Eigen::Index>(box.size()));
    for (std::size_t i = 0; i < box.size(); ++i) {
        const Site& s = box[i];
        int r = 0;
        for (int k = 0; k < s.dim(); ++k) r = std::max(r, std::abs(s[k]));
        w(static_cast<Eigen::Index>(i)) = length / 2.0 - r;
    }
    w = w.cwiseAbs2() / w.squaredNorm(); // ψ(n)²

    auto hits = map_realizations(realizations, workers, [&](std::size_t r) {
        const auto f = sample_field(box, config, r);
        CompensatedSum pv, pb;
        for (std::size_t i = 0; i < box.size(); ++i) {
            const double wi = w(static_cast<Eigen::Index>(i));
            pv.add(wi * (f.v[i] - g.lambda));
            pb.add(wi * (f.b[i] - g.beta) * (f.b[i] - g.beta));
        }
        return pv.value() + std::sqrt(pb.value()) < eps / 2.0 ? 1.0 : 0.0;
    });
    const auto ms = mean_stderr(hits);
    const auto ci = wilson(static_cast<std::size_t>(compensated_sum(hits)), realizations);

    CheckReport rep(name);
    rep.set("eps", eps);
    rep.set("length", length);
    rep.set("bound", bound);
    rep.set("frequency", ms.mean);
    rep.set("std_error", ms.std_error);
    rep.set("wilson_upper", ci.upper);
    if (bound * static_cast<double>(realizations) < 10.0) {
        rep.set("censored", std::string("expected hits below 10"));
        return rep;
    }
    rep.record(ci.upper - bound);
    return rep;
}

// ---------------------------------------------------------------- suitability

namespace detail {

inline void require_six(double length) {
    if (!(length > 0.0 && std::fmod(length, 6.0) == 0.0)) throw PreconditionError("suitability requires L in 6N");
}

/// ‖𝟙_rows 𝔾(E) 𝟙_cols‖ from an eigendecomposition of Ĥ_Λ.
inline double restricted_resolvent_norm(const Spectrum& s, double energy, const std::vector<Eigen::Index>& rows,
                                        const std::vector<Eigen::Index>& cols) {
    const Matrix& u = *s.vectors;
    const auto k = s.values.size();
    Matrix ur(static_cast<Eigen::Index>(rows.size()), k), uc(static_cast<Eigen::Index>(cols.size()), k);
    for (std::size_t i = 0; i < rows.size(); ++i) ur.row(static_cast<Eigen::Index>(i)) = u.row(rows[i]);
    for (std::size_t i = 0; i < cols.size(); ++i) uc.row(static_cast<Eigen::Index>(i)) = u.row(cols[i]);
    const Vector inv = (s.values.array() - energy).inverse().matrix();
    return operator_norm(ur * inv.asDiagonal() * uc.transpose());
}

inline double inf_abs(const Spectrum& s) {
    return s.values.size() ? s.values.cwiseAbs().minCoeff() : std::numeric_limits<double>::infinity();
}

} // namespace detail

/// Inner third Λ_{L/3} of a cube of length L, same centre.
inline CubeSpec inner_third(const CubeSpec& cube) { return CubeSpec(cube.dim, cube.length / 3.0, cube.center); }

struct SuitabilityInstance {
    double norm = std::numeric_limits<double>::infinity(); // ‖𝟙_{∂ⁱΛ_L} 𝔾 𝟙_{Λ_{L/3}}‖
    double threshold = 0.0;                                // L^{-θ}
    double distance = 0.0;                                 // dist(E, σ)
    bool suitable = false;
};

inline SuitabilityInstance suitability_instance(const CubeSpec& cube, const Spectrum& s, double energy, double theta) {
    detail::require_six(cube.length);
    const Region box = region(cube);
    SuitabilityInstance out;
    out.threshold = std::pow(cube.length, -theta);
    out.distance = spectral_distance(s, energy);
    if (!(out.distance >= 1e-8 * std::max(s.norm(), 1.0))) return out; // E in σ: not suitable
    out.norm = detail::restricted_resolvent_norm(s, energy, block_indices(inner_boundary(box), box),
                                                 block_indices(region(inner_third(cube)), box));
    out.suitable = out.norm < out.threshold;
    return out;
}

/// Whether Λ_L is (θ,E)-suitable for this field.
inline bool suitable(const CubeSpec& cube, const FieldSample& field, double energy, double theta) {
    detail::require_six(cube.length);
    return suitability_instance(cube, eigensolve(assemble_block(field), true), energy, theta).suitable;
}

/// Rigorous Combes–Thomas majorant of ‖𝟙_{∂ⁱΛ_L} 𝔾 𝟙_{Λ_{L/3}}‖: Hilbert–Schmidt
/// sum of the per-pair bounds, with √2 converting block operator norms to Frobenius.
inline double ct_certificate(const CubeSpec& cube, double delta) {
    const Region box = region(cube);
    const Region bdry = inner_boundary(box);
    const Region third = region(inner_third(cube));
    const double d = std::min(delta, 1.0);
    CompensatedSum sq;
    for (const auto& n : bdry)
        for (const auto& m : third) {
            const double b = combes_thomas_bound(d, cube.dim, dist1(n, m));
            sq.add(2.0 * b * b);
        }
    return std::sqrt(sq.value());
}

namespace detail {

/// Closed-form size data of a cube of length L: |∂ⁱΛ_L|, |Λ_{L/3}| and dist(∂ⁱΛ_L, Λ_{L/3}).
struct CubeGeometry {
    double boundary = 0.0;
    double third = 0.0;
    double separation = 0.0;
};

inline CubeGeometry cube_geometry(double length, int dim) {
    const CubeSpec outer(dim, length);
    const CubeSpec inner(dim, length / 3.0);
    const double s = static_cast<double>(outer.side());
    CubeGeometry g;
    g.boundary = std::pow(s, dim) - std::pow(std::max(s - 2.0, 0.0), dim);
    g.third = static_cast<double>(inner.volume());
    g.separation = static_cast<double>(outer.highest_offset() - inner.highest_offset());
    return g;
}

/// First k in [lo, hi] with pred(6k), assuming pred is eventually monotone.
template <class Pred>
std::optional<double> first_multiple_of_six(Pred&& pred, std::uint64_t cap = 1ULL << 40) {
    std::uint64_t hi = 1;
    while (!pred(6.0 * static_cast<double>(hi))) {
        if (hi >= cap) return std::nullopt;
        hi *= 2;
    }
    std::uint64_t lo = hi / 2 + 1;
    while (lo < hi) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (pred(6.0 * static_cast<double>(mid)))
            hi = mid;
        else
            lo = mid + 1;
    }
    return 6.0 * static_cast<double>(hi);
}

} // namespace detail

/// Scale beyond which the gap event alone forces suitability via Combes–Thomas
/// with δ = L^{-1/2}: √(2|∂ⁱΛ||Λ_{L/3}|)·4√L·e^{-√L·sep/(12dL)} < L^{-θ}.
inline std::optional<double> ct_threshold_gap(double theta, int dim) {
    return detail::first_multiple_of_six([&](double l) {
        const auto g = detail::cube_geometry(l, dim);
        const double delta = 1.0 / std::sqrt(l);
        const double lhs = 0.5 * std::log(2.0 * g.boundary * g.third) + std::log(4.0 / delta) -
                           delta * g.separation / (12.0 * dim);
        return lhs < -theta * std::log(l);
    });
}

/// Same threshold for a fixed distance δ (≤ 1) from the spectrum, using the
/// coarse bound with every pair at the minimal separation.
inline std::optional<double> ct_threshold_fixed(double theta, int dim, double delta) {
    const double d = std::min(delta, 1.0);
    return detail::first_multiple_of_six([&](double l) {
        const auto g = detail::cube_geometry(l, dim);
        const double lhs = 0.5 * std::log(2.0 * g.boundary * g.third) + std::log(4.0 / d) - d * g.separation / (12.0 * dim);
        return lhs < -theta * std::log(l);
    });
}

struct SuitabilityEnergy {
    double energy = 0.0;
    Proportion probability;
};

struct SuitabilityReport {
    double length = 0.0;
    double theta = 0.0;
    double a_l = 0.0; // edge + L^{-1/2}
    std::size_t realizations = 0;
    std::vector<SuitabilityEnergy> energies;
    Proportion gap_event;        // inf σ(|Ĥ_L|) > a_L + L^{-1/2}
    std::optional<double> l_star; // gap-event CT threshold
    CheckReport implication;     // gap event and certificate below L^{-θ} ⇒ suitable
};

inline SuitabilityReport suitability_probability(const DisorderConfig& config, int dim, double length, double theta,
                                                 std::span<const double> energies, std::size_t realizations,
                                                 unsigned workers = 1) {
    detail::require_six(length);
    const GapEdge g = gap_edge(config, dim);
    SuitabilityReport rep;
    rep.length = length;
    rep.theta = theta;
    rep.a_l = g.edge + 1.0 / std::sqrt(length);
    rep.realizations = realizations;
    for (double e : energies)
        if (!(std::abs(e) <= rep.a_l)) throw PreconditionError("suitability energy outside [-a_L, a_L]");

    const CubeSpec cube(dim, length);
    const Region box = region(cube);
    const double gap_level = rep.a_l + 1.0 / std::sqrt(length);
    const bool beyond_l_star = [&] {
        rep.l_star = ct_threshold_gap(theta, dim);
        return rep.l_star && length >= *rep.l_star;
    }();

    struct Row {
        std::vector<char> suitable;
        bool gap = false;
        std::size_t certified = 0;
        std::size_t broken = 0;
    };
    auto rows = map_realizations(realizations, workers, [&](std::size_t r) {
        const auto s = eigensolve(assemble_block(sample_field(box, config, r)), true);
        Row row;
        row.gap = detail::inf_abs(s) > gap_level;
        for (double e : energies) {
            const auto inst = suitability_instance(cube, s, e, theta);
            row.suitable.push_back(inst.suitable);
            if (!row.gap) continue;
            const bool covered = beyond_l_star || ct_certificate(cube, inst.distance) < inst.threshold;
            if (!covered) continue;
            ++row.certified;
            if (!inst.suitable) ++row.broken;
        }
        return row;
    });

    rep.implication = CheckReport("suitability_implication");
    std::size_t gaps = 0;
    for (const auto& row : rows) {
        gaps += row.gap;
        for (std::size_t i = 0; i < row.certified; ++i) rep.implication.record(i < row.broken ? -1.0 : 0.0);
    }
    rep.gap_event = wilson(gaps, realizations);
    for (std::size_t k = 0; k < energies.size(); ++k) {
        std::size_t hits = 0;
        for (const auto& row : rows) hits += row.suitable[k] ? 1 : 0;
        rep.energies.push_back({energies[k], wilson(hits, realizations)});
    }
    rep.implication.set("length", length);
    rep.implication.set("theta", theta);
    rep.implication.set("gap_event_frequency", rep.gap_event.estimate);
    if (rep.l_star) rep.implication.set("l_star", *rep.l_star);
    return rep;
}

/// Suitability probability at each energy does not drop as L grows: upper CI
/// bound at the larger scale >= lower CI bound at the smaller one.
inline CheckReport suitability_trend(const std::vector<SuitabilityReport>& by_length) {
    CheckReport rep("suitability_trend");
    for (std::size_t i = 1; i < by_length.size(); ++i) {
        const auto& a = by_length[i - 1];
        const auto& b = by_length[i];
        for (std::size_t k = 0; k < std::min(a.energies.size(), b.energies.size()); ++k)
            rep.record(b.energies[k].probability.upper - a.energies[k].probability.lower);
    }
    return rep;
}

// ---------------------------------------------------------------- Lifschitz for H

struct EdgeEventPoint {
    double length = 0.0;
    Proportion probability; // P(inf σ(H_L) <= λ + C L^{-1/2})
};

struct EdgeEventCurve {
    double constant = 0.0;
    std::vector<EdgeEventPoint> points;
    CheckReport trend;
};

inline EdgeEventCurve lifschitz_for_h(const SiteMeasure& mu_v, int dim, double constant,
                                      std::span<const double> lengths, std::size_t realizations,
                                      std::uint64_t seed, unsigned workers = 1) {
    if (mu_v.is_point_mass()) throw PreconditionError("Lifschitz estimate for H requires mu_V not concentrated in a single point");
    const DisorderConfig config{mu_v, SiteMeasure::point_mass(0.0), seed};
    const double lambda = mu_v.support_inf();
    EdgeEventCurve out;
    out.constant = constant;
    std::vector<MeanStderr> stats;
    for (double l : lengths) {
        const Region box = region(CubeSpec(dim, l));
        const double level = lambda + constant / std::sqrt(l);
        auto hits = map_realizations(realizations, workers, [&](std::size_t r) {
            const auto h = build_h(box, BoundaryCondition::simple, sample_field(box, config, r));
            return detail::min_eigenvalue(h.matrix) <= level ? 1.0 : 0.0;
        });
        stats.push_back(mean_stderr(hits));
        out.points.push_back({l, wilson(static_cast<std::size_t>(compensated_sum(hits)), realizations)});
    }
    out.trend = CheckReport("lifschitz_h_trend");
    for (std::size_t i = 1; i < stats.size(); ++i)
        out.trend.record(stats[i - 1].mean - stats[i].mean + 3.0 * std::hypot(stats[i - 1].std_error, stats[i].std_error));
    return out;
}

// ---------------------------------------------------------------- correlator

struct CorrelatorPoint {
    Site n;
    Site m;
    int distance = 0;
    double q = 0.0;
    double std_error = 0.0;
};

struct CorrelatorProfile {
    double a = 0.0; // I = [-a, a]
    std::size_t realizations = 0;
    std::vector<CorrelatorPoint> points;
};

/// Q(n,m) = Σ_{E_j ∈ [-a,a]} ‖P_j(n,m)‖_F for one eigendecomposition; ‖ψψᵀ(n,m)‖_F = |ψ(n)||ψ(m)|.
inline std::vector<double> correlator_values(const Spectrum& s, const Region& where, double a,
                                             const std::vector<std::pair<Site, Site>>& pairs) {
    if (!s.vectors) throw std::invalid_argument("correlator requires eigenvectors");
    const Matrix& u = *s.vectors;
    const auto h = static_cast<Eigen::Index>(where.size());
    std::vector<double> q(pairs.size(), 0.0);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto i = where.index_of(pairs[p].first);
        const auto j = where.index_of(pairs[p].second);
        if (!i || !j) throw std::invalid_argument("correlator: site outside the cube");
        const auto ni = static_cast<Eigen::Index>(*i);
        const auto nj = static_cast<Eigen::Index>(*j);
        CompensatedSum sum;
        for (Eigen::Index k = 0; k < s.values.size(); ++k) {
            if (s.values(k) < -a || s.values(k) > a) continue;
            sum.add(std::hypot(u(ni, k), u(ni + h, k)) * std::hypot(u(nj, k), u(nj + h, k)));
        }
        q[p] = sum.value();
    }
    return q;
}

/// Pairs (origin, m) for every m in the region.
inline std::vector<std::pair<Site, Site>> pairs_from_origin(const Region& where) {
    const Site origin{std::vector<int>(static_cast<std::size_t>(where.dim()), 0)};
    std::vector<std::pair<Site, Site>> out;
    for (const auto& m : where) out.emplace_back(origin, m);
    return out;
}

inline CorrelatorProfile eigenfunction_correlator(const DisorderConfig& config, const Region& where, double a,
                                                  std::vector<std::pair<Site, Site>> pairs, std::size_t realizations,
                                                  unsigned workers = 1) {
    if (pairs.empty()) pairs = pairs_from_origin(where);
    auto rows = map_realizations(realizations, workers, [&](std::size_t r) {
        return correlator_values(realization_spectrum(config, where, r, true), where, a, pairs);
    });
    CorrelatorProfile prof;
    prof.a = a;
    prof.realizations = realizations;
    std::vector<double> column(realizations);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        for (std::size_t r = 0; r < realizations; ++r) column[r] = rows[r][p];
        const auto ms = mean_stderr(column);
        prof.points.push_back({pairs[p].first, pairs[p].second, dist1(pairs[p].first, pairs[p].second), ms.mean,
                               ms.std_error});
    }
    return prof;
}

struct StretchedFit {
    double zeta = std::numeric_limits<double>::quiet_NaN();
    double c_zeta = std::numeric_limits<double>::quiet_NaN();
    double slope = std::numeric_limits<double>::quiet_NaN(); // coefficient of |n-m|^ζ in ln E[Q]
    double residual = std::numeric_limits<double>::infinity();
    std::size_t points = 0;
};

/// ln E[Q] = ln C_ζ + slope·|n-m|^ζ, least squares per ζ; the ζ with the smallest residual wins.
inline StretchedFit stretched_fit(const CorrelatorProfile& prof, std::span<const double> zetas) {
    StretchedFit best;
    for (double z : zetas) {
        std::vector<double> x, y;
        for (const auto& p : prof.points) {
            if (!(p.q > 0.0)) continue;
            x.push_back(std::pow(static_cast<double>(p.distance), z));
            y.push_back(std::log(p.q));
        }
        if (x.size() < 2) continue;
        const auto lf = least_squares(x, y);
        CompensatedSum ss;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - lf.intercept - lf.slope * x[i];
            ss.add(r * r);
        }
        if (ss.value() < best.residual) {
            best = {z, std::exp(lf.intercept), lf.slope, ss.value(), x.size()};
        }
    }
    return best;
}

} // namespace rbo
