#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <regex>
#include <stdexcept>
#include <string>
#include <vector>

#include "rbo/lattice.hpp"

namespace rbo {

enum class MeasureKind { uniform, triangular, point_mass, two_point };

/// Constants (C, kappa) with mu([inf, inf + eta[) >= C eta^kappa for 0 < eta <= validity.
struct MassConstants {
    double c;
    double kappa;
    double validity;
};

/// Compactly supported single-site probability measure.
///
/// uniform(a,b) and triangular(a,b) (symmetric, peak at the midpoint) have
/// densities of bounded variation; point_mass(c) and two_point(v1,p,v2)
/// (mass p at v1, 1-p at v2) do not.
class SiteMeasure {
public:
    static SiteMeasure uniform(double a, double b) {
        if (!(a < b)) throw std::invalid_argument("uniform(a,b) requires a < b");
        return SiteMeasure(MeasureKind::uniform, a, b, 0.0);
    }
    static SiteMeasure triangular(double a, double b) {
        if (!(a < b)) throw std::invalid_argument("triangular(a,b) requires a < b");
        return SiteMeasure(MeasureKind::triangular, a, b, 0.0);
    }
    static SiteMeasure point_mass(double c) { return SiteMeasure(MeasureKind::point_mass, c, c, 1.0); }
    static SiteMeasure two_point(double v1, double p, double v2) {
        if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("two_point: weight p must lie in ]0,1[");
        if (v1 == v2) throw std::invalid_argument("two_point: atoms must differ (use point_mass)");
        return SiteMeasure(MeasureKind::two_point, v1, v2, p);
    }

    /// Parses "uniform(a,b)", "triangular(a,b)", "point_mass(c)", "two_point(v1,p,v2)".
    static SiteMeasure parse(const std::string& text) {
        static const std::regex re(R"(^\s*([a-z_]+)\s*\(([^)]*)\)\s*$)");
        std::smatch m;
        if (!std::regex_match(text, m, re)) throw std::invalid_argument("cannot parse measure '" + text + "'");
        const std::string kind = m[1];
        std::vector<double> args;
        std::string body = m[2];
        std::size_t pos = 0;
        while (pos <= body.size()) {
            auto comma = body.find(',', pos);
            std::string tok = body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            std::size_t used = 0;
            try {
                args.push_back(std::stod(tok, &used));
            } catch (const std::exception&) {
                throw std::invalid_argument("bad number '" + tok + "' in measure '" + text + "'");
            }
            if (tok.find_first_not_of(" \t", used) != std::string::npos)
                throw std::invalid_argument("bad number '" + tok + "' in measure '" + text + "'");
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        auto need = [&](std::size_t n) {
            if (args.size() != n)
                throw std::invalid_argument(kind + " expects " + std::to_string(n) + " arguments in '" + text + "'");
        };
        if (kind == "uniform") return need(2), uniform(args[0], args[1]);
        if (kind == "triangular") return need(2), triangular(args[0], args[1]);
        if (kind == "point_mass") return need(1), point_mass(args[0]);
        if (kind == "two_point") return need(3), two_point(args[0], args[1], args[2]);
        throw std::invalid_argument("unknown measure kind '" + kind + "'");
    }

    MeasureKind kind() const { return kind_; }
    bool has_density() const { return kind_ == MeasureKind::uniform || kind_ == MeasureKind::triangular; }
    bool is_point_mass() const { return kind_ == MeasureKind::point_mass; }

    double support_inf() const { return std::min(a_, b_); }
    double support_sup() const { return std::max(a_, b_); }
    double max_abs_support() const { return std::max(std::abs(support_inf()), std::abs(support_sup())); }

    /// Whether x lies in the (closed) support.
    bool in_support(double x) const {
        switch (kind_) {
        case MeasureKind::uniform:
        case MeasureKind::triangular: return x >= a_ && x <= b_;
        case MeasureKind::point_mass: return x == a_;
        case MeasureKind::two_point: return x == a_ || x == b_;
        }
        return false;
    }

    double density(double x) const {
        switch (kind_) {
        case MeasureKind::uniform: return (x >= a_ && x <= b_) ? 1.0 / (b_ - a_) : 0.0;
        case MeasureKind::triangular: {
            if (x < a_ || x > b_) return 0.0;
            const double half = (b_ - a_) / 2.0;
            const double peak = 1.0 / half;
            return peak * (1.0 - std::abs(x - (a_ + half)) / half);
        }
        default: throw std::domain_error("measure " + to_string() + " has no density");
        }
    }

    /// Total variation of the density over R, jumps at the support ends included.
    double bv_norm() const {
        switch (kind_) {
        case MeasureKind::uniform: return 2.0 / (b_ - a_);
        case MeasureKind::triangular: return 4.0 / (b_ - a_);
        default: throw std::domain_error("bv_norm: measure " + to_string() + " has no density");
        }
    }

    /// mu([lo, hi[).
    double probability(double lo, double hi) const {
        if (!(lo < hi)) return 0.0;
        return cdf_left(hi) - cdf_left(lo);
    }

    /// mu(]lo, hi[).
    double probability_open(double lo, double hi) const {
        if (!(lo < hi)) return 0.0;
        return cdf_left(hi) - cdf_right(lo);
    }

    std::optional<MassConstants> mass_constants() const {
        switch (kind_) {
        case MeasureKind::uniform: return MassConstants{1.0 / (b_ - a_), 1.0, b_ - a_};
        case MeasureKind::triangular: return MassConstants{2.0 / ((b_ - a_) * (b_ - a_)), 2.0, (b_ - a_) / 2.0};
        case MeasureKind::point_mass: return MassConstants{1.0, 1.0, 1.0};
        case MeasureKind::two_point: return MassConstants{a_ < b_ ? p_ : 1.0 - p_, 1.0, 1.0};
        }
        return std::nullopt;
    }

    /// Inverse distribution function at u in [0,1[.
    double quantile(double u) const {
        switch (kind_) {
        case MeasureKind::uniform: return a_ + (b_ - a_) * u;
        case MeasureKind::triangular:
            if (u < 0.5) return a_ + (b_ - a_) * std::sqrt(u / 2.0);
            return b_ - (b_ - a_) * std::sqrt((1.0 - u) / 2.0);
        case MeasureKind::point_mass: return a_;
        case MeasureKind::two_point: return u < p_ ? a_ : b_;
        }
        return a_;
    }

    double mean() const {
        switch (kind_) {
        case MeasureKind::uniform:
        case MeasureKind::triangular: return (a_ + b_) / 2.0;
        case MeasureKind::point_mass: return a_;
        case MeasureKind::two_point: return p_ * a_ + (1.0 - p_) * b_;
        }
        return a_;
    }

    std::string to_string() const {
        char buf[160];
        switch (kind_) {
        case MeasureKind::uniform: std::snprintf(buf, sizeof buf, "uniform(%.17g,%.17g)", a_, b_); break;
        case MeasureKind::triangular: std::snprintf(buf, sizeof buf, "triangular(%.17g,%.17g)", a_, b_); break;
        case MeasureKind::point_mass: std::snprintf(buf, sizeof buf, "point_mass(%.17g)", a_); break;
        case MeasureKind::two_point: std::snprintf(buf, sizeof buf, "two_point(%.17g,%.17g,%.17g)", a_, p_, b_); break;
        }
        return buf;
    }

    bool operator==(const SiteMeasure&) const = default;

private:
    SiteMeasure(MeasureKind k, double a, double b, double p) : kind_(k), a_(a), b_(b), p_(p) {}

    // mu(]-inf, x[)
    double cdf_left(double x) const {
        switch (kind_) {
        case MeasureKind::uniform:
            if (x <= a_) return 0.0;
            if (x >= b_) return 1.0;
            return (x - a_) / (b_ - a_);
        case MeasureKind::triangular: {
            if (x <= a_) return 0.0;
            if (x >= b_) return 1.0;
            const double w = b_ - a_;
            const double mid = a_ + w / 2.0;
            if (x <= mid) return 2.0 * (x - a_) * (x - a_) / (w * w);
            return 1.0 - 2.0 * (b_ - x) * (b_ - x) / (w * w);
        }
        case MeasureKind::point_mass: return x > a_ ? 1.0 : 0.0;
        case MeasureKind::two_point: return (x > a_ ? p_ : 0.0) + (x > b_ ? 1.0 - p_ : 0.0);
        }
        return 0.0;
    }
    // mu(]-inf, x])
    double cdf_right(double x) const {
        switch (kind_) {
        case MeasureKind::point_mass: return x >= a_ ? 1.0 : 0.0;
        case MeasureKind::two_point: return (x >= a_ ? p_ : 0.0) + (x >= b_ ? 1.0 - p_ : 0.0);
        default: return cdf_left(x);
        }
    }

    MeasureKind kind_;
    double a_;
    double b_;
    double p_;
};

/// Which hypothesis fixes the pairing edge parameter beta.
enum class BetaCase {
    nonnegative,   // beta := inf supp mu_B >= 0
    nonpositive,   // beta := sup supp mu_B <= 0
    contains_zero, // 0 in supp mu_B, beta := 0
};

struct BetaChoice {
    double beta;
    BetaCase which;
    bool flip_pairing; // B -> -B is a unitary equivalence mapping this case onto the nonnegative one
};

inline BetaChoice case_beta(const SiteMeasure& mu_b) {
    if (mu_b.support_inf() >= 0.0) return {mu_b.support_inf(), BetaCase::nonnegative, false};
    if (mu_b.support_sup() <= 0.0) return {mu_b.support_sup(), BetaCase::nonpositive, true};
    if (mu_b.in_support(0.0)) return {0.0, BetaCase::contains_zero, false};
    throw std::domain_error("pairing measure " + mu_b.to_string() +
                            " takes both signs but 0 is not in its support; no edge parameter beta exists");
}

inline const char* to_string(BetaCase c) {
    switch (c) {
    case BetaCase::nonnegative: return "inf supp mu_B >= 0";
    case BetaCase::nonpositive: return "sup supp mu_B <= 0";
    case BetaCase::contains_zero: return "0 in supp mu_B";
    }
    return "?";
}

struct DisorderConfig {
    SiteMeasure mu_v = SiteMeasure::point_mass(0.0);
    SiteMeasure mu_b = SiteMeasure::point_mass(0.0);
    std::uint64_t master_seed = 0;
};

enum class Family : std::uint64_t { potential = 0x5650544eULL, pairing = 0x42504149ULL };

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t h, std::uint64_t v) { return splitmix64(h ^ splitmix64(v)); }

} // namespace detail

/// Counter-based uniform variate in [0,1[ for (seed, realization, family, site).
inline double site_uniform(std::uint64_t seed, std::uint64_t realization, Family family, const Site& site) {
    std::uint64_t h = detail::mix(detail::splitmix64(seed), realization);
    h = detail::mix(h, static_cast<std::uint64_t>(family));
    h = detail::mix(h, static_cast<std::uint64_t>(site.coords.size()));
    for (int c : site.coords) h = detail::mix(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(c)));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

struct FieldSample {
    Region region;
    std::vector<double> v; // V_n in canonical order
    std::vector<double> b; // B_n in canonical order
    std::uint64_t realization = 0;
};

inline FieldSample sample_field(const Region& where, const DisorderConfig& config, std::uint64_t realization) {
    FieldSample f{where, {}, {}, realization};
    f.v.reserve(where.size());
    f.b.reserve(where.size());
    for (const auto& s : where) {
        f.v.push_back(config.mu_v.quantile(site_uniform(config.master_seed, realization, Family::potential, s)));
        f.b.push_back(config.mu_b.quantile(site_uniform(config.master_seed, realization, Family::pairing, s)));
    }
    return f;
}

/// Field with prescribed constant values (deterministic instances).
inline FieldSample constant_field(const Region& where, double v, double b) {
    return FieldSample{where, std::vector<double>(where.size(), v), std::vector<double>(where.size(), b), 0};
}

/// Restriction of a field to a subregion.
inline FieldSample restrict_field(const FieldSample& f, const Region& sub) {
    FieldSample out{sub, {}, {}, f.realization};
    for (const auto& s : sub) {
        auto i = f.region.index_of(s);
        if (!i) throw std::invalid_argument("restrict_field: site " + to_string(s) + " outside field region");
        out.v.push_back(f.v[*i]);
        out.b.push_back(f.b[*i]);
    }
    return out;
}

} // namespace rbo
