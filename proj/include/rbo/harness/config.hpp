#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rbo/asymptotics.hpp"
#include "rbo/disorder.hpp"
#include "rbo/inequalities.hpp"
#include "rbo/lattice.hpp"

namespace rbo::harness {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr std::size_t kMaxMatrixDim = 4096;

inline const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds{"spectrum", "ids",         "dos",        "wegner", "gap",
                                                "interlace", "green",      "ct",         "sli-edi", "tails",
                                                "suitability", "correlator", "fh"};
    return kinds;
}

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string join(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ", ";
        s += format_double(xs[i]);
    }
    return s;
}

inline std::vector<double> parse_list(const std::string& text, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const auto b = tok.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        const auto e = tok.find_last_not_of(" \t");
        tok = tok.substr(b, e - b + 1);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size()) throw std::invalid_argument("key '" + key + "': bad number '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

struct ExperimentConfig {
    std::string kind = "spectrum";
    int dim = 1;
    std::vector<double> lengths{10};
    SiteMeasure mu_v = SiteMeasure::point_mass(0.0);
    SiteMeasure mu_b = SiteMeasure::point_mass(0.0);
    std::size_t realizations = 1;
    std::uint64_t seed = 1;

    std::vector<double> energies;
    std::vector<double> eps;
    std::vector<double> theta;
    std::vector<double> bins;       // lo, hi, count
    double interval = 1.0;          // correlator window [-a, a]
    std::vector<double> zeta{0.25, 0.5, 0.75, 1.0, 1.25, 1.5};
    double tail_lmin = 200;
    double tail_lmax = 2001;

    // Not part of the config identity.
    unsigned workers = 1;
    std::string out = "out";

    DisorderConfig disorder() const { return {mu_v, mu_b, seed}; }

    bool operator==(const ExperimentConfig&) const = default;
};

/// INI text of the config. `with_runtime` adds workers and out.
inline std::string serialize(const ExperimentConfig& c, bool with_runtime = true) {
    std::ostringstream os;
    os << "[experiment]\n";
    os << "kind = " << c.kind << "\n";
    os << "dim = " << c.dim << "\n";
    os << "lengths = " << join(c.lengths) << "\n";
    os << "realizations = " << c.realizations << "\n";
    os << "seed = " << c.seed << "\n";
    if (with_runtime) {
        os << "workers = " << c.workers << "\n";
        os << "out = " << c.out << "\n";
    }
    os << "\n[disorder]\n";
    os << "mu_v = " << c.mu_v.to_string() << "\n";
    os << "mu_b = " << c.mu_b.to_string() << "\n";
    os << "\n[grid]\n";
    os << "energies = " << join(c.energies) << "\n";
    os << "eps = " << join(c.eps) << "\n";
    os << "theta = " << join(c.theta) << "\n";
    os << "bins = " << join(c.bins) << "\n";
    os << "interval = " << format_double(c.interval) << "\n";
    os << "zeta = " << join(c.zeta) << "\n";
    os << "tail_lmin = " << format_double(c.tail_lmin) << "\n";
    os << "tail_lmax = " << format_double(c.tail_lmax) << "\n";
    return os.str();
}

/// FNV-1a over the canonical serialization without runtime fields.
inline std::uint64_t config_hash(const ExperimentConfig& c) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : serialize(c, false)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline ExperimentConfig parse_config(std::istream& in) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    static const std::vector<std::string> known{
        "experiment.kind",  "experiment.dim",  "experiment.lengths", "experiment.realizations",
        "experiment.seed",  "experiment.workers", "experiment.out",  "disorder.mu_v",
        "disorder.mu_b",    "grid.energies",   "grid.eps",           "grid.theta",
        "grid.bins",        "grid.interval",   "grid.zeta",          "grid.tail_lmin",
        "grid.tail_lmax"};
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw std::invalid_argument("config: key '" + section + "' outside a section");
        for (const auto& [key, value] : body) {
            const std::string full = section + "." + key;
            if (std::find(known.begin(), known.end(), full) == known.end())
                throw std::invalid_argument("config: unknown key '" + full + "'");
        }
    }

    ExperimentConfig c;
    auto text = [&](const char* key) { return tree.get_optional<std::string>(key); };
    auto integer = [&](const char* key, auto& dst) {
        if (auto v = text(key)) {
            std::size_t used = 0;
            long long x = 0;
            try {
                x = std::stoll(*v, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != v->size() || x < 0) throw std::invalid_argument(std::string("config: '") + key + "' must be a non-negative integer");
            dst = static_cast<std::remove_reference_t<decltype(dst)>>(x);
        }
    };
    auto list = [&](const char* key, std::vector<double>& dst) {
        if (auto v = text(key)) dst = parse_list(*v, key);
    };
    auto number = [&](const char* key, double& dst) {
        if (auto v = text(key)) {
            auto xs = parse_list(*v, key);
            if (xs.size() != 1) throw std::invalid_argument(std::string("config: '") + key + "' expects one number");
            dst = xs[0];
        }
    };

    if (auto v = text("experiment.kind")) c.kind = *v;
    integer("experiment.dim", c.dim);
    list("experiment.lengths", c.lengths);
    integer("experiment.realizations", c.realizations);
    integer("experiment.seed", c.seed);
    integer("experiment.workers", c.workers);
    if (auto v = text("experiment.out")) c.out = *v;
    if (auto v = text("disorder.mu_v")) c.mu_v = SiteMeasure::parse(*v);
    if (auto v = text("disorder.mu_b")) c.mu_b = SiteMeasure::parse(*v);
    list("grid.energies", c.energies);
    list("grid.eps", c.eps);
    list("grid.theta", c.theta);
    list("grid.bins", c.bins);
    number("grid.interval", c.interval);
    list("grid.zeta", c.zeta);
    number("grid.tail_lmin", c.tail_lmin);
    number("grid.tail_lmax", c.tail_lmax);
    return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config '" + path + "'");
    return parse_config(in);
}

namespace detail {

inline std::size_t block_dim(int dim, double length) { return 2 * CubeSpec(dim, length).volume(); }

} // namespace detail

/// Every hypothesis the requested experiment relies on, checked without computing spectra.
inline std::vector<std::string> validate(const ExperimentConfig& c) {
    std::vector<std::string> diags;
    auto add = [&](std::string s) { diags.push_back(std::move(s)); };
    const auto& kinds = experiment_kinds();
    if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end()) {
        add("unknown experiment kind '" + c.kind + "'");
        return diags;
    }
    if (c.dim < 1 || c.dim > 3) add("dimension must be 1, 2 or 3");
    if (c.lengths.empty()) add("at least one cube length is required");
    bool sizes_ok = c.dim >= 1 && c.dim <= 3;
    for (double l : c.lengths) {
        if (!(l > 0.0) || l != std::floor(l)) {
            add("cube length " + format_double(l) + " must be a positive integer");
            sizes_ok = false;
        } else if (sizes_ok && detail::block_dim(c.dim, l) > kMaxMatrixDim) {
            add("cube length " + format_double(l) + " gives matrix dimension 2|Λ| = " +
                std::to_string(detail::block_dim(c.dim, l)) + " above the cap " + std::to_string(kMaxMatrixDim) +
                "; reduce L or d");
            sizes_ok = false;
        }
    }
    if (c.workers == 0) add("workers must be at least 1");

    auto need_edge = [&] {
        try {
            gap_edge(c.disorder(), c.dim);
        } catch (const PreconditionError& e) {
            add(e.what());
        }
    };
    auto need_energies = [&] {
        if (c.energies.empty()) add("energy grid is empty");
    };
    auto need_eps = [&] {
        if (c.eps.empty()) add("eps grid is empty");
        for (double e : c.eps)
            if (!(e > 0.0)) add("eps " + format_double(e) + " must be positive");
    };
    auto need_nested = [&] {
        if (c.lengths.size() != 3 || !sizes_ok) {
            add("nested-volume experiments need exactly three lengths L1 < L2 < L3");
            return;
        }
        const Region a = region(CubeSpec(c.dim, c.lengths[0]));
        const Region b = region(CubeSpec(c.dim, c.lengths[1]));
        const Region d = region(CubeSpec(c.dim, c.lengths[2]));
        if (!strictly_inside(a, b) || !strictly_inside(b, d)) add("cubes must be strictly nested: Λ1 ⊏ Λ2 ⊏ Λ3");
    };

    const auto& k = c.kind;
    if (k == "ids") need_energies();
    if (k == "dos" || k == "wegner") {
        if (c.bins.size() != 3 || !(c.bins[1] > c.bins[0]) || !(c.bins[2] >= 1) || c.bins[2] != std::floor(c.bins[2]))
            add("bins must be 'lo, hi, count' with lo < hi and count >= 1");
    }
    if (k == "wegner") {
        if (auto why = wegner2_diagnostic(c.disorder())) add(*why);
        need_energies();
        need_eps();
        for (double e : c.energies)
            for (double x : c.eps)
                if (!(x > 0.0 && 3.0 * x < e))
                    add("Wegner window requires 0 < 3 eps < E (E = " + format_double(e) + ", eps = " + format_double(x) + ")");
    }
    if (k == "gap" || k == "interlace" || k == "tails" || k == "suitability") need_edge();
    if (k == "interlace") {
        if (c.mu_v.support_inf() < 0.0) add("interlacing requires H_L > 0, i.e. inf supp mu_V >= 0");
        need_eps();
    }
    if (k == "green" || k == "sli-edi") {
        need_nested();
        need_energies();
    }
    if (k == "ct") need_energies();
    if (k == "tails") {
        need_eps();
        if (!(c.tail_lmin >= 1.0 && c.tail_lmax >= c.tail_lmin)) add("tail lengths need 1 <= tail_lmin <= tail_lmax");
        else if (c.dim >= 1 && c.dim <= 3 && detail::block_dim(c.dim, c.tail_lmax) > kMaxMatrixDim)
            add("tail_lmax gives matrix dimension above the cap " + std::to_string(kMaxMatrixDim));
    }
    if (k == "suitability") {
        need_energies();
        if (c.theta.empty()) add("theta grid is empty");
        for (double l : c.lengths) {
            if (std::fmod(l, 6.0) != 0.0) add("suitability requires L ∈ 6N (got L = " + format_double(l) + ")");
            try {
                const double a_l = gap_edge(c.disorder(), c.dim).edge + 1.0 / std::sqrt(l);
                for (double e : c.energies)
                    if (!(std::abs(e) <= a_l))
                        add("energy " + format_double(e) + " outside [-a_L, a_L] for L = " + format_double(l));
            } catch (const PreconditionError&) {
            }
        }
    }
    if (k == "correlator") {
        if (!(c.interval > 0.0)) add("correlator interval half-width must be positive");
        if (c.zeta.empty()) add("zeta grid is empty");
    }
    if (k == "fh") {
        if (c.mu_v.support_inf() < 0.0) add("Feynman-Hellmann bound requires H_L >= 0, i.e. inf supp mu_V >= 0");
        if (c.mu_b.support_inf() < 0.0) add("Feynman-Hellmann bound requires B >= 0, i.e. inf supp mu_B >= 0");
    }
    return diags;
}

} // namespace rbo::harness
