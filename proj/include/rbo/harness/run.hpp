#pragma once

#include <algorithm>
#include <chrono>
#include <deque>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "rbo/asymptotics.hpp"
#include "rbo/green.hpp"
#include "rbo/harness/config.hpp"
#include "rbo/inequalities.hpp"
#include "rbo/spectral.hpp"

namespace rbo::harness {

struct CsvTable {
    std::string name; // file name
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

inline std::string cell(double x) { return format_double(x); }
inline std::string cell(std::size_t x) { return std::to_string(x); }
inline std::string cell(int x) { return std::to_string(x); }
inline std::string cell(const Site& s) { return to_string(s); }

inline std::string to_csv(const CsvTable& t) {
    std::string out;
    auto line = [&](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out += ',';
            out += fields[i];
        }
        out += '\n';
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
    return out;
}

struct Artifacts {
    std::deque<CsvTable> tables; // deque: references stay valid while tables are added
    std::deque<CheckReport> checks;

    CheckReport& check(const std::string& name) {
        for (auto& c : checks)
            if (c.name == name) return c;
        checks.emplace_back(name);
        return checks.back();
    }
    CsvTable& table(const std::string& name, std::vector<std::string> header) {
        tables.push_back({name, std::move(header), {}});
        return tables.back();
    }
};

struct RunRecord {
    ExperimentConfig config;
    std::string hash;
    std::string version = kVersion;
    double wall_seconds = 0.0;
    std::vector<std::string> diagnostics; // validation failures; nothing ran
    Artifacts artifacts;

    int exit_code() const {
        if (!diagnostics.empty()) return 3;
        bool violated = false;
        for (const auto& c : artifacts.checks) {
            if (c.status() == CheckStatus::precondition_unmet) return 3;
            if (c.status() == CheckStatus::violated) violated = true;
        }
        return violated ? 2 : 0;
    }
};

namespace detail {

inline std::string length_tag(double l) { return "L" + std::to_string(static_cast<long long>(l)); }

inline Region cube_region(const ExperimentConfig& c, double l) { return region(CubeSpec(c.dim, l)); }

/// Pairing field mapped onto the case with β >= 0 (B -> -B is a unitary equivalence).
inline FieldSample oriented(FieldSample f, const GapEdge& g) {
    if (g.which == BetaCase::nonpositive)
        for (auto& b : f.b) b = -b;
    return f;
}

inline void run_spectrum(const ExperimentConfig& c, Artifacts& a) {
    auto& t = a.table("spectrum.csv", {"L", "realization", "index", "eigenvalue"});
    const double radius = finite_volume_radius(c.dim, c.disorder());
    for (double l : c.lengths) {
        const Region box = cube_region(c, l);
        auto spectra = map_realizations(c.realizations, c.workers,
                                        [&](std::size_t r) { return realization_spectrum(c.disorder(), box, r); });
        for (std::size_t r = 0; r < spectra.size(); ++r) {
            const auto& s = spectra[r];
            for (Eigen::Index j = 0; j < s.values.size(); ++j)
                t.add({cell(l), cell(r), cell(static_cast<std::size_t>(j)), cell(s.values(j))});
            a.check("spectrum_symmetry").merge(symmetry_check(s));
            a.check("spectral_radius").merge(radius_check(s, radius));
        }
    }
}

inline void run_ids(const ExperimentConfig& c, Artifacts& a) {
    for (double l : c.lengths) {
        auto& t = a.table("ids_" + length_tag(l) + ".csv", {"E", "mean_N", "stderr", "R"});
        const auto est = ids_monte_carlo(c.disorder(), cube_region(c, l), c.energies, c.realizations, c.workers);
        auto& mono = a.check("ids_monotone");
        for (std::size_t k = 0; k < est.energies.size(); ++k) {
            t.add({cell(est.energies[k]), cell(est.mean[k]), cell(est.std_error[k]), cell(c.realizations)});
            if (k && est.energies[k] >= est.energies[k - 1]) mono.record(est.mean[k] - est.mean[k - 1] + 1e-15);
        }
    }
}

inline BinSpec bins_of(const ExperimentConfig& c) {
    return {c.bins.at(0), c.bins.at(1), static_cast<std::size_t>(c.bins.at(2))};
}

inline void emit_dos(const ExperimentConfig& c, Artifacts& a, double l, const std::vector<Spectrum>& spectra) {
    const auto cfg = c.disorder();
    const BinSpec bins = bins_of(c);
    const bool w2 = !wegner2_diagnostic(cfg);
    const double w2_bound = w2 ? wegner2_dos_bound(cfg) : std::numeric_limits<double>::quiet_NaN();
    auto& t = a.table("dos_" + length_tag(l) + ".csv",
                      {"bin_lo", "bin_hi", "center", "density", "stderr", "R", "wegner_bound", "wegner1_bound"});
    std::vector<std::vector<double>> counts;
    for (const auto& s : spectra) counts.push_back(bin_counts(s, bins));
    const auto h = histogram_from_counts(bins, counts, CubeSpec(c.dim, l).volume());
    for (std::size_t k = 0; k < bins.bins; ++k) {
        const auto w1 = wegner1_bound(cfg, bins.center(k));
        t.add({cell(bins.edge(k)), cell(bins.edge(k + 1)), cell(bins.center(k)), cell(h.density[k]), cell(h.std_error[k]),
               cell(c.realizations), cell(w2_bound), cell(w1 ? *w1 : std::numeric_limits<double>::quiet_NaN())});
    }
    if (w2) a.check("dos_bound_uniform").merge(compare_histogram("dos_bound_uniform", h, [&](double) { return w2_bound; }));
    if (wegner1_bound(cfg, 0.0))
        a.check("dos_bound_energy_dependent")
            .merge(compare_histogram("dos_bound_energy_dependent", h, [&](double e) { return *wegner1_bound(cfg, e); }));
}

inline std::vector<Spectrum> ensemble_spectra(const ExperimentConfig& c, const Region& box) {
    return map_realizations(c.realizations, c.workers,
                            [&](std::size_t r) { return realization_spectrum(c.disorder(), box, r); });
}

inline void run_dos(const ExperimentConfig& c, Artifacts& a) {
    for (double l : c.lengths) emit_dos(c, a, l, ensemble_spectra(c, cube_region(c, l)));
}

inline void run_wegner(const ExperimentConfig& c, Artifacts& a) {
    const auto cfg = c.disorder();
    for (double l : c.lengths) {
        auto& t = a.table("wegner_" + length_tag(l) + ".csv", {"E", "eps", "mean", "stderr", "bound", "R"});
        const Region box = cube_region(c, l);
        const auto spectra = ensemble_spectra(c, box);
        for (double e : c.energies)
            for (double eps : c.eps) {
                const auto rep = wegner_from_spectra(cfg, spectra, box.size(), e, eps);
                a.check("wegner_finite_volume").merge(rep);
                if (rep.precondition_failed) continue;
                t.add({cell(e), cell(eps), cell(rep.value("mean")), cell(rep.value("std_error")), cell(rep.value("bound")),
                       cell(c.realizations)});
            }
        emit_dos(c, a, l, spectra);
    }
}

inline void run_gap(const ExperimentConfig& c, Artifacts& a) {
    const GapEdge g = gap_edge(c.disorder(), c.dim);
    for (double l : c.lengths) {
        auto& t = a.table("gap_" + length_tag(l) + ".csv", {"realization", "min_abs", "edge"});
        const Region box = cube_region(c, l);
        auto spectra = map_realizations(c.realizations, c.workers,
                                        [&](std::size_t r) { return realization_spectrum(c.disorder(), box, r); });
        auto& rep = a.check("gap");
        for (std::size_t r = 0; r < spectra.size(); ++r) {
            const double m = spectra[r].values.cwiseAbs().minCoeff();
            t.add({cell(r), cell(m), cell(g.edge)});
            rep.record(m - g.edge + 1e-9 * std::max(spectra[r].norm(), 1.0));
        }
    }
}

inline void run_interlace(const ExperimentConfig& c, Artifacts& a) {
    const GapEdge g = gap_edge(c.disorder(), c.dim);
    const double beta = std::abs(g.beta);
    const double radius = finite_volume_radius(c.dim, c.disorder());
    for (double l : c.lengths) {
        auto& t = a.table("interlace_" + length_tag(l) + ".csv",
                          {"realization", "check", "instances", "violations", "worst_margin"});
        const Region box = cube_region(c, l);
        auto reports = map_realizations(c.realizations, c.workers, [&](std::size_t r) {
            const auto f = oriented(sample_field(box, c.disorder(), r), g);
            std::vector<CheckReport> out;
            out.push_back(interlacing_check(f, beta));
            out.push_back(half_half_check(f, g.lambda, beta));
            out.push_back(bracketing_edge_check(f, g.lambda, beta));
            out.push_back(beta_map_check(build_h(box, BoundaryCondition::simple, f), beta));
            CheckReport tail("tail_bound");
            for (double eps : c.eps) tail.merge(finite_volume_tail_bound(f, g.lambda, beta, eps));
            out.push_back(tail);
            const auto s = eigensolve(assemble_block(f));
            out.push_back(symmetry_check(s));
            out.push_back(radius_check(s, radius));
            return out;
        });
        for (std::size_t r = 0; r < reports.size(); ++r)
            for (const auto& rep : reports[r]) {
                t.add({cell(r), rep.name, cell(rep.instances), cell(rep.violations), cell(rep.worst_margin)});
                a.check(rep.name).merge(rep);
            }
    }
}

inline NestedTriple triple_of(const ExperimentConfig& c) {
    return {cube_region(c, c.lengths[0]), cube_region(c, c.lengths[1]), cube_region(c, c.lengths[2])};
}

inline void run_green(const ExperimentConfig& c, Artifacts& a) {
    const NestedTriple tri = triple_of(c);
    auto& t = a.table("green.csv", {"realization", "E", "residual", "delta2", "delta3", "bound", "decomposition_residual"});
    struct Row {
        std::vector<std::optional<GriResidual>> gri;
        double decomposition = 0.0;
    };
    auto rows = map_realizations(c.realizations, c.workers, [&](std::size_t r) {
        const auto f = sample_field(tri.outer, c.disorder(), r);
        Row row;
        row.decomposition = decomposition_residual(f, tri.middle);
        for (double e : c.energies) {
            try {
                row.gri.emplace_back(gri_residual(tri, f, e));
            } catch (const SpectralProximityError&) {
                row.gri.emplace_back(std::nullopt);
            }
        }
        return row;
    });
    auto& gri = a.check("geometric_resolvent_identity");
    auto& dec = a.check("operator_decomposition");
    std::size_t skipped = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        dec.record(1e-14 - rows[r].decomposition);
        for (std::size_t k = 0; k < c.energies.size(); ++k) {
            const auto& x = rows[r].gri[k];
            if (!x) {
                ++skipped;
                continue;
            }
            t.add({cell(r), cell(c.energies[k]), cell(x->residual), cell(x->delta_middle), cell(x->delta_outer),
                   cell(x->contract()), cell(rows[r].decomposition)});
            gri.record(x->contract() - x->residual);
        }
    }
    gri.set("skipped_in_spectrum", static_cast<double>(skipped));
}

inline void run_ct(const ExperimentConfig& c, Artifacts& a) {
    for (double l : c.lengths) {
        auto& t = a.table("ct_" + length_tag(l) + ".csv",
                          {"realization", "E", "n", "m", "dist1", "block_norm", "ct_bound"});
        auto& fit = a.table("ct_fit_" + length_tag(l) + ".csv", {"realization", "E", "delta", "slope", "intercept"});
        const Region box = cube_region(c, l);
        auto rows = map_realizations(c.realizations, c.workers, [&](std::size_t r) {
            const auto op = assemble_block(sample_field(box, c.disorder(), r));
            const auto s = eigensolve(op);
            std::vector<std::optional<std::pair<double, std::vector<DecayPoint>>>> out;
            for (double e : c.energies) {
                try {
                    const auto g = resolvent(op, e, s);
                    out.emplace_back(std::make_pair(std::min(g.distance, 1.0), decay_profile(g)));
                } catch (const SpectralProximityError&) {
                    out.emplace_back(std::nullopt);
                }
            }
            return out;
        });
        auto& rep = a.check("combes_thomas");
        rep.tolerance = 1e-12;
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t k = 0; k < c.energies.size(); ++k) {
                if (!rows[r][k]) continue;
                const auto& [delta, prof] = *rows[r][k];
                for (const auto& p : prof) {
                    t.add({cell(r), cell(c.energies[k]), cell(p.n), cell(p.m), cell(p.distance), cell(p.block_norm),
                           cell(p.bound)});
                    rep.record(p.bound - p.block_norm);
                }
                const auto lf = decay_rate_fit(prof);
                fit.add({cell(r), cell(c.energies[k]), cell(delta), cell(lf.slope), cell(lf.intercept)});
            }
    }
}

inline void run_sli_edi(const ExperimentConfig& c, Artifacts& a) {
    const NestedTriple tri = triple_of(c);
    auto& t = a.table("sli_edi.csv", {"realization", "E", "check", "worst_margin", "passed"});
    auto rows = map_realizations(c.realizations, c.workers, [&](std::size_t r) {
        const auto f = sample_field(tri.outer, c.disorder(), r);
        const auto big = eigensolve(local_block(f, tri.outer));
        std::vector<std::pair<double, CheckReport>> out;
        for (double e : c.energies) {
            try {
                out.emplace_back(e, sli_check(tri, f, e));
            } catch (const SpectralProximityError&) {
            }
            Eigen::Index nearest = 0;
            (big.values.array() - e).abs().minCoeff(&nearest);
            try {
                out.emplace_back(big.values(nearest), edi_check(tri.middle, tri.outer, f, static_cast<std::size_t>(nearest)));
            } catch (const SpectralProximityError&) {
            }
        }
        return out;
    });
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (const auto& [e, rep] : rows[r]) {
            t.add({cell(r), cell(e), rep.name, cell(rep.worst_margin), rep.ok() ? "1" : "0"});
            a.check(rep.name).merge(rep);
        }
}

inline void run_tails(const ExperimentConfig& c, Artifacts& a) {
    const auto curve = tail_curve(c.disorder(), c.dim, c.eps, {c.tail_lmin, c.tail_lmax}, c.realizations, c.workers);
    auto& t = a.table("tails.csv", {"eps", "L", "delta_n", "stderr", "censored", "ln_eps", "ln_abs_ln_delta_n", "R"});
    for (const auto& p : curve.points) {
        const double y = p.delta_n > 0.0 ? std::log(std::abs(std::log(p.delta_n))) : std::numeric_limits<double>::quiet_NaN();
        t.add({cell(p.eps), cell(p.length), cell(p.delta_n), cell(p.std_error), p.censored ? "1" : "0", cell(std::log(p.eps)),
               cell(y), cell(c.realizations)});
    }
    const auto fit = tail_exponent_fit(curve);
    auto& f = a.table("tails_fit.csv", {"alpha_hat", "intercept", "points", "alpha_upper_target", "alpha_lower_target", "edge"});
    f.add({cell(fit.alpha), cell(fit.intercept), cell(fit.points), cell(curve.edge.alpha_upper), cell(curve.edge.alpha_lower),
           cell(curve.edge.edge)});
    a.check("tail_monotone").merge(tail_monotonicity(curve));
}

inline void run_suitability(const ExperimentConfig& c, Artifacts& a) {
    auto& t = a.table("suitability.csv", {"L", "theta", "E", "probability", "ci_lower", "ci_upper", "R", "gap_event",
                                          "certified", "l_star"});
    std::vector<double> lengths = c.lengths;
    std::sort(lengths.begin(), lengths.end());
    for (double theta : c.theta) {
        std::vector<SuitabilityReport> reps;
        for (double l : lengths) {
            reps.push_back(suitability_probability(c.disorder(), c.dim, l, theta, c.energies, c.realizations, c.workers));
            const auto& rep = reps.back();
            for (const auto& e : rep.energies)
                t.add({cell(l), cell(theta), cell(e.energy), cell(e.probability.estimate), cell(e.probability.lower),
                       cell(e.probability.upper), cell(c.realizations), cell(rep.gap_event.estimate),
                       cell(rep.implication.instances), cell(rep.l_star ? *rep.l_star : std::numeric_limits<double>::quiet_NaN())});
            a.check("suitability_implication").merge(rep.implication);
        }
        a.check("suitability_trend").merge(suitability_trend(reps));
    }
}

inline void run_correlator(const ExperimentConfig& c, Artifacts& a) {
    for (double l : c.lengths) {
        const Region box = cube_region(c, l);
        const auto prof = eigenfunction_correlator(c.disorder(), box, c.interval, {}, c.realizations, c.workers);
        auto& t = a.table("correlator_" + length_tag(l) + ".csv", {"n", "m", "dist1", "Q", "stderr", "R"});
        auto& nonneg = a.check("correlator_nonnegative");
        for (const auto& p : prof.points) {
            t.add({cell(p.n), cell(p.m), cell(p.distance), cell(p.q), cell(p.std_error), cell(c.realizations)});
            nonneg.record(p.q);
        }
        const auto fit = stretched_fit(prof, c.zeta);
        auto& f = a.table("correlator_fit_" + length_tag(l) + ".csv", {"zeta", "c_zeta", "slope", "residual", "points"});
        f.add({cell(fit.zeta), cell(fit.c_zeta), cell(fit.slope), cell(fit.residual), cell(fit.points)});
    }
}

inline void run_fh(const ExperimentConfig& c, Artifacts& a) {
    constexpr double h = 1e-5;
    for (double l : c.lengths) {
        auto& t = a.table("fh_" + length_tag(l) + ".csv",
                          {"realization", "index", "energy", "fd_sum", "richardson_error", "analytic"});
        const Region box = cube_region(c, l);
        auto rows = map_realizations(c.realizations, c.workers, [&](std::size_t r) {
            const auto f = sample_field(box, c.disorder(), r);
            const auto s = eigensolve(assemble_block(f));
            std::vector<std::pair<std::size_t, FeynmanHellmannSum>> out;
            for (Eigen::Index k = 0; k < s.values.size(); ++k) {
                if (!(s.values(k) > 0.0)) continue;
                double gap = std::numeric_limits<double>::infinity();
                if (k > 0) gap = std::min(gap, s.values(k) - s.values(k - 1));
                if (k + 1 < s.values.size()) gap = std::min(gap, s.values(k + 1) - s.values(k));
                if (!(gap > 10.0 * h)) continue; // not simple at step scale
                out.emplace_back(static_cast<std::size_t>(k), feynman_hellmann_sum(f, static_cast<std::size_t>(k), h));
            }
            return out;
        });
        auto& rep = a.check("feynman_hellmann");
        rep.tolerance = 1e-6;
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (const auto& [k, fh] : rows[r]) {
                t.add({cell(r), cell(k), cell(fh.energy), cell(fh.finite_difference), cell(fh.richardson_error),
                       cell(fh.analytic)});
                rep.record(fh.finite_difference - 1.0);
            }
    }
}

} // namespace detail

/// Runs the experiment without touching the file system.
inline RunRecord execute(const ExperimentConfig& c) {
    RunRecord rec;
    rec.config = c;
    rec.hash = hash_hex(config_hash(c));
    rec.diagnostics = validate(c);
    if (!rec.diagnostics.empty()) return rec;

    const auto t0 = std::chrono::steady_clock::now();
    auto& a = rec.artifacts;
    const auto& k = c.kind;
    if (k == "spectrum") detail::run_spectrum(c, a);
    else if (k == "ids") detail::run_ids(c, a);
    else if (k == "dos") detail::run_dos(c, a);
    else if (k == "wegner") detail::run_wegner(c, a);
    else if (k == "gap") detail::run_gap(c, a);
    else if (k == "interlace") detail::run_interlace(c, a);
    else if (k == "green") detail::run_green(c, a);
    else if (k == "ct") detail::run_ct(c, a);
    else if (k == "sli-edi") detail::run_sli_edi(c, a);
    else if (k == "tails") detail::run_tails(c, a);
    else if (k == "suitability") detail::run_suitability(c, a);
    else if (k == "correlator") detail::run_correlator(c, a);
    else if (k == "fh") detail::run_fh(c, a);
    if (c.realizations == 0)
        for (auto& t : a.tables) t.rows.clear(); // an empty ensemble carries no data
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

inline nlohmann::json to_json(const CheckReport& r) {
    nlohmann::json j;
    j["name"] = r.name;
    j["status"] = to_string(r.status());
    j["instances"] = r.instances;
    j["violations"] = r.violations;
    j["worst_margin"] = std::isfinite(r.worst_margin) ? nlohmann::json(r.worst_margin) : nlohmann::json(nullptr);
    j["tolerance"] = r.tolerance;
    if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
    j["parameters"] = r.parameters;
    nlohmann::json values = nlohmann::json::object();
    for (const auto& [key, v] : r.values) values[key] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
    j["values"] = values;
    return j;
}

inline nlohmann::json to_json(const RunRecord& rec) {
    nlohmann::json j;
    j["config_hash"] = rec.hash;
    j["code_version"] = rec.version;
    j["config"] = serialize(rec.config);
    j["wall_seconds"] = rec.wall_seconds;
    j["exit_code"] = rec.exit_code();
    j["diagnostics"] = rec.diagnostics;
    j["seeding"] = {{"master_seed", rec.config.seed},
                    {"realizations", rec.config.realizations},
                    {"scheme", "site value = quantile(splitmix64 hash of (seed, realization, family, site))"}};
    nlohmann::json outputs = nlohmann::json::array();
    for (const auto& t : rec.artifacts.tables) outputs.push_back({{"file", t.name}, {"rows", t.rows.size()}});
    j["outputs"] = outputs;
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : rec.artifacts.checks) checks.push_back(to_json(c));
    j["checks"] = checks;
    return j;
}

/// Writes every table plus run.json into `dir`.
inline void write_artifacts(const RunRecord& rec, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& t : rec.artifacts.tables) {
        std::ofstream f(dir / t.name, std::ios::binary);
        f << to_csv(t);
        if (!f) throw std::runtime_error("cannot write " + (dir / t.name).string());
    }
    std::ofstream j(dir / "run.json", std::ios::binary);
    j << to_json(rec).dump(2) << "\n";
}

inline RunRecord run(const ExperimentConfig& c) {
    auto rec = execute(c);
    write_artifacts(rec, c.out);
    return rec;
}

} // namespace rbo::harness
