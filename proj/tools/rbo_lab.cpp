// rbo-lab: command-line front end for the experiment harness.
//
//   rbo-lab <kind> --config PATH [--seed N] [--workers N] [--out DIR]
//   rbo-lab validate --config PATH
//
// Exit codes: 0 all checks passed, 2 check violations, 3 precondition failures,
// 1 usage or I/O errors.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "rbo/harness/config.hpp"
#include "rbo/harness/run.hpp"

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<std::string> out;
};

void add_common(CLI::App* sub, Options& o, bool runtime) {
    sub->add_option("--config", o.config, "experiment config (INI)")->required()->check(CLI::ExistingFile);
    if (!runtime) return;
    sub->add_option("--seed", o.seed, "override the master seed");
    sub->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "output directory");
}

void print_checks(const rbo::harness::RunRecord& rec) {
    for (const auto& c : rec.artifacts.checks) {
        std::printf("%-32s %-19s instances=%zu violations=%zu worst_margin=%.6g\n", c.name.c_str(),
                    rbo::to_string(c.status()), c.instances, c.violations, c.worst_margin);
        if (!c.diagnostic.empty()) std::printf("    %s\n", c.diagnostic.c_str());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random block operator experiments"};
    app.require_subcommand(1);
    Options opts;

    auto* validate = app.add_subcommand("validate", "check a config without computing anything");
    add_common(validate, opts, false);
    for (const auto& kind : rbo::harness::experiment_kinds()) {
        auto* sub = app.add_subcommand(kind, "run the '" + kind + "' experiment");
        add_common(sub, opts, true);
    }
    CLI11_PARSE(app, argc, argv);

    try {
        auto config = rbo::harness::load_config(opts.config);
        if (validate->parsed()) {
            const auto diags = rbo::harness::validate(config);
            for (const auto& d : diags) std::printf("%s\n", d.c_str());
            if (diags.empty()) std::printf("ok %s\n", rbo::harness::hash_hex(rbo::harness::config_hash(config)).c_str());
            return diags.empty() ? 0 : 3;
        }
        config.kind = app.get_subcommands().front()->get_name();
        if (opts.seed) config.seed = *opts.seed;
        if (opts.workers) config.workers = *opts.workers;
        if (opts.out) config.out = *opts.out;

        const auto rec = rbo::harness::run(config);
        for (const auto& d : rec.diagnostics) std::fprintf(stderr, "precondition: %s\n", d.c_str());
        print_checks(rec);
        std::printf("config %s  %.3fs  -> %s (exit %d)\n", rec.hash.c_str(), rec.wall_seconds, config.out.c_str(),
                    rec.exit_code());
        return rec.exit_code();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
