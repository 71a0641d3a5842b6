#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rbo/harness/run.hpp"

using namespace rbo;
using namespace rbo::harness;

namespace {

ExperimentConfig spectrum_config() {
    ExperimentConfig c;
    c.kind = "spectrum";
    c.lengths = {3};
    return c;
}

const CsvTable* find_table(const RunRecord& rec, const std::string& name) {
    for (const auto& t : rec.artifacts.tables)
        if (t.name == name) return &t;
    return nullptr;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool mentions(const std::vector<std::string>& diags, const std::string& needle) {
    for (const auto& d : diags)
        if (d.find(needle) != std::string::npos) return true;
    return false;
}

} // namespace

TEST(Config, RoundTrip) {
    ExperimentConfig c;
    c.kind = "suitability";
    c.dim = 2;
    c.lengths = {12, 24};
    c.mu_v = SiteMeasure::uniform(0.1, 2.0 / 3.0);
    c.mu_b = SiteMeasure::two_point(-1, 0.3, 0.25);
    c.realizations = 17;
    c.seed = 123456789012345ULL;
    c.energies = {0.0, 1e-7, -0.3};
    c.theta = {2.5, 4};
    c.bins = {-3, 3, 12};
    c.interval = 0.1;
    c.workers = 3;
    c.out = "some/dir";
    EXPECT_EQ(parse_config(serialize(c)), c);
    EXPECT_EQ(parse_config(serialize(parse_config(serialize(c)))), c);
}

TEST(Config, HashIgnoresRuntimeFields) {
    auto a = spectrum_config();
    auto b = a;
    b.workers = 8;
    b.out = "elsewhere";
    EXPECT_EQ(config_hash(a), config_hash(b));
    b.seed = 2;
    EXPECT_NE(config_hash(a), config_hash(b));
    EXPECT_EQ(hash_hex(config_hash(a)).size(), 16u);
}

TEST(Config, ParseRejections) {
    EXPECT_THROW(parse_config(std::string("[experiment]\nkind = spectrum\ncolour = blue\n")), std::invalid_argument);
    EXPECT_THROW(parse_config(std::string("[experiment]\nrealizations = -4\n")), std::invalid_argument);
    EXPECT_THROW(parse_config(std::string("[grid]\ninterval = 1, 2\n")), std::invalid_argument);
    EXPECT_THROW(parse_config(std::string("[disorder]\nmu_v = gaussian(0,1)\n")), std::invalid_argument);
    EXPECT_THROW(load_config("/nonexistent/config.ini"), std::invalid_argument);
}

TEST(Validate, Examples) {
    ExperimentConfig w;
    w.kind = "wegner";
    w.lengths = {50};
    w.mu_v = SiteMeasure::uniform(-1, 1);
    w.mu_b = SiteMeasure::uniform(0, 1);
    w.energies = {2};
    w.eps = {0.1};
    w.bins = {-6, 6, 24};
    EXPECT_TRUE(mentions(validate(w), "inf supp mu_V >= 0"));
    w.mu_v = SiteMeasure::uniform(0, 1);
    EXPECT_TRUE(validate(w).empty());
    w.eps = {1.0};
    EXPECT_TRUE(mentions(validate(w), "3 eps < E"));

    ExperimentConfig s;
    s.kind = "suitability";
    s.lengths = {10};
    s.mu_v = SiteMeasure::uniform(1, 2);
    s.energies = {0};
    s.theta = {1.5};
    EXPECT_TRUE(mentions(validate(s), "L ∈ 6N"));
    s.lengths = {12};
    EXPECT_TRUE(validate(s).empty());
    s.energies = {2.0};
    EXPECT_TRUE(mentions(validate(s), "outside [-a_L, a_L]"));

    EXPECT_TRUE(validate(spectrum_config()).empty());
}

TEST(Validate, CapsAndShapes) {
    auto c = spectrum_config();
    c.lengths = {2049};
    EXPECT_TRUE(mentions(validate(c), "above the cap"));
    c.lengths = {2048};
    EXPECT_TRUE(validate(c).empty());
    c.lengths = {4.5};
    EXPECT_FALSE(validate(c).empty());
    c.kind = "nonsense";
    EXPECT_TRUE(mentions(validate(c), "unknown experiment kind"));

    ExperimentConfig g;
    g.kind = "green";
    g.lengths = {5, 5, 9};
    g.energies = {0};
    EXPECT_TRUE(mentions(validate(g), "strictly nested"));
    g.lengths = {1, 5, 9};
    EXPECT_TRUE(validate(g).empty());
}

TEST(Validate, ShippedConfigsAreClean) {
    std::size_t seen = 0;
    for (const auto& entry : std::filesystem::directory_iterator(RBO_CONFIG_DIR)) {
        if (entry.path().extension() != ".ini") continue;
        const auto c = load_config(entry.path().string());
        EXPECT_TRUE(validate(c).empty()) << entry.path();
        ++seen;
    }
    EXPECT_EQ(seen, experiment_kinds().size());
}

TEST(Run, SpectrumOfFreeInterval) {
    const auto rec = execute(spectrum_config());
    EXPECT_EQ(rec.exit_code(), 0);
    const auto* t = find_table(rec, "spectrum.csv");
    ASSERT_NE(t, nullptr);
    ASSERT_EQ(t->rows.size(), 6u);
    const double r2 = std::sqrt(2.0);
    const std::vector<double> expect{-2 - r2, -2, -2 + r2, 2 - r2, 2, 2 + r2};
    for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(std::stod(t->rows[i][3]), expect[i], 1e-14);
}

TEST(Run, GapWithBothFields) {
    ExperimentConfig c;
    c.kind = "gap";
    c.lengths = {20};
    c.mu_v = SiteMeasure::uniform(1, 2);
    c.mu_b = SiteMeasure::uniform(1, 2);
    c.realizations = 100;
    const auto rec = execute(c);
    EXPECT_EQ(rec.exit_code(), 0);
    const auto* t = find_table(rec, "gap_L20.csv");
    ASSERT_NE(t, nullptr);
    ASSERT_EQ(t->rows.size(), 100u);
    for (const auto& row : t->rows) EXPECT_GE(std::stod(row[1]), std::sqrt(2.0) - 1e-12);
}

TEST(Run, PreconditionExitCode) {
    ExperimentConfig c;
    c.kind = "wegner";
    c.mu_v = SiteMeasure::point_mass(1);
    c.mu_b = SiteMeasure::uniform(0, 1);
    c.energies = {2};
    c.eps = {0.1};
    c.bins = {0, 1, 2};
    const auto rec = execute(c);
    EXPECT_EQ(rec.exit_code(), 3);
    EXPECT_TRUE(rec.artifacts.tables.empty());
}

TEST(Run, CsvColumns) {
    ExperimentConfig ids;
    ids.kind = "ids";
    ids.mu_v = SiteMeasure::uniform(0, 1);
    ids.mu_b = SiteMeasure::uniform(0, 1);
    ids.energies = {-1, 0, 1};
    ids.realizations = 3;
    const auto a = execute(ids);
    const auto* t = find_table(a, "ids_L10.csv");
    ASSERT_NE(t, nullptr);
    EXPECT_EQ(t->header, (std::vector<std::string>{"E", "mean_N", "stderr", "R"}));

    ExperimentConfig dos = ids;
    dos.kind = "dos";
    dos.bins = {-6, 6, 12};
    const auto b = execute(dos);
    const auto* d = find_table(b, "dos_L10.csv");
    ASSERT_NE(d, nullptr);
    const auto col = std::find(d->header.begin(), d->header.end(), "wegner_bound") - d->header.begin();
    ASSERT_LT(col, static_cast<long>(d->header.size()));
    for (const auto& row : d->rows) EXPECT_EQ(std::stod(row[static_cast<std::size_t>(col)]), 8.0);
}

TEST(Run, EmptyEnsembleWritesHeadersOnly) {
    auto c = spectrum_config();
    c.realizations = 0;
    c.out = (std::filesystem::temp_directory_path() / "rbo_empty_run").string();
    std::filesystem::remove_all(c.out);
    const auto rec = run(c);
    ASSERT_FALSE(rec.artifacts.tables.empty());
    const std::string text = slurp(std::filesystem::path(c.out) / "spectrum.csv");
    EXPECT_EQ(text, "L,realization,index,eigenvalue\n");
    EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(c.out) / "run.json"));
    std::filesystem::remove_all(c.out);
}

TEST(Run, SidecarCarriesHash) {
    auto c = spectrum_config();
    const auto j = to_json(execute(c));
    EXPECT_EQ(j["config_hash"], hash_hex(config_hash(c)));
    EXPECT_EQ(j["code_version"], kVersion);
    EXPECT_EQ(j["exit_code"], 0);
}

TEST(Run, WorkerCountDoesNotChangeBytes) {
    ExperimentConfig c;
    c.kind = "ids";
    c.lengths = {15, 21};
    c.mu_v = SiteMeasure::uniform(0, 2);
    c.mu_b = SiteMeasure::uniform(-1, 1);
    c.energies = {-2, -0.5, 0.25, 1.75};
    c.realizations = 37;
    c.seed = 99;
    auto one = c;
    one.workers = 1;
    auto eight = c;
    eight.workers = 8;
    const auto a = execute(one);
    const auto b = execute(eight);
    const auto again = execute(one);
    ASSERT_EQ(a.artifacts.tables.size(), b.artifacts.tables.size());
    for (std::size_t i = 0; i < a.artifacts.tables.size(); ++i) {
        EXPECT_EQ(to_csv(a.artifacts.tables[i]), to_csv(b.artifacts.tables[i]));
        EXPECT_EQ(to_csv(a.artifacts.tables[i]), to_csv(again.artifacts.tables[i]));
    }
}
