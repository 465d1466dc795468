#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "olg/config.hpp"
#include "olg/emit.hpp"
#include "olg/io.hpp"

using namespace olg;
namespace fs = std::filesystem;

namespace {

// A tiny but complete three-age data pack written to a scratch directory.
struct Fixture {
    fs::path dir;
    ModelConfig cfg;

    explicit Fixture(const std::string& name) {
        dir = fs::temp_directory_path() / ("olg_io_test_" + name);
        fs::remove_all(dir);
        fs::create_directories(dir);
        cfg.n_ages = 3;
        cfg.year0 = 2015;
        cfg.data_dir = dir.string();
        write_all();
    }
    ~Fixture() { fs::remove_all(dir); }

    void file(const std::string& name, const std::string& body) {
        std::ofstream out(dir / name);
        out << body;
    }
    void write_all() {
        std::string survival = "year,age,gender,s\n";
        for (int year : {2015, 2016})
            for (int age : {20, 21, 22})
                for (const char* g : {"male", "female"})
                    survival += std::to_string(year) + "," + std::to_string(age) + "," + g + "," +
                                (age == 22 ? "0.0" : "0.95") + "\n";
        file("survival.csv", survival);

        std::string pop = "age,gender,emp_type,mass\n";
        for (int age : {20, 21, 22})
            for (const char* g : {"male", "female"})
                for (const char* h : {"regular", "contingent"})
                    pop += std::to_string(age) + "," + g + "," + h + ",1.0\n";
        file("population0.csv", pop);

        file("type_shares.csv",
             "gender,emp_type,share\n"
             "male,regular,0.40\nmale,contingent,0.10\n"
             "female,regular,0.24\nfemale,contingent,0.26\n");
        file("cohort_growth.csv", "year,rate\n2015,-0.012\n2016,-0.011\n");

        std::string prod = "age,gender,emp_type,efficiency\n";
        for (int age : {20, 21})
            for (const char* g : {"male", "female"})
                for (const char* h : {"regular", "contingent"})
                    prod += std::to_string(age) + "," + g + "," + h + ",1.0\n";
        file("productivity.csv", prod);

        std::string health = "age,gender,medical,ltc,cert_rate\n";
        for (int age : {20, 21, 22})
            for (const char* g : {"male", "female"})
                health += std::to_string(age) + "," + g + ",0.01,0.1,0.05\n";
        file("health_costs.csv", health);

        file("copay_baseline.csv",
             "age,medical_rate,ltc_rate\n20,0.3,0.1\n21,0.3,0.1\n22,0.3,0.1\n");

        std::string taxes = "lower,rate,alpha,beta\n";
        ProgressiveTaxTable t = default_tax_table();
        for (const auto& b : t.brackets)
            taxes += csv::format_number(b.lower) + "," + csv::format_number(b.rate) + "," +
                     csv::format_number(b.intercept) + "," + csv::format_number(b.cumulative) + "\n";
        file("tax_table.csv", taxes);
    }
};

}  // namespace

TEST_CASE("bundled-style pack loads with zero warnings") {
    Fixture f("ok");
    InputData d = load_inputs(f.cfg);
    CHECK(d.survival(2015, Gender::male, 0) == doctest::Approx(0.95));
    CHECK(d.survival(2099, Gender::male, 0) == doctest::Approx(0.95));  // frozen
    CHECK(d.base_population.total(2015) == doctest::Approx(12.0));
    CHECK(d.shares(Gender::female, EmpType::contingent) == doctest::Approx(0.26));
    CHECK(d.growth(2015) == doctest::Approx(-0.012));
    CHECK(d.growth(2050) == doctest::Approx(-0.01));  // long-run value
    CHECK(d.efficiency[type_index(Gender::male, EmpType::regular)][0] == doctest::Approx(1.0));
    CHECK(d.tax_table.brackets.size() == 14);
    CHECK(d.file_hashes.size() == 8);
}

TEST_CASE("missing file names the file") {
    Fixture f("missing");
    fs::remove(f.dir / "survival.csv");
    CHECK_THROWS_WITH_AS(load_inputs(f.cfg), doctest::Contains("survival.csv"), ValidationError);
}

TEST_CASE("out-of-range survival cites the offending row") {
    Fixture f("badrow");
    std::string survival = "year,age,gender,s\n";
    for (int year : {2015})
        for (int age : {20, 21, 22})
            for (const char* g : {"male", "female"})
                survival += std::to_string(year) + "," + std::to_string(age) + "," + g + "," +
                            (age == 21 ? "1.2" : age == 22 ? "0.0" : "0.95") + "\n";
    f.file("survival.csv", survival);
    try {
        load_inputs(f.cfg);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        std::string msg = e.what();
        CHECK(msg.find("survival.csv") != std::string::npos);
        CHECK(msg.find("1.2") != std::string::npos);
        CHECK(msg.find(":") != std::string::npos);  // line number context
    }
}

TEST_CASE("incomplete coverage is a schema error") {
    Fixture f("coverage");
    f.file("copay_baseline.csv", "age,medical_rate,ltc_rate\n20,0.3,0.1\n21,0.3,0.1\n");
    CHECK_THROWS_AS(load_inputs(f.cfg), SchemaError);
}

TEST_CASE("efficiency extension holds the last working age flat") {
    Fixture f("ext");
    InputData d = load_inputs(f.cfg);
    // Raw profile stops after age index 1; extending the retirement age to
    // model age 3 fills index 2 with the last positive value.
    auto e = d.effective_efficiency(0, 4);
    CHECK(e[2] == doctest::Approx(1.0));
    auto base = d.effective_efficiency(0, 2);
    CHECK(base[2] == doctest::Approx(0.0));
}

TEST_CASE("config parsing, defaults and unknown keys") {
    Fixture f("cfg");
    f.file("model.conf", "beta = 0.98\n# comment\ndamping=0.4\n");
    ModelConfig cfg = ModelConfig::from_file((f.dir / "model.conf").string());
    CHECK(cfg.beta == doctest::Approx(0.98));
    CHECK(cfg.solver.damping == doctest::Approx(0.4));
    CHECK(cfg.tech.eta1 == doctest::Approx(0.64));  // untouched default
    f.file("bad.conf", "betta = 0.9\n");
    CHECK_THROWS_WITH_AS(ModelConfig::from_file((f.dir / "bad.conf").string()),
                         doctest::Contains("unknown key"), ValidationError);
    // Canonical dump is stable and covers the effective values.
    std::string dump = cfg.canonical_dump();
    CHECK(dump.find("beta=") != std::string::npos);
    CHECK(config_hash_hex(cfg) == config_hash_hex(cfg));
    ModelConfig other = cfg;
    other.beta = 0.97;
    CHECK(config_hash_hex(other) != config_hash_hex(cfg));
}

TEST_CASE("emitted aggregates are deterministic and round-trip to output precision") {
    Fixture f("emit");
    EconomyPath path;
    path.year0 = 2015;
    path.resize(8);
    for (int t = 0; t < 8; ++t) {
        path.gdp[t] = 1.0 + 0.01 * t + 1e-7 * t * t;
        path.y[t] = path.gdp[t] * 1.07;
        path.c[t] = 0.75 * path.gdp[t];
        path.tau_c[t] = 0.25 + 0.001 * t;
        path.w[t] = 1.23456789012345 + t;
        path.pension[t] = 0.1;
        path.health_gov[t] = 0.07;
    }
    auto file1 = (f.dir / "agg1.csv").string();
    auto file2 = (f.dir / "agg2.csv").string();
    emit_aggregates(path, file1, 2015, 2022, 2020);
    emit_aggregates(path, file2, 2015, 2022, 2020);
    std::ifstream a(file1), b(file2);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
    CHECK(!sa.empty());

    // Schema snapshot.
    csv::Table t = csv::read_file(file1);
    CHECK(t.header == aggregates_header());
    CHECK(t.rows.size() == 8);

    // The 2020 normalization column is exactly one.
    int cnorm = t.column("gdp_norm2020");
    int cyear = t.column("year");
    bool found = false;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        if (t.cell(r, cyear) == "2020") {
            CHECK(t.number(r, cnorm) == 1.0);
            found = true;
        }
    CHECK(found);

    // Round-trip: parsing and re-formatting reproduces the emitted text.
    int cw = t.column("w");
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        CHECK(csv::format_number(t.number(r, cw)) == t.cell(r, cw));
}

TEST_CASE("manifest carries hashes and solver metadata") {
    Fixture f("manifest");
    RunManifest m;
    m.command = "transition";
    m.scenario_id = "baseline";
    m.reform_id = "rr50";
    m.config_hash = config_hash_hex(f.cfg);
    m.data_hashes = {{"survival.csv", "abc"}};
    m.iterations = 42;
    m.final_residual = 1e-9;
    m.converged = true;
    auto file = (f.dir / "manifest.json").string();
    emit_manifest(m, file);
    std::ifstream in(file);
    std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(body.find("config_hash") != std::string::npos);
    CHECK(body.find("survival.csv") != std::string::npos);
    CHECK(body.find("42") != std::string::npos);
}
