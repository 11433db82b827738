#include "doctest.h"

#include "santalo/harness.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace santalo;
using namespace santalo::harness;
using json = nlohmann::json;

namespace {

std::string config_error(const std::string& text) {
    try {
        parse_config(text, "cfg.json");
    } catch (const ConfigInvalid& e) {
        return e.what();
    }
    return "";
}

std::string csv_of(const RunReport& r) {
    std::ostringstream os;
    write_csv(os, r.ledgers());
    return os.str();
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string kSmall = R"({
  "name": "small",
  "seed": 11,
  "experiments": [
    {"kind": "taylor", "_note": "fixed fixture"},
    {"kind": "bs-random", "params": {"count": 4}},
    {"kind": "talagrand-random", "name": "a-talagrand", "params": {"pairs": 3, "families": ["gaussian"]}}
  ]
})";

}  // namespace

TEST_CASE("harness: registry covers every module") {
    std::set<std::string> modules;
    for (const auto& k : registry()) {
        modules.insert(k.module);
        CHECK(k.run);
        CHECK(k.defaults.is_object());
    }
    CHECK(modules == std::set<std::string>{"santalo", "sconcave", "transport", "sphere", "linearize"});
    CHECK_THROWS_AS(find_kind("nope"), ConfigInvalid);
}

TEST_CASE("harness: configs merge defaults and keep notes out") {
    const auto c = parse_config(R"({"kind": "mahler-hanner", "params": {"dims": [3], "_note": "x"}})");
    REQUIRE(c.experiments.size() == 1);
    CHECK(c.name == "mahler-hanner");
    CHECK(c.experiments[0].params["dims"] == json::array({3}));
    CHECK(c.experiments[0].params["rel_tol"] == 1e-9);
    CHECK(!c.experiments[0].params.contains("_note"));

    const auto s = parse_config(kSmall);
    REQUIRE(s.experiments.size() == 3);
    CHECK(s.experiments[1].seed == 11u);
    CHECK(s.experiments[2].name == "a-talagrand");
}

TEST_CASE("harness: malformed configs name the line or the field") {
    const auto syntax = config_error("{\n  \"kind\": \"taylor\",\n  \"params\": {\"radii\": [0.1,]}\n}");
    CHECK(syntax.find("cfg.json:3:") != std::string::npos);
    CHECK(syntax.find("syntax error") != std::string::npos);

    CHECK(config_error(R"({"kind": "bs-random", "params": {"count": 3}})").find("<root>.seed: required") !=
          std::string::npos);
    CHECK(config_error(R"({"experiments": [{"kind": "taylor"}, {"kind": "bs-random", "seed": 1, "params": {"count": 2.5}}]})")
              .find("experiments[1].params.count: expected an integer, got a number") != std::string::npos);
    CHECK(config_error(R"({"kind": "taylor", "params": {"radius": [0.1]}})").find("<root>.params.radius: unknown parameter") !=
          std::string::npos);
    CHECK(config_error(R"({"kind": "taylor", "params": {"radii": [0.1, -1]}})").find("<root>.params.radii: must lie in") !=
          std::string::npos);
    CHECK(config_error(R"({"kind": "taylor", "params": {"radii": ["a"]}})").find("expected an array of a number") !=
          std::string::npos);
    CHECK(config_error(R"({"experiments": [{"kind": "taylr"}]})").find("experiments[0].kind: unknown experiment kind") !=
          std::string::npos);
    CHECK(config_error(R"({"experiments": [{"kind": "taylor"}, {"kind": "taylor"}]})").find("duplicate experiment name") !=
          std::string::npos);
    CHECK(config_error(R"({"experiments": []})").find("experiments: must not be empty") != std::string::npos);
    CHECK(config_error(R"({"experiments": [{"kind": "taylor", "seed": -1}]})").find("experiments[0].seed") !=
          std::string::npos);
    CHECK(config_error(R"([1, 2])").find("expected an object") != std::string::npos);
    CHECK(config_error(R"({"kind": "taylor", "extra": 1})").find("extra: unknown field") != std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigInvalid);
}

TEST_CASE("harness: runs are deterministic and ordered by experiment name") {
    const auto cfg = parse_config(kSmall);
    const auto a = run(cfg, {1, std::nullopt});
    const auto b = run(cfg, {3, std::nullopt});
    CHECK(csv_of(a) == csv_of(b));
    CHECK(a.input_hash == b.input_hash);
    CHECK(a.input_hash.size() == 64);
    REQUIRE(a.experiments.size() == 3);
    CHECK(a.experiments[0].config.name == "a-talagrand");
    CHECK(a.experiments[1].config.name == "bs-random");
    CHECK(a.experiments[2].config.name == "taylor");
    for (const auto& l : a.ledgers()) CHECK(l.verdict != Verdict::Violated);
    CHECK(a.ledgers().front().name.rfind("a-talagrand/gaussian/", 0) == 0);
    CHECK(exit_code(a) == 0);
}

TEST_CASE("harness: the seed override changes randomized fixtures only") {
    const auto cfg = parse_config(kSmall);
    const auto base = run(cfg);
    const auto over = run(cfg, {1, 12345});
    CHECK(over.input_hash != base.input_hash);
    CHECK(over.experiments[1].seed == 12345u);
    auto rows = [](const RunReport& r, std::size_t i) {
        std::ostringstream os;
        write_csv(os, r.experiments[i].result.ledgers);
        return os.str();
    };
    CHECK(rows(base, 1) != rows(over, 1));
    CHECK(rows(base, 2) == rows(over, 2));  // taylor takes no seed

    ::setenv("SANTALO_LAB_SEED", "77", 1);
    CHECK(seed_from_env() == 77u);
    ::setenv("SANTALO_LAB_SEED", "7x", 1);
    CHECK_THROWS_AS(seed_from_env(), ConfigInvalid);
    ::unsetenv("SANTALO_LAB_SEED");
    CHECK(!seed_from_env());
}

TEST_CASE("harness: experiment errors become Skipped rows without stopping siblings") {
    const auto cfg = parse_config(R"({"experiments": [
        {"kind": "nonsym-cap", "_note": "no node of the 8-point circle lies in the cap",
         "params": {"circle_half": 4, "radius": 0.01}},
        {"kind": "cs-constants", "params": {"dims": [1]}}]})");
    const auto r = run(cfg, {2, std::nullopt});
    REQUIRE(r.experiments.size() == 2);
    const auto& failed = r.experiments[1];
    CHECK(failed.config.name == "nonsym-cap");
    CHECK(failed.error.find("EmptySet") != std::string::npos);
    REQUIRE(failed.result.ledgers.size() == 1);
    CHECK(failed.result.ledgers[0].name == "nonsym-cap/error");
    CHECK(failed.result.ledgers[0].verdict == Verdict::Skipped);
    CHECK(failed.result.ledgers[0].note.rfind("error: EmptySet", 0) == 0);
    CHECK(r.experiments[0].result.ledgers.size() == 5);
    CHECK(exit_code(r) == 0);
}

TEST_CASE("harness: exit code reflects Violated rows") {
    RunReport r;
    ExperimentReport e;
    e.config.name = "x";
    e.config.kind = "taylor";
    e.result.ledgers.push_back(make_ledger("x/ok", 1.0, 2.0, 0.0, "p"));
    r.experiments.push_back(e);
    CHECK(exit_code(r) == 0);
    r.experiments[0].result.ledgers.push_back(make_ledger("x/bad", 2.0, 1.0, 0.0, "p"));
    CHECK(exit_code(r) == 2);
    CHECK(summary_table(r).find("Violated: x/bad") != std::string::npos);
}

TEST_CASE("harness: outputs") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "santalo-harness-test";
    fs::remove_all(dir);
    const auto r = run(parse_config(R"({"kind": "taylor", "params": {"radii": [0.1, 0.01]}})"));
    write_outputs(r, dir.string());
    const auto csv = slurp(dir / "ledgers.csv");
    CHECK(csv.rfind(ledger_csv_header(), 0) == 0);
    CHECK(csv.find("seconds") == std::string::npos);
    const auto report = json::parse(slurp(dir / "report.json"));
    CHECK(report["experiments"][0]["params"]["radii"] == json::array({0.1, 0.01}));
    CHECK(report["experiments"][0]["module"] == "linearize");
    CHECK(report["versions"].contains("eigen"));
    CHECK(report["input_hash"] == r.input_hash);
    std::istringstream jl(slurp(dir / "ledgers.jsonl"));
    std::string line;
    int lines = 0;
    while (std::getline(jl, line)) ++lines;
    CHECK(lines == int(r.ledgers().size()));
    const auto plot = slurp(dir / "plots" / "taylor__cauchy1.dat");
    CHECK(plot.rfind("# radius\tnormalized residual\n0.1\t", 0) == 0);
    fs::remove_all(dir);
}

TEST_CASE("harness: example configs") {
    const std::string root = SANTALO_SOURCE_DIR;
    const auto m = run(load_config(root + "/tools/configs/mahler-hanner-n3.json"));
    CHECK(m.ledgers().size() == 8);
    for (const auto& l : m.ledgers()) CHECK(l.verdict == Verdict::Equality);

    const auto k = run(load_config(root + "/tools/configs/kolesnikov-s1-suite.json"));
    for (const auto& l : k.ledgers()) {
        if (l.name.find("sigma-sigma") != std::string::npos) continue;
        CAPTURE(l.name);
        CHECK(l.verdict == Verdict::Holds);
        CHECK(l.gap > 0.0);
    }
    const auto bad = config_error(slurp(root + "/tools/configs/malformed.json"));
    CHECK(bad.find("cfg.json:4:") != std::string::npos);
}

TEST_CASE("harness: suites") {
    const auto names = suite_names();
    CHECK(names == std::vector<std::string>{"direct-bs", "linearize", "s-concave", "sphere", "transport", "all"});
    std::size_t total = 0;
    for (const auto& n : names)
        if (n != "all") total += suite(n).experiments.size();
    CHECK(suite("all").experiments.size() == total);
    CHECK(suite("direct-bs").experiments.size() == 4);
    CHECK_THROWS_AS(suite("everything"), UnknownSuite);
}
