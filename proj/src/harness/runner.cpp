#include "santalo/harness.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#ifndef SANTALO_LAB_VERSION
#define SANTALO_LAB_VERSION "0.0.0"
#endif

namespace santalo::harness {

namespace {

using json = nlohmann::json;

[[noreturn]] void invalid(const std::string& origin, const std::string& field, const std::string& what) {
    throw ConfigInvalid(origin + ": " + field + ": " + what);
}

bool is_note(const std::string& key) { return !key.empty() && key.front() == '_'; }

std::string type_name(const json& j) {
    if (j.is_number_integer()) return "an integer";
    if (j.is_number()) return "a number";
    if (j.is_string()) return "a string";
    if (j.is_boolean()) return "a boolean";
    if (j.is_array()) return "an array";
    if (j.is_object()) return "an object";
    return "null";
}

// A value matches the default's type; integers are accepted where numbers are.
bool same_type(const json& def, const json& v) {
    if (def.is_number_integer()) return v.is_number_integer();
    if (def.is_number()) return v.is_number();
    if (def.is_array()) {
        if (!v.is_array()) return false;
        if (def.empty()) return true;
        for (const auto& e : v)
            if (!same_type(def.front(), e)) return false;
        return true;
    }
    return def.type() == v.type();
}

std::uint64_t parse_seed(const json& j, const std::string& origin, const std::string& field) {
    if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0))
        invalid(origin, field, "expected a nonnegative integer, got " + type_name(j));
    return j.get<std::uint64_t>();
}

ExperimentConfig parse_experiment(const json& e, const std::string& origin, const std::string& path,
                                  std::optional<std::uint64_t> top_seed) {
    if (!e.is_object()) invalid(origin, path, "expected an object, got " + type_name(e));
    for (const auto& [k, v] : e.items())
        if (!is_note(k) && k != "kind" && k != "name" && k != "params" && k != "seed")
            invalid(origin, path + "." + k, "unknown field");
    if (!e.contains("kind")) invalid(origin, path + ".kind", "required field missing");
    if (!e["kind"].is_string()) invalid(origin, path + ".kind", "expected a string, got " + type_name(e["kind"]));
    ExperimentConfig ec;
    ec.kind = e["kind"].get<std::string>();
    const ExperimentKind* kind = nullptr;
    try {
        kind = &find_kind(ec.kind);
    } catch (const ConfigInvalid&) {
        std::string known;
        for (const auto& k : registry()) known += (known.empty() ? "" : ", ") + k.name;
        invalid(origin, path + ".kind", "unknown experiment kind '" + ec.kind + "' (known: " + known + ")");
    }
    ec.name = ec.kind;
    if (e.contains("name")) {
        if (!e["name"].is_string() || e["name"].get<std::string>().empty())
            invalid(origin, path + ".name", "expected a nonempty string");
        ec.name = e["name"].get<std::string>();
        if (ec.name.find_first_of("/\\") != std::string::npos) invalid(origin, path + ".name", "must not contain a slash");
    }
    ec.params = kind->defaults.is_null() ? json::object() : kind->defaults;
    if (e.contains("params")) {
        const auto& p = e["params"];
        if (!p.is_object()) invalid(origin, path + ".params", "expected an object, got " + type_name(p));
        for (const auto& [k, v] : p.items()) {
            if (is_note(k)) continue;
            if (!ec.params.contains(k)) {
                std::string known;
                for (const auto& [dk, dv] : kind->defaults.items()) known += (known.empty() ? "" : ", ") + dk;
                invalid(origin, path + ".params." + k,
                        "unknown parameter for kind '" + ec.kind + "'" + (known.empty() ? "" : " (known: " + known + ")"));
            }
            if (!same_type(ec.params[k], v))
                invalid(origin, path + ".params." + k,
                        "expected " + type_name(ec.params[k]) +
                            (ec.params[k].is_array() && !ec.params[k].empty() ? " of " + type_name(ec.params[k].front())
                                                                               : std::string()) +
                            ", got " + type_name(v));
            ec.params[k] = v;
        }
    }
    if (kind->check) {
        try {
            kind->check(ec.params);
        } catch (const ConfigInvalid& err) {
            // "ConfigInvalid: <field>: <what>"
            std::string msg = err.what();
            const std::string prefix = "ConfigInvalid: ";
            if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
            throw ConfigInvalid(origin + ": " + path + ".params." + msg);
        }
    }
    if (e.contains("seed")) ec.seed = parse_seed(e["seed"], origin, path + ".seed");
    else ec.seed = top_seed;
    if (kind->randomized && !ec.seed)
        invalid(origin, path + ".seed", "required for the randomized kind '" + ec.kind + "'");
    return ec;
}

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

json versions() {
    return {{"santalo_lab", SANTALO_LAB_VERSION},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"boost", BOOST_LIB_VERSION},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"compiler", __VERSION__}};
}

json resolved(const ExperimentConfig& e, std::uint64_t seed) {
    json j = {{"name", e.name}, {"kind", e.kind}, {"params", e.params}};
    if (find_kind(e.kind).randomized) j["seed"] = seed;
    return j;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // locate the byte offset as line:column
        std::size_t line = 1, col = 1;
        const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::string what = e.what();
        const auto pos = what.find("syntax error");
        if (pos != std::string::npos) what = what.substr(pos);
        throw ConfigInvalid(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
    }
    if (!j.is_object()) invalid(origin, "<root>", "expected an object, got " + type_name(j));
    RunConfig cfg;
    cfg.source = j;
    const bool inline_form = j.contains("kind");
    for (const auto& [k, v] : j.items()) {
        if (is_note(k)) continue;
        const bool known = k == "name" || k == "out" || k == "seed" || (inline_form ? k == "params" || k == "kind"
                                                                                     : k == "experiments");
        if (!known) invalid(origin, k, inline_form && k == "experiments" ? "give either kind or experiments, not both"
                                                                         : "unknown field");
    }
    if (j.contains("name")) {
        if (!j["name"].is_string()) invalid(origin, "name", "expected a string, got " + type_name(j["name"]));
        cfg.name = j["name"].get<std::string>();
    }
    if (j.contains("out")) {
        if (!j["out"].is_string()) invalid(origin, "out", "expected a string, got " + type_name(j["out"]));
        cfg.out_dir = j["out"].get<std::string>();
    }
    std::optional<std::uint64_t> top_seed;
    if (j.contains("seed")) top_seed = parse_seed(j["seed"], origin, "seed");
    if (inline_form) {
        json e = {{"kind", j["kind"]}};
        if (j.contains("params")) e["params"] = j["params"];
        if (j.contains("name")) e["name"] = j["name"];
        cfg.experiments.push_back(parse_experiment(e, origin, "<root>", top_seed));
    } else {
        if (!j.contains("experiments")) invalid(origin, "experiments", "required field missing (or give kind inline)");
        const auto& xs = j["experiments"];
        if (!xs.is_array()) invalid(origin, "experiments", "expected an array, got " + type_name(xs));
        if (xs.empty()) invalid(origin, "experiments", "must not be empty");
        std::set<std::string> names;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const std::string path = "experiments[" + std::to_string(i) + "]";
            auto ec = parse_experiment(xs[i], origin, path, top_seed);
            if (!names.insert(ec.name).second)
                invalid(origin, path + ".name", "duplicate experiment name '" + ec.name + "'");
            cfg.experiments.push_back(std::move(ec));
        }
    }
    if (cfg.name.empty()) cfg.name = cfg.experiments.size() == 1 ? cfg.experiments.front().name : "run";
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid(path + ": cannot open the file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::optional<std::uint64_t> seed_from_env() {
    const char* s = std::getenv("SANTALO_LAB_SEED");
    if (s == nullptr || *s == '\0') return std::nullopt;
    const std::string v = s;
    if (v.find_first_not_of("0123456789") != std::string::npos || v.size() > 20)
        throw ConfigInvalid("SANTALO_LAB_SEED: expected an unsigned integer, got '" + v + "'");
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        throw ConfigInvalid("SANTALO_LAB_SEED: out of range: '" + v + "'");
    }
}

RunReport run(const RunConfig& config, const RunOptions& options) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    RunReport rep;
    rep.name = config.name;
    rep.config = config.source;
    rep.versions = versions();

    std::vector<std::size_t> order(config.experiments.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return config.experiments[a].name < config.experiments[b].name;
    });
    rep.experiments.resize(order.size());
    json inputs = json::array();
    for (std::size_t slot = 0; slot < order.size(); ++slot) {
        auto& er = rep.experiments[slot];
        er.config = config.experiments[order[slot]];
        er.seed = options.seed_override ? *options.seed_override : er.config.seed.value_or(0);
        inputs.push_back(resolved(er.config, er.seed));
    }
    rep.input_hash = sha256_hex(inputs.dump());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t slot = next++; slot < rep.experiments.size(); slot = next++) {
            auto& er = rep.experiments[slot];
            const auto start = clock::now();
            const auto& kind = find_kind(er.config.kind);
            try {
                er.result = kind.run(er.config.params, er.seed);
            } catch (const std::exception& e) {
                er.error = e.what();
                er.result = {};
                er.result.ledgers.push_back(
                    skipped_ledger("error", std::string("error: ") + e.what(), "harness: " + kind.description));
            }
            for (auto& l : er.result.ledgers) l.name = er.config.name + "/" + l.name;
            er.seconds = std::chrono::duration<double>(clock::now() - start).count();
        }
    };
    const int jobs = std::max(1, std::min<int>(options.jobs, int(rep.experiments.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    rep.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    return rep;
}

std::vector<Ledger> RunReport::ledgers() const {
    std::vector<Ledger> out;
    for (const auto& e : experiments) out.insert(out.end(), e.result.ledgers.begin(), e.result.ledgers.end());
    return out;
}

int RunReport::count(Verdict v) const {
    int n = 0;
    for (const auto& e : experiments)
        for (const auto& l : e.result.ledgers) n += l.verdict == v;
    return n;
}

nlohmann::json RunReport::to_json() const {
    json xs = json::array();
    for (const auto& e : experiments) {
        json ledgers = json::array();
        for (const auto& l : e.result.ledgers) ledgers.push_back(santalo::to_json(l));
        json plots = json::array();
        for (const auto& p : e.result.plots) plots.push_back(e.config.name + "__" + p.name + ".dat");
        json x = resolved(e.config, e.seed);
        x["module"] = find_kind(e.config.kind).module;
        x["seconds"] = e.seconds;
        x["metrics"] = e.result.metrics;
        x["ledgers"] = std::move(ledgers);
        x["plots"] = std::move(plots);
        if (!e.error.empty()) x["error"] = e.error;
        xs.push_back(std::move(x));
    }
    json counts = json::object();
    for (auto v : {Verdict::Holds, Verdict::Equality, Verdict::Violated, Verdict::Skipped})
        counts[santalo::to_string(v)] = count(v);
    return {{"name", name},   {"config", config},    {"input_hash", input_hash}, {"versions", versions},
            {"seconds", seconds}, {"counts", counts}, {"experiments", xs}};
}

void write_outputs(const RunReport& report, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "plots");
    auto open = [&](const fs::path& p) {
        std::ofstream os(p, std::ios::binary);
        if (!os) throw InvalidArgument("cannot write " + p.string());
        return os;
    };
    {
        auto os = open(fs::path(dir) / "report.json");
        os << report.to_json().dump(2) << "\n";
    }
    const auto ledgers = report.ledgers();
    {
        auto os = open(fs::path(dir) / "ledgers.csv");
        write_csv(os, ledgers);
    }
    {
        auto os = open(fs::path(dir) / "ledgers.jsonl");
        write_jsonl(os, ledgers);
    }
    for (const auto& e : report.experiments)
        for (const auto& p : e.result.plots) {
            auto os = open(fs::path(dir) / "plots" / (e.config.name + "__" + p.name + ".dat"));
            os << "# " << p.x_label << "\t" << p.y_label << "\n";
            for (std::size_t i = 0; i < p.x.size(); ++i) os << format_double(p.x[i]) << "\t" << format_double(p.y[i]) << "\n";
        }
}

std::string summary_table(const RunReport& report) {
    std::ostringstream os;
    std::size_t w = 10;
    for (const auto& e : report.experiments) w = std::max(w, e.config.name.size());
    os << std::left << std::setw(int(w) + 2) << "experiment" << std::right << std::setw(7) << "Holds" << std::setw(9)
       << "Equality" << std::setw(9) << "Violated" << std::setw(8) << "Skipped" << std::setw(10) << "seconds" << "\n";
    for (const auto& e : report.experiments) {
        std::map<Verdict, int> c;
        for (const auto& l : e.result.ledgers) ++c[l.verdict];
        os << std::left << std::setw(int(w) + 2) << e.config.name << std::right << std::setw(7) << c[Verdict::Holds]
           << std::setw(9) << c[Verdict::Equality] << std::setw(9) << c[Verdict::Violated] << std::setw(8)
           << c[Verdict::Skipped] << std::setw(10) << std::fixed << std::setprecision(2) << e.seconds << "\n";
        if (!e.error.empty()) os << "  error: " << e.error << "\n";
        for (const auto& l : e.result.ledgers)
            if (l.verdict == Verdict::Violated)
                os << "  Violated: " << l.name << " lhs=" << format_double(l.lhs) << " rhs=" << format_double(l.rhs)
                   << "\n";
        if (!e.result.metrics.empty()) os << "  " << e.result.metrics.dump() << "\n";
    }
    os << std::left << std::setw(int(w) + 2) << "total" << std::right << std::setw(7) << report.count(Verdict::Holds)
       << std::setw(9) << report.count(Verdict::Equality) << std::setw(9) << report.count(Verdict::Violated)
       << std::setw(8) << report.count(Verdict::Skipped) << std::setw(10) << std::fixed << std::setprecision(2)
       << report.seconds << "\n";
    return os.str();
}

int exit_code(const RunReport& report) { return report.count(Verdict::Violated) > 0 ? 2 : 0; }

namespace {

struct SuiteEntry {
    const char* kind;
    std::uint64_t seed;
};

const std::map<std::string, std::vector<SuiteEntry>>& suites() {
    static const std::map<std::string, std::vector<SuiteEntry>> s = {
        {"direct-bs", {{"mahler-hanner", 0}, {"bs-random", 37}, {"bs-fixtures", 0}, {"santalo-triangle", 0}}},
        {"s-concave", {{"cs-constants", 0}, {"ps-hanner", 0}, {"triple-dual", 53}}},
        {"transport",
         {{"ot-cross", 8}, {"talagrand-equality", 0}, {"talagrand-random", 61}, {"barenblatt-centered", 67}}},
        {"sphere",
         {{"nonsym-cap", 0},
          {"kolesnikov", 71},
          {"sphere-poincare", 0},
          {"cone-measures", 2024},
          {"log-minkowski", 0},
          {"lsi-unconditional", 0},
          {"improved-mahler", 9},
          {"concentration", 30}}},
        {"linearize", {{"weighted-poincare", 6}, {"taylor", 0}, {"linearization-chain", 0}}},
    };
    return s;
}

json suite_json(const std::string& name) {
    json xs = json::array();
    for (const auto& e : suites().at(name)) {
        json x = {{"kind", e.kind}};
        if (find_kind(e.kind).randomized) x["seed"] = e.seed;
        xs.push_back(std::move(x));
    }
    return {{"name", name}, {"experiments", xs}};
}

}  // namespace

std::vector<std::string> suite_names() {
    std::vector<std::string> out;
    for (const auto& [k, v] : suites()) out.push_back(k);
    out.push_back("all");
    return out;
}

RunConfig suite(const std::string& name) {
    if (name == "all") {
        json all = {{"name", "all"}, {"experiments", json::array()}};
        for (const auto& [k, v] : suites()) {
            const json one = suite_json(k);
            for (const auto& x : one["experiments"]) all["experiments"].push_back(x);
        }
        return parse_config(all.dump(), "suite:all");
    }
    if (!suites().count(name)) {
        std::string known;
        for (const auto& n : suite_names()) known += (known.empty() ? "" : ", ") + n;
        throw UnknownSuite("'" + name + "' (known: " + known + ")");
    }
    return parse_config(suite_json(name).dump(), "suite:" + name);
}

}  // namespace santalo::harness
