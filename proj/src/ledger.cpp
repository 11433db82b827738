#include "santalo/ledger.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace santalo {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Holds: return "Holds";
        case Verdict::Equality: return "Equality";
        case Verdict::Violated: return "Violated";
        case Verdict::Skipped: return "Skipped";
    }
    return "?";
}

Ledger make_ledger(std::string name, double lhs, double rhs, double tol, std::string provenance, std::string note) {
    Ledger l;
    l.name = std::move(name);
    l.lhs = lhs;
    l.rhs = rhs;
    l.tol = tol;
    l.provenance = std::move(provenance);
    l.note = std::move(note);
    if (std::isnan(lhs) || std::isnan(rhs)) {
        l.gap = std::nan("");
        l.verdict = Verdict::Violated;
        l.note += l.note.empty() ? "NaN operand" : "; NaN operand";
        return l;
    }
    if (std::isinf(lhs) && lhs == rhs) {
        l.gap = 0.0;
        l.verdict = Verdict::Equality;
        return l;
    }
    l.gap = rhs - lhs;
    if (std::fabs(l.gap) <= tol) l.verdict = Verdict::Equality;
    else if (l.gap < -tol) l.verdict = Verdict::Violated;
    else l.verdict = Verdict::Holds;
    return l;
}

Ledger skipped_ledger(std::string name, std::string reason, std::string provenance) {
    Ledger l;
    l.name = std::move(name);
    l.lhs = l.rhs = l.gap = std::nan("");
    l.verdict = Verdict::Skipped;
    l.provenance = std::move(provenance);
    l.note = std::move(reason);
    return l;
}

bool passes(const Ledger& l) { return l.verdict != Verdict::Violated; }

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

namespace {

nlohmann::json number_or_string(double x) {
    if (std::isfinite(x)) return x;
    return format_double(x);
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

nlohmann::json to_json(const Ledger& l) {
    nlohmann::json j;
    j["name"] = l.name;
    j["lhs"] = number_or_string(l.lhs);
    j["rhs"] = number_or_string(l.rhs);
    j["gap"] = number_or_string(l.gap);
    j["tol"] = number_or_string(l.tol);
    j["verdict"] = to_string(l.verdict);
    j["provenance"] = l.provenance;
    if (!l.note.empty()) j["note"] = l.note;
    return j;
}

std::string ledger_csv_header() { return "name,lhs,rhs,gap,tol,verdict,provenance"; }

std::string to_csv_row(const Ledger& l) {
    return csv_escape(l.name) + "," + format_double(l.lhs) + "," + format_double(l.rhs) + "," + format_double(l.gap) +
           "," + format_double(l.tol) + "," + to_string(l.verdict) + "," + csv_escape(l.provenance);
}

void write_jsonl(std::ostream& os, const std::vector<Ledger>& ledgers) {
    for (const auto& l : ledgers) os << to_json(l).dump() << "\n";
}

void write_csv(std::ostream& os, const std::vector<Ledger>& ledgers) {
    os << ledger_csv_header() << "\n";
    for (const auto& l : ledgers) os << to_csv_row(l) << "\n";
}

}  // namespace santalo
