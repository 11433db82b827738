#pragma once

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace santalo {

enum class Verdict { Holds, Equality, Violated, Skipped };

std::string to_string(Verdict v);

// One inequality check lhs <= rhs. gap = rhs - lhs; Equality iff |gap| <= tol,
// Violated iff gap < -tol. Skipped rows carry the failed hypothesis in note.
struct Ledger {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double gap = 0.0;
    double tol = 0.0;
    Verdict verdict = Verdict::Holds;
    std::string provenance;
    std::string note;
};

Ledger make_ledger(std::string name, double lhs, double rhs, double tol, std::string provenance,
                   std::string note = "");
Ledger skipped_ledger(std::string name, std::string reason, std::string provenance);

bool passes(const Ledger& l);  // not Violated

nlohmann::json to_json(const Ledger& l);
std::string ledger_csv_header();
std::string to_csv_row(const Ledger& l);
void write_jsonl(std::ostream& os, const std::vector<Ledger>& ledgers);
void write_csv(std::ostream& os, const std::vector<Ledger>& ledgers);

// Shortest decimal representation that round-trips.
std::string format_double(double x);

}  // namespace santalo
