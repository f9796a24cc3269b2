#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace specdegen {

inline constexpr const char* tool_name = "specdegen";
inline constexpr const char* tool_version = "0.1.0";

// %.17g; enough digits to read back the same double.
std::string fmt17(double v);

std::uint64_t fnv1a64(std::string_view data);
// FNV-1a of the compact dump of the config (keys sorted), as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

std::vector<double> parse_grid(const std::string& text);

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row);
};

struct ResultEnvelope {
    std::string module, operation;
    nlohmann::json config;  // echoed inputs, hashed
    Table table;
    nlohmann::json report;  // structured payload for JSON output; rows are added automatically
    std::vector<std::string> notes;
};

// Header lines start with '#'; then the column line and the rows.
void write_csv(const ResultEnvelope& env, std::ostream& os);
void write_json(const ResultEnvelope& env, std::ostream& os);

struct CsvData {
    std::map<std::string, std::string> meta;  // "# key=value" header lines
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};
CsvData read_csv(std::istream& is);
CsvData read_csv_file(const std::string& path);

struct GoldenReport {
    bool pass = false;
    std::vector<std::string> messages;
};

// Columns of the golden file must exist in the produced one; extra produced columns are ignored.
// Numeric fields agree to max(abs, rel |golden|) with per-column rel tolerances
// (default_rel unless overridden); other fields must match exactly.
GoldenReport golden_check(const std::string& golden_path, const CsvData& produced,
                          const std::map<std::string, double>& tolerances, double default_rel = 1e-9,
                          double abs_floor = 1e-14);

}  // namespace specdegen
