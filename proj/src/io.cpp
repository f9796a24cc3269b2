#include "specdegen/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "specdegen/errors.hpp"

namespace specdegen {

std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string config_hash(const nlohmann::json& config) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config.dump())));
    return buf;
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        size_t a = item.find_first_not_of(" \t"), b = item.find_last_not_of(" \t");
        if (a == std::string::npos) fail_validation("empty entry in list '" + text + "'");
        item = item.substr(a, b - a + 1);
        double v;
        auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc() || p != item.data() + item.size()) fail_validation("not a number: '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) fail_validation("empty list");
    return out;
}

void Table::add(std::vector<std::string> row) {
    if (row.size() != columns.size()) throw std::logic_error("table row width mismatch");
    rows.push_back(std::move(row));
}

void write_csv(const ResultEnvelope& env, std::ostream& os) {
    os << "# tool=" << tool_name << '\n';
    os << "# version=" << tool_version << '\n';
    os << "# config_hash=" << config_hash(env.config) << '\n';
    os << "# module=" << env.module << '\n';
    os << "# operation=" << env.operation << '\n';
    os << "# config=" << env.config.dump() << '\n';
    for (auto& n : env.notes) os << "# note=" << n << '\n';
    for (size_t i = 0; i < env.table.columns.size(); ++i) os << (i ? "," : "") << env.table.columns[i];
    os << '\n';
    for (auto& r : env.table.rows) {
        for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
        os << '\n';
    }
}

namespace {

nlohmann::json cell_value(const std::string& s) {
    double v;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && p == s.data() + s.size() && !s.empty()) {
        if (std::isfinite(v)) return v;
    }
    return s;
}

}  // namespace

void write_json(const ResultEnvelope& env, std::ostream& os) {
    nlohmann::json j;
    j["tool"] = tool_name;
    j["version"] = tool_version;
    j["config_hash"] = config_hash(env.config);
    j["config"] = env.config;
    j["provenance"] = {{"module", env.module}, {"operation", env.operation}, {"inputs", env.config}};
    if (!env.notes.empty()) j["notes"] = env.notes;
    if (!env.report.is_null()) j["report"] = env.report;
    if (!env.table.columns.empty()) {
        nlohmann::json rows = nlohmann::json::array();
        for (auto& r : env.table.rows) {
            nlohmann::json o = nlohmann::json::object();
            for (size_t i = 0; i < r.size(); ++i) o[env.table.columns[i]] = cell_value(r[i]);
            rows.push_back(std::move(o));
        }
        j["columns"] = env.table.columns;
        j["rows"] = std::move(rows);
    }
    os << j.dump(2) << '\n';
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

bool as_number(const std::string& s, double& v) {
    if (s == "nan") {
        v = NAN;
        return true;
    }
    if (s == "inf" || s == "-inf") {
        v = s[0] == '-' ? -INFINITY : INFINITY;
        return true;
    }
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && p == s.data() + s.size() && !s.empty();
}

}  // namespace

CsvData read_csv(std::istream& is) {
    CsvData d;
    std::string line;
    bool have_columns = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            size_t eq = line.find('=');
            if (eq != std::string::npos) {
                std::string key = line.substr(1, eq - 1);
                size_t a = key.find_first_not_of(' ');
                key = a == std::string::npos ? "" : key.substr(a);
                d.meta[key] = line.substr(eq + 1);
            }
            continue;
        }
        auto cells = split_csv_line(line);
        if (!have_columns) {
            d.columns = cells;
            have_columns = true;
        } else {
            if (cells.size() != d.columns.size())
                fail_validation("CSV row has " + std::to_string(cells.size()) + " fields, expected " +
                                std::to_string(d.columns.size()));
            d.rows.push_back(std::move(cells));
        }
    }
    return d;
}

CsvData read_csv_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail_validation("cannot open " + path);
    return read_csv(f);
}

GoldenReport golden_check(const std::string& golden_path, const CsvData& produced,
                          const std::map<std::string, double>& tolerances, double default_rel, double abs_floor) {
    GoldenReport rep;
    std::ifstream f(golden_path);
    if (!f) {
        rep.messages.push_back("missing golden file " + golden_path +
                               "; generate it with python3 tests/oracles/make_golden.py tests/golden (needs scipy and mpmath)");
        return rep;
    }
    CsvData g = read_csv(f);
    std::vector<size_t> at;
    for (auto& c : g.columns) {
        auto it = std::find(produced.columns.begin(), produced.columns.end(), c);
        if (it == produced.columns.end()) {
            rep.messages.push_back("produced file has no column '" + c + "'");
            return rep;
        }
        at.push_back(static_cast<size_t>(it - produced.columns.begin()));
    }
    if (g.rows.size() != produced.rows.size())
        rep.messages.push_back("row count: golden " + std::to_string(g.rows.size()) + ", produced " +
                               std::to_string(produced.rows.size()));
    size_t n = std::min(g.rows.size(), produced.rows.size());
    for (size_t r = 0; r < n; ++r)
        for (size_t c = 0; c < g.columns.size(); ++c) {
            const std::string &gs = g.rows[r][c], &ps = produced.rows[r][at[c]];
            double gv, pv;
            bool ok;
            std::string detail;
            if (as_number(gs, gv) && as_number(ps, pv)) {
                auto it = tolerances.find(g.columns[c]);
                double rel = it == tolerances.end() ? default_rel : it->second;
                double tol = std::max(abs_floor, rel * std::abs(gv));
                double diff = std::abs(gv - pv);
                ok = (std::isnan(gv) && std::isnan(pv)) || gv == pv || diff <= tol;
                detail = " (|diff| " + fmt17(diff) + " > tol " + fmt17(tol) + ")";
            } else {
                ok = gs == ps;
            }
            if (!ok)
                rep.messages.push_back("row " + std::to_string(r + 1) + ", column " + g.columns[c] + ": golden " + gs +
                                       ", produced " + ps + detail);
        }
    rep.pass = rep.messages.empty();
    return rep;
}

}  // namespace specdegen
