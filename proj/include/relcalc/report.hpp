#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace relcalc {

using ordered_json = nlohmann::ordered_json;

/// One named verification with its citation anchor and measured/expected payload.
/// `measured` and `expected` are free-form JSON so scalar checks and table checks
/// share one record type; `tolerance` is the acceptance threshold the status used.
struct CheckRecord {
    std::string name;
    std::string paper_ref;
    std::string status; // "pass" | "fail"
    ordered_json measured;
    ordered_json expected;
    double tolerance = 0.0;
};

/// A tabular sweep destined for one RFC-4180 CSV file.
struct CsvTable {
    std::string filename; // basename with .csv extension
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

struct Report {
    std::string subcommand;
    std::uint64_t seed = 0;
    std::vector<CheckRecord> checks;
    std::vector<CsvTable> tables;

    bool all_passed() const
    {
        return std::all_of(checks.begin(), checks.end(),
                           [](const CheckRecord& c) { return c.status == "pass"; });
    }
};

/// Deterministic JSON payload: fixed key order, checks sorted by name, no
/// timestamps or environment data, trailing newline. Byte-identical for
/// identical (config, seed) inputs.
inline std::string render_json(const Report& rep)
{
    std::vector<const CheckRecord*> order;
    order.reserve(rep.checks.size());
    for (const auto& c : rep.checks) order.push_back(&c);
    std::sort(order.begin(), order.end(),
              [](const CheckRecord* a, const CheckRecord* b) { return a->name < b->name; });

    ordered_json j;
    j["subcommand"] = rep.subcommand;
    j["seed"] = rep.seed;
    j["status"] = rep.all_passed() ? "pass" : "fail";
    j["checks"] = ordered_json::array();
    for (const CheckRecord* c : order) {
        ordered_json e;
        e["name"] = c->name;
        e["paper_ref"] = c->paper_ref;
        e["status"] = c->status;
        e["measured"] = c->measured;
        e["expected"] = c->expected;
        e["tolerance"] = c->tolerance;
        j["checks"].push_back(std::move(e));
    }
    return j.dump(2) + "\n";
}

namespace detail {

/// RFC 4180: quote a field iff it contains comma, quote, CR or LF; double
/// embedded quotes.
inline std::string csv_field(const std::string& s)
{
    const bool needs = s.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += "\"\"";
        else out += ch;
    }
    out += '"';
    return out;
}

} // namespace detail

/// RFC-4180 rendering: header row, CRLF line endings.
inline std::string render_csv(const CsvTable& table)
{
    std::string out;
    auto emit = [&out](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += detail::csv_field(row[i]);
        }
        out += "\r\n";
    };
    emit(table.header);
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size())
            throw std::logic_error("render_csv: row width differs from header");
        emit(row);
    }
    return out;
}

/// Writes <dir>/<subcommand>.json and each CSV table (when the respective format
/// is requested). Creates the directory; refuses to overwrite existing files
/// unless `force` is set.
inline std::vector<std::filesystem::path> write_report_files(const Report& rep,
                                                             const std::filesystem::path& dir,
                                                             const std::vector<std::string>& formats,
                                                             bool force)
{
    namespace fs = std::filesystem;
    const bool want_json = std::find(formats.begin(), formats.end(), "json") != formats.end();
    const bool want_csv = std::find(formats.begin(), formats.end(), "csv") != formats.end();

    std::vector<std::pair<fs::path, std::string>> payloads;
    if (want_json) payloads.emplace_back(dir / (rep.subcommand + ".json"), render_json(rep));
    if (want_csv)
        for (const auto& t : rep.tables) payloads.emplace_back(dir / t.filename, render_csv(t));

    fs::create_directories(dir);
    for (const auto& [path, _] : payloads)
        if (!force && fs::exists(path))
            throw std::runtime_error("refusing to overwrite " + path.string() +
                                     " (pass --force to replace)");

    std::vector<fs::path> written;
    for (const auto& [path, text] : payloads) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw std::runtime_error("write failed for " + path.string());
        written.push_back(path);
    }
    return written;
}

} // namespace relcalc
