#pragma once

// Result tables in CSV or JSON-lines form. Both carry the resolved parameter
// set: CSV as '#' comment lines ahead of the header row, JSON-lines as a
// leading record. Data files contain no timestamps, so identical inputs give
// byte-identical files; run metadata with a timestamp goes to metadata.json.

#include "qplasma/config.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace qplasma {

using Cell = std::variant<double, long long, std::string, bool>;

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class TableWriter {
public:
    TableWriter(std::ostream& os, OutputFormat format, const std::string& table, const json& parameters,
                std::vector<std::string> columns)
        : os_(os), format_(format), columns_(std::move(columns)) {
        if (format_ == OutputFormat::csv) {
            os_ << "# table: " << table << '\n';
            os_ << "# parameters: " << parameters.dump() << '\n';
            for (std::size_t i = 0; i < columns_.size(); ++i) os_ << (i ? "," : "") << columns_[i];
            os_ << '\n';
        } else {
            os_ << json{{"table", table}, {"parameters", parameters}, {"columns", columns_}}.dump() << '\n';
        }
    }

    void row(const std::vector<Cell>& cells) {
        require(cells.size() == columns_.size(), "row", "cell count does not match the column count");
        if (format_ == OutputFormat::csv) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) os_ << ',';
                os_ << csv_cell(cells[i]);
            }
            os_ << '\n';
        } else {
            json rec = json::object();
            for (std::size_t i = 0; i < cells.size(); ++i) rec[columns_[i]] = json_cell(cells[i]);
            os_ << rec.dump() << '\n';
        }
    }

private:
    static std::string csv_cell(const Cell& c) {
        if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
        if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
        if (const auto* b = std::get_if<bool>(&c)) return *b ? "true" : "false";
        return std::get<std::string>(c);
    }
    static json json_cell(const Cell& c) {
        if (const auto* d = std::get_if<double>(&c)) return std::isfinite(*d) ? json(*d) : json(nullptr);
        if (const auto* i = std::get_if<long long>(&c)) return *i;
        if (const auto* b = std::get_if<bool>(&c)) return *b;
        return std::get<std::string>(c);
    }

    std::ostream& os_;
    OutputFormat format_;
    std::vector<std::string> columns_;
};

/// Output directory plus format; opens one file per table.
class OutputSink {
public:
    OutputSink(std::filesystem::path dir, OutputFormat format) : dir_(std::move(dir)), format_(format) {
        std::filesystem::create_directories(dir_);
    }

    std::filesystem::path path_for(const std::string& table) const {
        return dir_ / (table + (format_ == OutputFormat::csv ? ".csv" : ".jsonl"));
    }

    std::ofstream open(const std::string& table) {
        const auto p = path_for(table);
        std::ofstream os(p, std::ios::binary);
        if (!os) throw Error("cannot open " + p.string() + " for writing");
        written_.push_back(p.filename().string());
        return os;
    }

    OutputFormat format() const noexcept { return format_; }
    const std::filesystem::path& dir() const noexcept { return dir_; }
    const std::vector<std::string>& written() const noexcept { return written_; }

    void write_metadata(const json& resolved, const json& summary) const {
        const auto now = std::chrono::system_clock::now();
        const std::time_t tt = std::chrono::system_clock::to_time_t(now);
        std::tm tm{};
        gmtime_r(&tt, &tm);
        char stamp[32];
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
        json meta = resolved;
        meta["timestamp"] = stamp;
        meta["outputs"] = written_;
        meta["summary"] = summary;
        std::ofstream os(dir_ / "metadata.json", std::ios::binary);
        if (!os) throw Error("cannot write metadata.json in " + dir_.string());
        os << meta.dump(2) << '\n';
    }

private:
    std::filesystem::path dir_;
    OutputFormat format_;
    std::vector<std::string> written_;
};

} // namespace qplasma
