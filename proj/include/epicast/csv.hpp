#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "epicast/common.hpp"

namespace epicast {

/// Minimal comma-separated table with a required header row. Fields are plain
/// (no quoting); all files written by this library stay within that subset.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string path;

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }

    int require_column(const std::string& name) const {
        const int idx = column(name);
        if (idx < 0) fail(Errc::MissingColumn, "'" + name + "' in " + path);
        return idx;
    }

    const std::string& cell(std::size_t row, int col) const { return rows[row][col]; }

    double number(std::size_t row, int col) const {
        const std::string& s = rows[row][col];
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            fail(Errc::ParseError,
                 "not a number: '" + s + "' (" + path + " row " + std::to_string(row + 2) + ")");
        }
    }

    long integer(std::size_t row, int col) const {
        const std::string& s = rows[row][col];
        long v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size())
            fail(Errc::ParseError,
                 "not an integer: '" + s + "' (" + path + " row " + std::to_string(row + 2) + ")");
        return v;
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::IoError, "cannot open " + path);
    CsvTable table;
    table.path = path;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (first) {
            table.header = std::move(fields);
            first = false;
        } else {
            if (fields.size() != table.header.size())
                fail(Errc::ParseError, "ragged row in " + path);
            table.rows.push_back(std::move(fields));
        }
    }
    if (first) fail(Errc::ParseError, "empty file " + path);
    return table;
}

class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_) fail(Errc::IoError, "cannot write " + path);
    }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << fields[i];
        }
        out_ << '\n';
    }

  private:
    std::ofstream out_;
};

/// Shortest decimal representation that round-trips a double. Keeps CSV output
/// byte-stable across runs.
inline std::string format_double(double v) {
    char buf[32];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::stod(buf) == v) break;
    }
    return buf;
}

} // namespace epicast
