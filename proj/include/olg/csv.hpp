// Minimal CSV support: UTF-8, comma separated, one header row.
// Readers attach file/line context to every parse error so data problems
// are reported per row.
#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "olg/common.hpp"

namespace olg::csv {

struct Table {
    std::string path;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // cell text, trimmed
    std::vector<int> line_numbers;               // source line of each row

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        throw SchemaError(path + ": missing required column '" + name + "'");
    }

    const std::string& cell(std::size_t row, int col) const { return rows[row][col]; }

    double number(std::size_t row, int col) const {
        const std::string& s = rows[row][col];
        try {
            std::size_t used = 0;
            double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ValidationError(path + ":" + std::to_string(line_numbers[row]) +
                                  ": cannot parse '" + s + "' in column '" + header[col] + "'");
        }
    }

    std::string context(std::size_t row) const {
        return path + ":" + std::to_string(line_numbers[row]);
    }
};

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline Table read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open input file: " + path);
    Table t;
    t.path = path;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(stripped);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
        if (!stripped.empty() && stripped.back() == ',') cells.push_back("");
        if (t.header.empty()) {
            t.header = cells;
        } else {
            if (cells.size() != t.header.size())
                throw SchemaError(path + ":" + std::to_string(line_no) + ": expected " +
                                  std::to_string(t.header.size()) + " columns, got " +
                                  std::to_string(cells.size()));
            t.rows.push_back(std::move(cells));
            t.line_numbers.push_back(line_no);
        }
    }
    if (t.header.empty()) throw SchemaError(path + ": empty file, header row required");
    return t;
}

// All numeric output uses fixed scientific notation with 10 significant
// digits so reruns are byte identical.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9e", v);
    return std::string(buf);
}

class Writer {
public:
    explicit Writer(std::string path) : path_(std::move(path)), out_(path_) {
        if (!out_) throw ValidationError("cannot open output file: " + path_);
    }
    void header(const std::vector<std::string>& cols) { write_row_text(cols); }
    void row(const std::vector<std::string>& cells) { write_row_text(cells); }
    void close() { out_.close(); }

private:
    void write_row_text(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }
    std::string path_;
    std::ofstream out_;
};

}  // namespace olg::csv
