#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "episample/errors.hpp"

namespace episample {

/// Splits one CSV line. Handles double-quoted fields (the bundled
/// neighborhood names contain commas) and doubled quotes inside them.
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

/// Reads a whole CSV file: first row is the header, remaining rows are data.
/// Blank lines are skipped. Every data row must match the header width.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    CsvTable table;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (table.header.empty()) {
            table.header = std::move(fields);
        } else {
            if (fields.size() != table.header.size()) {
                throw IoError(path + ": row has " + std::to_string(fields.size()) +
                              " fields, header has " + std::to_string(table.header.size()));
            }
            table.rows.push_back(std::move(fields));
        }
    }
    if (table.header.empty()) throw IoError(path + ": empty file");
    return table;
}

/// Quotes a field for CSV output when it contains a comma or quote.
inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

}  // namespace episample
