#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tgpipe::csv {

// RFC-4180: fields with comma, quote, CR or LF are quoted; quotes doubled.
inline std::string escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

inline void write_row(std::ostream& os, const std::vector<std::string>& row) {
    for (size_t i = 0; i < row.size(); ++i) {
        if (i) os << ',';
        os << escape(row[i]);
    }
    os << "\r\n";
}

// Reads one record (possibly spanning multiple physical lines inside quotes).
// Returns false at EOF with no data.
inline bool read_row(std::istream& is, std::vector<std::string>& row) {
    row.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    int c;
    while ((c = is.get()) != EOF) {
        any = true;
        if (in_quotes) {
            if (c == '"') {
                if (is.peek() == '"') { is.get(); field += '"'; }
                else in_quotes = false;
            } else {
                field += static_cast<char>(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\r') {
            if (is.peek() == '\n') is.get();
            row.push_back(std::move(field));
            return true;
        } else if (c == '\n') {
            row.push_back(std::move(field));
            return true;
        } else {
            field += static_cast<char>(c);
        }
    }
    if (!any) return false;
    row.push_back(std::move(field));
    return true;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }
};

inline Table read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open CSV file: " + path);
    Table t;
    if (!read_row(is, t.header)) return t;
    std::vector<std::string> row;
    while (read_row(is, row)) {
        if (row.size() == 1 && row[0].empty()) continue;  // trailing blank line
        row.resize(t.header.size());
        t.rows.push_back(row);
    }
    return t;
}

inline void write_file(const std::string& path, const Table& t) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write CSV file: " + path);
    write_row(os, t.header);
    for (const auto& r : t.rows) write_row(os, r);
}

}  // namespace tgpipe::csv
