#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "facetemb/errors.hpp"

namespace facetemb::detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        std::size_t pos = line.find('\t', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

/// Calls fn(line_no, fields) for every data line. Skips blank lines and lines
/// starting with '#'. Throws FormatError when a line does not have
/// expected_cols fields, IoError when the file cannot be opened and
/// FormatError when the file contains no data lines at all.
template <class Fn>
std::size_t for_each_tsv_line(const std::string& path, std::size_t expected_cols, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    std::string line;
    std::size_t line_no = 0;
    std::size_t data_lines = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields = split_tabs(line);
        if (fields.size() != expected_cols)
            throw FormatError(path + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(expected_cols) + " tab-separated columns, got " +
                              std::to_string(fields.size()));
        ++data_lines;
        fn(line_no, fields);
    }
    if (data_lines == 0) throw FormatError(path + ": no data lines");
    return data_lines;
}

}  // namespace facetemb::detail
