#pragma once

#include <cstddef>
#include <fstream>
#include <string>
#include <vector>

namespace riskgraph::csv {

struct Row {
    std::vector<std::string> fields;
    std::size_t line_no = 0;  // 1-based, header is line 1
};

/// Line-oriented comma-split reader. Field values must not contain commas
/// or newlines (road ids and ISO dates never do).
class Reader {
public:
    explicit Reader(const std::string& path);

    const std::string& path() const { return path_; }
    const std::vector<std::string>& header() const { return header_; }

    /// Requires the header to match exactly; throws std::invalid_argument otherwise.
    void expect_header(const std::vector<std::string>& expected) const;

    /// Reads the next data row; skips blank lines. Returns false at EOF.
    bool next(Row& row);

private:
    std::string path_;
    std::ifstream in_;
    std::vector<std::string> header_;
    std::size_t line_no_ = 0;
};

std::vector<std::string> split_fields(const std::string& line);

/// Shortest round-trip decimal representation (std::to_chars).
std::string format_double(double v);

}  // namespace riskgraph::csv
