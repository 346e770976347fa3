#include "riskgraph/csv.hpp"

#include <charconv>
#include <stdexcept>

namespace riskgraph::csv {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r')
        out.back().pop_back();
    return out;
}

Reader::Reader(const std::string& path) : path_(path), in_(path) {
    if (!in_)
        throw std::runtime_error("cannot open CSV file: " + path);
    std::string line;
    if (!std::getline(in_, line))
        throw std::invalid_argument("empty CSV file: " + path);
    line_no_ = 1;
    header_ = split_fields(line);
}

void Reader::expect_header(const std::vector<std::string>& expected) const {
    if (header_ != expected) {
        std::string want;
        for (std::size_t i = 0; i < expected.size(); ++i)
            want += (i ? "," : "") + expected[i];
        throw std::invalid_argument(path_ + ":1: expected header '" + want + "'");
    }
}

bool Reader::next(Row& row) {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_no_;
        if (line.empty() || line == "\r")
            continue;
        row.fields = split_fields(line);
        row.line_no = line_no_;
        return true;
    }
    return false;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{})
        throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

}  // namespace riskgraph::csv
