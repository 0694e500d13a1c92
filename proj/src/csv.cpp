#include "holsim/csv.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

#include "holsim/errors.hpp"

namespace holsim {

std::string format_double(double value) {
    if (std::isnan(value)) throw IoError("refusing to format NaN into a CSV cell");
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, result.ptr);
}

std::string format_int(long long value) {
    char buf[32];
    const auto result = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, result.ptr);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
    if (header.empty()) throw IoError("CSV header must name at least one column");
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) buffer_ += ',';
        buffer_ += header[i];
    }
    buffer_ += '\n';
}

void CsvWriter::row(std::span<const std::string> cells) {
    if (cells.size() != columns_) {
        throw IoError("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                      std::to_string(columns_));
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) buffer_ += ',';
        buffer_ += cells[i];
    }
    buffer_ += '\n';
    ++rows_;
}

void CsvWriter::row(std::initializer_list<std::string> cells) {
    row(std::span<const std::string>(cells.begin(), cells.size()));
}

void CsvWriter::numeric_row(std::span<const double> values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    row(cells);
}

}  // namespace holsim
