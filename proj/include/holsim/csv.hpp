// csv.hpp — deterministic CSV assembly. Doubles are printed with
// std::to_chars shortest round-trip form so identical runs emit identical
// bytes on any host.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace holsim {

/// Shortest decimal that parses back to the same double ("0.1", "1e-30",
/// "inf"). NaNs are rejected: no artifact schema has a NaN cell.
std::string format_double(double value);
std::string format_int(long long value);

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    void row(std::span<const std::string> cells);
    void row(std::initializer_list<std::string> cells);
    void numeric_row(std::span<const double> values);

    std::size_t rows() const { return rows_; }
    const std::string& text() const { return buffer_; }

private:
    std::string buffer_;
    std::size_t columns_ = 0;
    std::size_t rows_ = 0;
};

}  // namespace holsim
