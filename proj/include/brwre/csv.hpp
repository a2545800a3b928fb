// SPDX-FileCopyrightText: 2026 brwre authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>

namespace brwre {

//! Locale-independent 17-significant-digit rendering ("inf", "-inf", "nan").
inline std::string format_real(double value)
{
    if (std::isnan(value))
        return "nan";
    if (std::isinf(value))
        return value > 0 ? "inf" : "-inf";
    char buffer[64];
    auto result = std::to_chars(
        buffer, buffer + sizeof(buffer), value, std::chars_format::general, 17);
    return std::string(buffer, result.ptr);
}

//! Comma-separated row writer; reals go through format_real.
class CsvRow
{
  public:
    explicit CsvRow(std::ostream& os) : os_(os) {}
    ~CsvRow() { os_ << '\n'; }

    CsvRow& operator<<(double value) { return field(format_real(value)); }
    CsvRow& operator<<(std::int64_t value) { return field(std::to_string(value)); }
    CsvRow& operator<<(std::uint64_t value) { return field(std::to_string(value)); }
    CsvRow& operator<<(int value) { return field(std::to_string(value)); }
    CsvRow& operator<<(unsigned value) { return field(std::to_string(value)); }
    CsvRow& operator<<(bool value) { return field(value ? "1" : "0"); }
    CsvRow& operator<<(std::string const& value) { return field(value); }
    CsvRow& operator<<(char const* value) { return field(value); }

  private:
    CsvRow& field(std::string const& text)
    {
        if (!first_)
            os_ << ',';
        first_ = false;
        os_ << text;
        return *this;
    }

    std::ostream& os_;
    bool first_ = true;
};

}  // namespace brwre
