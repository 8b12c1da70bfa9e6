#pragma once

#include <concepts>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

namespace mhgame {

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double value);

/// Writes a comma-separated row; doubles go through format_double.
class CsvRow {
 public:
  explicit CsvRow(std::ostream& out) : out_(out) {}
  ~CsvRow() { out_ << '\n'; }
  CsvRow(const CsvRow&) = delete;
  CsvRow& operator=(const CsvRow&) = delete;

  CsvRow& operator<<(double v) { return field(format_double(v)); }
  CsvRow& operator<<(const std::string& v) { return field(v); }
  CsvRow& operator<<(const char* v) { return field(v); }
  CsvRow& operator<<(std::string_view v) { return field(std::string(v)); }
  template <std::integral T>
    requires(!std::is_same_v<T, bool>)
  CsvRow& operator<<(T v) {
    return field(std::to_string(v));
  }
  CsvRow& operator<<(bool v) { return field(v ? "1" : "0"); }

 private:
  CsvRow& field(const std::string& text) {
    if (!first_) out_ << ',';
    first_ = false;
    out_ << text;
    return *this;
  }

  std::ostream& out_;
  bool first_ = true;
};

}  // namespace mhgame
