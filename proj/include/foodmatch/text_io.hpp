#pragma once

#include <charconv>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace foodmatch {

/// Reads whitespace-separated records, skipping blank lines and `#` comments.
/// Field views stay valid until the next call to next().
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::vector<std::string_view>& fields) {
    while (std::getline(in_, line_)) {
      ++line_number_;
      fields.clear();
      std::string_view rest(line_);
      if (auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);
      std::size_t i = 0;
      while (i < rest.size()) {
        while (i < rest.size() && is_space(rest[i])) ++i;
        std::size_t start = i;
        while (i < rest.size() && !is_space(rest[i])) ++i;
        if (i > start) fields.push_back(rest.substr(start, i - start));
      }
      if (!fields.empty()) return true;
    }
    return false;
  }

  std::size_t line_number() const { return line_number_; }

 private:
  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

  std::istream& in_;
  std::string line_;
  std::size_t line_number_ = 0;
};

template <typename Int>
std::optional<Int> parse_integer(std::string_view s) {
  Int value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

inline std::optional<double> parse_double(std::string_view s) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

/// Shortest text that round-trips to the same double.
inline std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace foodmatch
