#pragma once

#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace anchorvec {

inline bool is_blank(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' ||
         c == '\f';
}

template <class Fn>
void for_each_token(std::string_view line, Fn&& fn) {
  std::size_t i = 0;
  const std::size_t n = line.size();
  while (i < n) {
    while (i < n && is_blank(line[i])) ++i;
    std::size_t j = i;
    while (j < n && !is_blank(line[j])) ++j;
    if (j > i) fn(line.substr(i, j - i));
    i = j;
  }
}

template <class T>
T parse_number(std::string_view text, const std::string& where,
               std::size_t lineno) {
  while (!text.empty() && is_blank(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_blank(text.back())) text.remove_suffix(1);
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw std::runtime_error(where + ":" + std::to_string(lineno) +
                             ": malformed number '" + std::string(text) + "'");
  return value;
}

// Shortest decimal form that reads back to the same value.
template <class T>
void append_number(std::string& out, T value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

}  // namespace anchorvec
