#ifndef TT_SRC_EVAL_CSV_HPP_
#define TT_SRC_EVAL_CSV_HPP_

#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "tt/error.hpp"

namespace tt::eval::csv {

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline void expect_header(std::istream& is, const std::string& header, const char* what) {
  std::string line;
  if (!std::getline(is, line) || line != header) {
    throw ConfigError(std::string(what) + " csv: unexpected header '" + line + "'");
  }
}

// Rows with exactly `columns` cells; blank lines are skipped.
inline std::vector<std::vector<std::string>> rows(std::istream& is, std::size_t columns,
                                                  const char* what) {
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (cells.size() != columns) {
      throw ConfigError(std::string(what) + " csv: expected " + std::to_string(columns) +
                        " columns in '" + line + "'");
    }
    out.push_back(std::move(cells));
  }
  return out;
}

template <typename T>
std::string join(const std::vector<T>& values, char sep) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) os << sep;
    os << values[i];
  }
  return os.str();
}

inline double to_double(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError(std::string(what) + " csv: bad number '" + s + "'");
  }
}

inline std::vector<double> to_doubles(const std::string& s, const char* what) {
  std::vector<double> out;
  if (s.empty()) return out;
  for (const auto& part : split(s, ';')) out.push_back(to_double(part, what));
  return out;
}

}  // namespace tt::eval::csv

#endif  // TT_SRC_EVAL_CSV_HPP_
