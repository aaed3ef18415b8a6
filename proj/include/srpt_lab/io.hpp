#ifndef SRPT_LAB_IO_HPP
#define SRPT_LAB_IO_HPP

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace srpt_lab {

/// 17 significant digits: every double survives a text round trip.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Short label form for file and statistic names.
inline std::string format_label(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline void write_csv_row(std::ostream &os, const std::vector<double> &row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i)
      os << ',';
    os << format_double(row[i]);
  }
  os << '\n';
}

inline void write_csv_header(std::ostream &os,
                             const std::vector<std::string> &cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i)
      os << ',';
    os << cols[i];
  }
  os << '\n';
}

} // namespace srpt_lab

#endif // SRPT_LAB_IO_HPP
