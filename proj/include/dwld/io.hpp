#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "dwld/types.hpp"

namespace dwld {

// Plain-text formats, one element per line:
//   complex vector:  "N" header, then "re,im" lines
//   complex matrix:  "M N" header, then row-major "re,im" lines
//   real vector:     "N" header, then one value per line

namespace detail {

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << std::setprecision(17);
  return out;
}

inline Complex parse_complex_line(const std::string& line, const std::string& path) {
  const auto comma = line.find(',');
  if (comma == std::string::npos)
    throw ParseError(path + ": expected 're,im', got '" + line + "'");
  try {
    std::size_t eaten = 0;
    const double re = std::stod(line.substr(0, comma), &eaten);
    const double im = std::stod(line.substr(comma + 1), &eaten);
    return {re, im};
  } catch (const std::exception&) {
    throw ParseError(path + ": malformed complex entry '" + line + "'");
  }
}

inline std::string next_data_line(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos) continue;
    const auto end = line.find_last_not_of(" \t\r");
    line = line.substr(start, end - start + 1);
    if (line.empty() || line[0] == '#') continue;
    return line;
  }
  return {};
}

}  // namespace detail

inline ComplexVector read_complex_vector(const std::string& path) {
  std::ifstream in = detail::open_input(path);
  const std::string header = detail::next_data_line(in);
  Index n = 0;
  try {
    n = std::stoll(header);
  } catch (const std::exception&) {
    throw ParseError(path + ": missing vector length header");
  }
  if (n < 0) throw ParseError(path + ": negative vector length");
  ComplexVector v(n);
  for (Index i = 0; i < n; ++i) {
    const std::string line = detail::next_data_line(in);
    if (line.empty()) throw ParseError(path + ": fewer entries than the header declares");
    v[i] = detail::parse_complex_line(line, path);
  }
  return v;
}

inline void write_complex_vector(const std::string& path, const ComplexVector& v) {
  std::ofstream out = detail::open_output(path);
  out << v.size() << "\n";
  for (Index i = 0; i < v.size(); ++i) out << v[i].real() << "," << v[i].imag() << "\n";
}

inline ComplexMatrix read_complex_matrix(const std::string& path) {
  std::ifstream in = detail::open_input(path);
  const std::string header = detail::next_data_line(in);
  std::istringstream hs(header);
  Index m = -1, n = -1;
  hs >> m >> n;
  if (m < 0 || n < 0) throw ParseError(path + ": expected 'M N' matrix header");
  ComplexMatrix a(m, n);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) {
      const std::string line = detail::next_data_line(in);
      if (line.empty()) throw ParseError(path + ": fewer entries than the header declares");
      a(i, j) = detail::parse_complex_line(line, path);
    }
  }
  return a;
}

inline void write_complex_matrix(const std::string& path, const ComplexMatrix& a) {
  std::ofstream out = detail::open_output(path);
  out << a.rows() << " " << a.cols() << "\n";
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out << a(i, j).real() << "," << a(i, j).imag() << "\n";
}

inline RealVector read_real_vector(const std::string& path) {
  std::ifstream in = detail::open_input(path);
  const std::string header = detail::next_data_line(in);
  Index n = 0;
  try {
    n = std::stoll(header);
  } catch (const std::exception&) {
    throw ParseError(path + ": missing vector length header");
  }
  if (n < 0) throw ParseError(path + ": negative vector length");
  RealVector v(n);
  for (Index i = 0; i < n; ++i) {
    const std::string line = detail::next_data_line(in);
    if (line.empty()) throw ParseError(path + ": fewer entries than the header declares");
    try {
      v[i] = std::stod(line);
    } catch (const std::exception&) {
      throw ParseError(path + ": malformed real entry '" + line + "'");
    }
  }
  return v;
}

inline void write_real_vector(const std::string& path, const RealVector& v) {
  std::ofstream out = detail::open_output(path);
  out << v.size() << "\n";
  for (Index i = 0; i < v.size(); ++i) out << v[i] << "\n";
}

}  // namespace dwld
