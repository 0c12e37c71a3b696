#pragma once

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hmvc/types.hpp"

namespace hmvc {

enum class MatrixFormat { csv, binary };

namespace io_detail {

inline std::ifstream open_input(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw Error("cannot open file: " + path);
  return in;
}

inline std::ofstream open_output(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error("cannot open file for writing: " + path);
  return out;
}

inline double parse_double(std::string token, const std::string& path) {
  // RFC-4180 allows quoted fields; numeric content only after unquoting.
  if (token.size() >= 2 && token.front() == '"' && token.back() == '"')
    token = token.substr(1, token.size() - 2);
  size_t begin = token.find_first_not_of(" \t");
  size_t end = token.find_last_not_of(" \t");
  if (begin == std::string::npos) throw NonNumericEntry(path + ": empty field");
  token = token.substr(begin, end - begin + 1);
  const char* s = token.c_str();
  char* parsed_end = nullptr;
  const double value = std::strtod(s, &parsed_end);
  if (parsed_end != s + token.size())
    throw NonNumericEntry(path + ": cannot parse '" + token + "'");
  if (!std::isfinite(value))
    throw NonNumericEntry(path + ": non-finite value '" + token + "'");
  return value;
}

inline void split_csv_line(const std::string& line, std::vector<std::string>& out) {
  out.clear();
  std::string field;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
      field.push_back(c);
    } else if (c == ',' && !quoted) {
      out.push_back(field);
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.push_back(field);
}

inline std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r = (r << 8) | ((v >> (8 * i)) & 0xff);
  return r;
}

}  // namespace io_detail

/// Reads a numeric CSV matrix. Rows are lines, fields are comma-separated,
/// CRLF tolerated, quoted fields unwrapped. NaN/Inf entries are rejected.
inline Mat read_csv_matrix(const std::string& path, bool header = false) {
  auto in = io_detail::open_input(path);
  std::vector<std::vector<double>> rows;
  std::vector<std::string> fields;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first && header) {
      first = false;
      continue;
    }
    first = false;
    io_detail::split_csv_line(line, fields);
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(io_detail::parse_double(f, path));
    if (!rows.empty() && row.size() != rows.front().size())
      throw RowCountMismatch(path + ": ragged row (" + std::to_string(row.size()) +
                             " fields, expected " + std::to_string(rows.front().size()) + ")");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw EmptyView(path + ": no data rows");
  Mat m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
  return m;
}

inline void write_csv_matrix(const std::string& path, const Mat& m) {
  auto out = io_detail::open_output(path);
  out.precision(17);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
}

inline constexpr char kBinaryMagic[8] = {'H', 'M', 'V', 'C', 'M', 'A', 'T', '1'};

/// Binary matrix container: 8-byte magic, little-endian int64 rows/cols,
/// row-major float64 payload.
inline Mat read_binary_matrix(const std::string& path) {
  auto in = io_detail::open_input(path, true);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kBinaryMagic, 8) != 0)
    throw Error(path + ": bad magic, not a matrix container");
  std::uint64_t dims[2];
  in.read(reinterpret_cast<char*>(dims), 16);
  if (!in) throw Error(path + ": truncated header");
  const auto rows = static_cast<Index>(io_detail::to_little_endian(dims[0]));
  const auto cols = static_cast<Index>(io_detail::to_little_endian(dims[1]));
  if (rows <= 0 || cols <= 0) throw EmptyView(path + ": empty matrix");
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(rows, cols);
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(rows * cols)));
    if (!in) throw Error(path + ": truncated payload");
  } else {
    for (Index i = 0; i < rows * cols; ++i) {
      std::uint64_t raw;
      in.read(reinterpret_cast<char*>(&raw), 8);
      if (!in) throw Error(path + ": truncated payload");
      m.data()[i] = std::bit_cast<double>(io_detail::to_little_endian(raw));
    }
  }
  Mat result = m;
  require_finite(result, path.c_str());
  return result;
}

inline void write_binary_matrix(const std::string& path, const Mat& matrix) {
  require_finite(matrix, path.c_str());
  auto out = io_detail::open_output(path, true);
  out.write(kBinaryMagic, 8);
  std::uint64_t dims[2] = {io_detail::to_little_endian(static_cast<std::uint64_t>(matrix.rows())),
                           io_detail::to_little_endian(static_cast<std::uint64_t>(matrix.cols()))};
  out.write(reinterpret_cast<const char*>(dims), 16);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m = matrix;
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(m.size())));
  } else {
    for (Index i = 0; i < m.size(); ++i) {
      const std::uint64_t raw = io_detail::to_little_endian(std::bit_cast<std::uint64_t>(m.data()[i]));
      out.write(reinterpret_cast<const char*>(&raw), 8);
    }
  }
}

inline Mat read_matrix(const std::string& path, MatrixFormat format, bool header = false) {
  return format == MatrixFormat::csv ? read_csv_matrix(path, header) : read_binary_matrix(path);
}

struct EdgeRecord {
  std::int64_t i, j;
  double w;
};

/// Whitespace-separated edge list "i j [w]"; blank lines and '#' comments skipped.
inline std::vector<EdgeRecord> read_edge_list(const std::string& path) {
  auto in = io_detail::open_input(path);
  std::vector<EdgeRecord> edges;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const size_t begin = line.find_first_not_of(" \t");
    if (begin == std::string::npos || line[begin] == '#') continue;
    std::istringstream ls(line);
    EdgeRecord e{0, 0, 1.0};
    if (!(ls >> e.i >> e.j)) throw NonNumericEntry(path + ": bad edge line '" + line + "'");
    std::string wtoken;
    if (ls >> wtoken) e.w = io_detail::parse_double(wtoken, path);
    std::string extra;
    if (ls >> extra) throw NonNumericEntry(path + ": trailing tokens on '" + line + "'");
    edges.push_back(e);
  }
  return edges;
}

inline void write_edge_list(const std::string& path, const SpMat& adjacency, bool upper_only = true) {
  auto out = io_detail::open_output(path);
  out.precision(17);
  for (int k = 0; k < adjacency.outerSize(); ++k)
    for (SpMat::InnerIterator it(adjacency, k); it; ++it) {
      if (upper_only && it.row() > it.col()) continue;
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
}

/// One integer class id per line.
inline std::vector<int> read_labels(const std::string& path) {
  auto in = io_detail::open_input(path);
  std::vector<int> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const size_t begin = line.find_first_not_of(" \t");
    if (begin == std::string::npos) continue;
    std::istringstream ls(line);
    long long v;
    if (!(ls >> v)) throw NonNumericEntry(path + ": bad label line '" + line + "'");
    std::string extra;
    if (ls >> extra) throw NonNumericEntry(path + ": trailing tokens on '" + line + "'");
    labels.push_back(static_cast<int>(v));
  }
  if (labels.empty()) throw EmptyView(path + ": no labels");
  return labels;
}

inline void write_labels(const std::string& path, const std::vector<int>& labels) {
  auto out = io_detail::open_output(path);
  for (int v : labels) out << v << '\n';
}

}  // namespace hmvc
