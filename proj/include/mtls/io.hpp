#pragma once

// Matrix and vector text IO. Matrices: Matrix Market (array or coordinate,
// real general) or headerless CSV / whitespace-separated rows, sniffed from
// the first line. Vectors: one value per line, '%' or '#' comments allowed.

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mtls/common.hpp"

namespace mtls {

namespace detail {

inline bool parse_double(const std::string& tok, double& out) {
  try {
    size_t pos = 0;
    out = std::stod(tok, &pos);
    return pos == tok.size();
  } catch (const std::exception&) {
    return false;
  }
}

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',' || std::isspace(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace detail

inline Matrix read_matrix_market(std::istream& is, const std::string& name) {
  std::string banner;
  std::getline(is, banner);
  std::istringstream hdr(banner);
  std::string tag, object, format, field, symmetry;
  hdr >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket" || object != "matrix")
    throw IoError(name + ": not a MatrixMarket matrix header");
  if (field != "real" || symmetry != "general")
    throw IoError(name + ": only 'real general' MatrixMarket data supported");

  std::string line;
  auto next = [&]() -> std::string {
    while (std::getline(is, line)) {
      const size_t pos = line.find_first_not_of(" \t\r");
      if (pos == std::string::npos || line[pos] == '%') continue;
      return line;
    }
    throw IoError(name + ": truncated MatrixMarket data");
  };

  if (format == "array") {
    Index m = 0, n = 0;
    {
      std::istringstream sz(next());
      if (!(sz >> m >> n) || m < 1 || n < 1)
        throw IoError(name + ": bad MatrixMarket size line");
    }
    Matrix a(m, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < m; ++i) {
        std::istringstream val(next());
        if (!(val >> a(i, j))) throw IoError(name + ": bad array value");
      }
    return a;
  }
  if (format == "coordinate") {
    Index m = 0, n = 0;
    long long nnz = 0;
    {
      std::istringstream sz(next());
      if (!(sz >> m >> n >> nnz) || m < 1 || n < 1 || nnz < 0)
        throw IoError(name + ": bad MatrixMarket size line");
    }
    Matrix a = Matrix::Zero(m, n);
    for (long long k = 0; k < nnz; ++k) {
      std::istringstream ent(next());
      Index i = 0, j = 0;
      double v = 0.0;
      if (!(ent >> i >> j >> v) || i < 1 || i > m || j < 1 || j > n)
        throw IoError(name + ": bad coordinate entry");
      a(i - 1, j - 1) = v;
    }
    return a;
  }
  throw IoError(name + ": unsupported MatrixMarket format '" + format + "'");
}

inline Matrix read_matrix_csv(std::istream& is, const std::string& name) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    const size_t pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '%' || line[pos] == '#') continue;
    const std::vector<std::string> fields = detail::split_fields(line);
    std::vector<double> row;
    for (const std::string& tok : fields) {
      double v = 0.0;
      if (!detail::parse_double(tok, v))
        throw IoError(name + ": not a number: '" + tok + "'");
      row.push_back(v);
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(name + ": no data rows");
  const size_t cols = rows.front().size();
  for (const auto& row : rows)
    if (row.size() != cols) throw IoError(name + ": ragged rows");
  Matrix a(Index(rows.size()), Index(cols));
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) a(i, j) = rows[size_t(i)][size_t(j)];
  return a;
}

inline Matrix read_matrix_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path);
  // Sniff: MatrixMarket banner vs raw rows.
  const int first = is.peek();
  if (first == '%') return read_matrix_market(is, path);
  return read_matrix_csv(is, path);
}

inline Vector read_vector_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path);
  std::vector<double> vals;
  std::string line;
  while (std::getline(is, line)) {
    const size_t pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '%' || line[pos] == '#') continue;
    const std::vector<std::string> fields = detail::split_fields(line);
    if (fields.size() != 1)
      throw IoError(path + ": expected one value per line");
    double v = 0.0;
    if (!detail::parse_double(fields[0], v))
      throw IoError(path + ": not a number: '" + fields[0] + "'");
    vals.push_back(v);
  }
  if (vals.empty()) throw IoError(path + ": empty vector");
  return Eigen::Map<const Vector>(vals.data(), Index(vals.size()));
}

inline void write_matrix_market(std::ostream& os, const Matrix& a) {
  os << "%%MatrixMarket matrix array real general\n";
  os << a.rows() << " " << a.cols() << "\n";
  os.precision(17);
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) os << a(i, j) << "\n";
}

inline void write_matrix_file(const std::string& path, const Matrix& a) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  write_matrix_market(os, a);
}

inline void write_vector_file(const std::string& path, const Vector& v) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.precision(17);
  for (Index i = 0; i < v.size(); ++i) os << v(i) << "\n";
}

}  // namespace mtls
