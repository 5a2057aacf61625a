// Matrix Market I/O: coordinate and array formats for dense matrices,
// one-column arrays for vectors. Values round-trip bit-exactly.
#pragma once

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bicgql/dense_matrix.hpp"
#include "bicgql/errors.hpp"
#include "bicgql/vector_ops.hpp"

namespace bicgql {

enum class MmFormat { Array, Coordinate };

namespace detail {

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// 17 significant digits: enough to reproduce any double exactly on read-back.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::istream& next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    std::size_t i = 0;
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i == line.size() || line[i] == '%') continue;
    return in;
  }
  return in;
}

}  // namespace detail

inline void write_matrix_market(const std::filesystem::path& path, const DenseMatrix& m,
                                MmFormat format = MmFormat::Array) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  if (format == MmFormat::Array) {
    out << "%%MatrixMarket matrix array real general\n";
    out << m.rows() << " " << m.cols() << "\n";
    // Array format stores entries column by column.
    for (std::size_t j = 0; j < m.cols(); ++j)
      for (std::size_t i = 0; i < m.rows(); ++i)
        out << detail::format_double(m(i, j)) << "\n";
  } else {
    std::size_t nnz = 0;
    for (double v : m.data())
      if (v != 0.0) ++nnz;
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.rows() << " " << m.cols() << " " << nnz << "\n";
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j)
        if (m(i, j) != 0.0)
          out << (i + 1) << " " << (j + 1) << " " << detail::format_double(m(i, j)) << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline void write_matrix_market(const std::filesystem::path& path, const Vector& v) {
  DenseMatrix m(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
  write_matrix_market(path, m, MmFormat::Array);
}

inline DenseMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());

  std::string banner;
  if (!std::getline(in, banner) || banner.rfind("%%MatrixMarket", 0) != 0)
    throw IoError("missing MatrixMarket banner: " + path.string());
  std::istringstream bs(banner);
  std::string tag, object, format, field, symmetry;
  bs >> tag >> object >> format >> field >> symmetry;
  object = detail::lower(object);
  format = detail::lower(format);
  field = detail::lower(field);
  symmetry = detail::lower(symmetry);
  if (object != "matrix") throw IoError("unsupported MatrixMarket object: " + object);
  if (field != "real" && field != "integer")
    throw IoError("unsupported MatrixMarket field: " + field);
  if (symmetry != "general" && symmetry != "symmetric")
    throw IoError("unsupported MatrixMarket symmetry: " + symmetry);
  const bool symmetric = symmetry == "symmetric";

  std::string line;
  if (!detail::next_data_line(in, line)) throw IoError("missing size line: " + path.string());
  std::istringstream sz(line);

  if (format == "coordinate") {
    long long rows = 0, cols = 0, nnz = 0;
    sz >> rows >> cols >> nnz;
    if (!sz || rows <= 0 || cols <= 0 || nnz < 0)
      throw IoError("bad coordinate size line: " + path.string());
    DenseMatrix m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    for (long long e = 0; e < nnz; ++e) {
      if (!detail::next_data_line(in, line)) throw IoError("truncated entries: " + path.string());
      std::istringstream es(line);
      long long i = 0, j = 0;
      double v = 0.0;
      es >> i >> j >> v;
      if (!es || i < 1 || j < 1 || i > rows || j > cols)
        throw IoError("bad coordinate entry: " + path.string());
      if (!std::isfinite(v)) throw IoError("non-finite entry: " + path.string());
      m(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1)) = v;
      if (symmetric && i != j)
        m(static_cast<std::size_t>(j - 1), static_cast<std::size_t>(i - 1)) = v;
    }
    return m;
  }

  if (format != "array") throw IoError("unsupported MatrixMarket format: " + format);
  long long rows = 0, cols = 0;
  sz >> rows >> cols;
  if (!sz || rows <= 0 || cols <= 0) throw IoError("bad array size line: " + path.string());
  DenseMatrix m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
  if (symmetric) {
    if (rows != cols) throw IoError("symmetric array must be square: " + path.string());
    for (long long j = 0; j < cols; ++j) {
      for (long long i = j; i < rows; ++i) {
        if (!detail::next_data_line(in, line)) throw IoError("truncated array: " + path.string());
        double v = 0.0;
        std::istringstream es(line);
        es >> v;
        if (!es || !std::isfinite(v)) throw IoError("bad array entry: " + path.string());
        m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = v;
        m(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = v;
      }
    }
  } else {
    for (long long j = 0; j < cols; ++j) {
      for (long long i = 0; i < rows; ++i) {
        if (!detail::next_data_line(in, line)) throw IoError("truncated array: " + path.string());
        double v = 0.0;
        std::istringstream es(line);
        es >> v;
        if (!es || !std::isfinite(v)) throw IoError("bad array entry: " + path.string());
        m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = v;
      }
    }
  }
  return m;
}

inline Vector read_matrix_market_vector(const std::filesystem::path& path) {
  const DenseMatrix m = read_matrix_market(path);
  if (m.cols() != 1) throw IoError("expected a one-column vector: " + path.string());
  Vector v(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) v[i] = m(i, 0);
  return v;
}

}  // namespace bicgql
