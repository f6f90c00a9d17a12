#include "napi/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace napi {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open for reading: " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open for writing: " + path);
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

Matrix read_csv_matrix(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw config_error("bad CSV value '" + cell + "' in " + path);
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw config_error("ragged CSV rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw config_error("empty CSV matrix: " + path);
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

void write_csv_matrix(const std::string& path, const Matrix& m) {
  std::ofstream out = open_out(path);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << fmt(m(i, j));
    }
    out << '\n';
  }
}

Matrix read_matrix_market(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string header;
  if (!std::getline(in, header) || header.rfind("%%MatrixMarket", 0) != 0)
    throw config_error("missing MatrixMarket banner in " + path);
  std::string banner = lower(header);
  const bool coordinate = banner.find("coordinate") != std::string::npos;
  const bool array = banner.find("array") != std::string::npos;
  const bool symmetric = banner.find("symmetric") != std::string::npos;
  if (!coordinate && !array) throw config_error("unsupported MatrixMarket layout in " + path);
  if (banner.find("complex") != std::string::npos || banner.find("pattern") != std::string::npos)
    throw config_error("only real-valued MatrixMarket files supported: " + path);

  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  std::stringstream ss(line);
  Index rows = 0, cols = 0;
  std::int64_t entries = 0;
  if (coordinate) {
    if (!(ss >> rows >> cols >> entries)) throw config_error("bad size line in " + path);
  } else {
    if (!(ss >> rows >> cols)) throw config_error("bad size line in " + path);
    entries = static_cast<std::int64_t>(rows) * cols;
  }
  if (rows < 1 || cols < 1) throw config_error("bad dimensions in " + path);
  Matrix m = Matrix::Zero(rows, cols);
  if (coordinate) {
    for (std::int64_t e = 0; e < entries; ++e) {
      Index i, j;
      double v;
      if (!(in >> i >> j >> v)) throw config_error("truncated MatrixMarket data in " + path);
      if (i < 1 || i > rows || j < 1 || j > cols)
        throw config_error("index out of range in " + path);
      m(i - 1, j - 1) = v;
      if (symmetric && i != j) m(j - 1, i - 1) = v;
    }
  } else {
    // array layout stores columns contiguously; symmetric files hold the
    // lower triangle only
    for (Index j = 0; j < cols; ++j) {
      for (Index i = symmetric ? j : Index(0); i < rows; ++i) {
        double v;
        if (!(in >> v)) throw config_error("truncated MatrixMarket data in " + path);
        m(i, j) = v;
        if (symmetric && i != j) m(j, i) = v;
      }
    }
  }
  return m;
}

void write_matrix_market(const std::string& path, const Matrix& m) {
  std::ofstream out = open_out(path);
  std::int64_t nnz = (m.array() != 0.0).count();
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << nnz << '\n';
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (m(i, j) != 0.0) out << i + 1 << ' ' << j + 1 << ' ' << fmt(m(i, j)) << '\n';
}

Matrix load_matrix(const std::string& path) {
  auto dot = path.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : lower(path.substr(dot + 1));
  if (ext == "mtx" || ext == "mm") return read_matrix_market(path);
  return read_csv_matrix(path);
}

void write_trace_csv(const std::string& path, const ConvergenceTrace& trace, bool include_wall) {
  std::ofstream out = open_out(path);
  out << "t,passes,sin_theta,alpha,ls_ratio,wall_ms\n";
  for (const TraceRow& row : trace.rows) {
    out << row.t << ',' << fmt(row.passes) << ',' << fmt(row.sin_theta) << ','
        << fmt(row.alpha) << ',' << fmt(row.ls_ratio) << ','
        << fmt(include_wall ? row.wall_ms : 0.0) << '\n';
  }
}

}  // namespace napi
