#include "membrane/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace membrane {

static_assert(sizeof(double) == 8);

std::string format_double17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& mat) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  std::string line;
  for (Eigen::Index i = 0; i < mat.rows(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < mat.cols(); ++j) {
      if (j) line += ',';
      line += format_double17(mat(i, j));
    }
    line += '\n';
    out << line;
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_matrix_binary(const std::string& path, const Eigen::MatrixXd& mat) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const std::uint64_t dims[2] = {static_cast<std::uint64_t>(mat.rows()),
                                 static_cast<std::uint64_t>(mat.cols())};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  std::vector<double> row(mat.cols());
  for (Eigen::Index i = 0; i < mat.rows(); ++i) {
    for (Eigen::Index j = 0; j < mat.cols(); ++j) row[j] = mat(i, j);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Eigen::MatrixXd read_matrix_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::uint64_t dims[2];
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  Eigen::MatrixXd mat(dims[0], dims[1]);
  std::vector<double> row(dims[1]);
  for (std::uint64_t i = 0; i < dims[0]; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(double)));
    for (std::uint64_t j = 0; j < dims[1]; ++j) mat(i, j) = row[j];
  }
  if (!in) throw std::runtime_error("read failed: " + path);
  return mat;
}

void write_batch_csv(const std::string& path, const FieldSampleBatch& batch) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (Eigen::Index j = 0; j < batch.samples.cols(); ++j) {
    if (j) out << ',';
    out << j;
  }
  out << '\n';
  for (Eigen::Index i = 0; i < batch.samples.rows(); ++i) {
    for (Eigen::Index j = 0; j < batch.samples.cols(); ++j) {
      if (j) out << ',';
      out << format_double17(batch.samples(i, j));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << contents;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace membrane
