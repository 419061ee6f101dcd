#pragma once

#include <Eigen/Dense>
#include <string>

#include "membrane/sampler.hpp"

namespace membrane {

/// Shortest/17-significant-digit decimal form that round-trips a double.
std::string format_double17(double v);

/// Row-major CSV, one row per line, entries at 17 significant digits.
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& mat);

/// Little-endian binary: two 64-bit dimensions (rows, cols) followed by the
/// row-major 64-bit float entries.
void write_matrix_binary(const std::string& path, const Eigen::MatrixXd& mat);
Eigen::MatrixXd read_matrix_binary(const std::string& path);

/// CSV with a header line of vertex indices, then one configuration per row.
void write_batch_csv(const std::string& path, const FieldSampleBatch& batch);

void write_text_file(const std::string& path, const std::string& contents);

}  // namespace membrane
