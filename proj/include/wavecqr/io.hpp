#pragma once

#include "wavecqr/model.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace wavecqr::io {

namespace fs = std::filesystem;

/// Plain numeric table with a header row. Lines starting with '#' are
/// comments (provenance headers) and are skipped on read.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table read_table(const fs::path& path);
void write_table(const fs::path& path, const Table& table, const std::string& comment = {});

/// 17 significant digits, shortest round-trip not attempted.
std::string format_double(double v);

/// Curves file: columns sample, predictor, t0..t{N-1}; one row per
/// (sample, predictor), zero-based indices, any row order.
/// Scalars file: columns u1..uq; an empty path or a lone "none" header means
/// q = 0. Response file: column y.
Dataset read_dataset(const fs::path& curves, const fs::path& scalars, const fs::path& response);
void write_dataset(const Dataset& data, const fs::path& curves, const fs::path& scalars,
                   const fs::path& response, const std::string& comment = {});

/// Coefficients file: columns kind, index, value; kind in {alpha, gamma, theta}.
void write_coefficients(const fs::path& path, const CoefficientSet& params, const std::string& comment = {});
CoefficientSet read_coefficients(const fs::path& path, Index m, Index grid_len);

/// m x N matrix with columns predictor, t0..
void write_curves_matrix(const fs::path& path, const MatrixXd& betas, const std::string& comment = {});
MatrixXd read_curves_matrix(const fs::path& path);

void write_text(const fs::path& path, const std::string& text);

/// Checks the parent directory of an output path exists.
void require_writable_parent(const fs::path& path);

}  // namespace wavecqr::io
