#pragma once

#include "wavecqr/model.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace wavecqr {

enum class Sense { le, eq, ge };

struct SparseEntry {
  Index index = 0;
  double value = 0.0;

  bool operator==(const SparseEntry&) const = default;
};

struct LinearRow {
  std::vector<SparseEntry> coeffs;
  Sense sense = Sense::le;
  double rhs = 0.0;

  bool operator==(const LinearRow&) const = default;
};

/// min c'x  s.t. linear rows, x_j >= 0 for nonneg variables, and
/// x[cone[0]] >= ||x[cone[1..]]||_2 for every cone.
///
/// Variable order: alpha (K), gamma (q), theta+ (mN), theta- (mN), z (m),
/// r+ (K*n, level-major), r- (K*n). Cone l is (z_l, theta+_l, theta-_l).
struct ConicProblem {
  Index num_vars = 0;
  std::vector<SparseEntry> objective;
  std::vector<LinearRow> rows;
  std::vector<std::vector<Index>> cones;
  /// true: lower bound 0; false: free.
  std::vector<bool> nonneg;
  std::vector<std::string> var_names;

  // Shape of the originating model.
  Index K = 0, q = 0, m = 0, grid_len = 0, n = 0;

  Index alpha_offset() const { return 0; }
  Index gamma_offset() const { return K; }
  Index theta_pos_offset() const { return K + q; }
  Index theta_neg_offset() const { return K + q + m * grid_len; }
  Index z_offset() const { return K + q + 2 * m * grid_len; }
  Index r_pos_offset() const { return z_offset() + m; }
  Index r_neg_offset() const { return r_pos_offset() + K * n; }

  /// Throws DimensionError when an invariant (valid indices, distinct cone
  /// members, names per variable) fails.
  void validate() const;

  bool operator==(const ConicProblem&) const = default;
};

ConicProblem build_socp(const Design& design, const VectorXd& y, const QuantileLevels& taus, const PenaltySpec& pen);

/// Exact positive/negative split of theta, tight residual slacks and
/// z_l = ||theta_l||_2.
VectorXd lift(const CoefficientSet& params, const ConicProblem& problem, const Design& design, const VectorXd& y,
              const QuantileLevels& taus);

/// Replaces every pair (b+_j, b-_j) by (max(b+ - b-, 0), max(b- - b+, 0)) and
/// every cone head z_l by the norm of its (new) tail.
VectorXd canonicalize(const ConicProblem& problem, const VectorXd& point);

double conic_objective(const ConicProblem& problem, const VectorXd& point);

struct FeasibilityReport {
  bool feasible = false;
  double max_violation = 0.0;
  double objective = 0.0;
  /// Description of the worst violated constraint, empty when feasible.
  std::string worst;
};

FeasibilityReport verify_feasible(const ConicProblem& problem, const VectorXd& point, double tol = 1e-9);

/// Line format, one record per line:
///   WAVECQR-SOCP 1
///   dims <num_vars> <rows> <cones> <K> <q> <m> <N> <n>
///   var <index> <free|nonneg> <name>
///   obj <index> <value>
///   row <le|eq|ge> <rhs> <count> (<index> <value>)*
///   cone <count> <index>*
///   end
/// Floats use 17 significant digits.
void write_socp(std::ostream& out, const ConicProblem& problem);
void export_socp(const ConicProblem& problem, const std::filesystem::path& path);
/// Throws DataError naming the offending line on malformed input.
ConicProblem read_socp(std::istream& in);
ConicProblem import_socp(const std::filesystem::path& path);

}  // namespace wavecqr
