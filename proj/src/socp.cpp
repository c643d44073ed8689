#include "wavecqr/socp.hpp"

#include "wavecqr/errors.hpp"
#include "wavecqr/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace wavecqr {

namespace {

std::string sense_name(Sense s) {
  switch (s) {
    case Sense::le: return "le";
    case Sense::eq: return "eq";
    case Sense::ge: return "ge";
  }
  return "le";
}

double row_value(const LinearRow& row, const VectorXd& x) {
  double v = 0.0;
  for (const auto& e : row.coeffs) v += e.value * x(e.index);
  return v;
}

std::string idx2(const char* base, Index a, Index b) {
  return std::string(base) + "[" + std::to_string(a) + "," + std::to_string(b) + "]";
}

std::string idx1(const char* base, Index a) { return std::string(base) + "[" + std::to_string(a) + "]"; }

}  // namespace

void ConicProblem::validate() const {
  if (static_cast<Index>(nonneg.size()) != num_vars || static_cast<Index>(var_names.size()) != num_vars) {
    throw DimensionError("conic problem: bounds and names must cover every variable");
  }
  auto check = [&](Index j, const char* where) {
    if (j < 0 || j >= num_vars) throw DimensionError(std::string("conic problem: index out of range in ") + where);
  };
  for (const auto& e : objective) check(e.index, "objective");
  for (const auto& r : rows) {
    for (const auto& e : r.coeffs) check(e.index, "row");
  }
  for (const auto& c : cones) {
    if (c.size() < 2) throw DimensionError("conic problem: cone needs a head and a tail");
    std::vector<Index> sorted = c;
    for (Index j : sorted) check(j, "cone");
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw DimensionError("conic problem: cone indices are not distinct");
    }
  }
}

ConicProblem build_socp(const Design& design, const VectorXd& y, const QuantileLevels& taus, const PenaltySpec& pen) {
  pen.validate();
  const Index n = design.n();
  if (n == 0) throw DimensionError("SOCP needs at least one observation");
  if (y.size() != n) throw DimensionError("response length differs from design rows");
  if (design.p() != 1 + design.theta_size() + design.q) throw DimensionError("design column count is inconsistent");
  const Index K = taus.size();
  const Index N = design.grid_len;
  const Index P = design.theta_size();

  ConicProblem pr;
  pr.K = K;
  pr.q = design.q;
  pr.m = design.m;
  pr.grid_len = N;
  pr.n = n;
  pr.num_vars = K + design.q + 2 * P + design.m + 2 * K * n;
  pr.nonneg.assign(static_cast<std::size_t>(pr.num_vars), true);
  pr.var_names.resize(static_cast<std::size_t>(pr.num_vars));
  auto name = [&](Index j) -> std::string& { return pr.var_names[static_cast<std::size_t>(j)]; };

  for (Index k = 0; k < K; ++k) {
    name(pr.alpha_offset() + k) = idx1("alpha", k);
    pr.nonneg[static_cast<std::size_t>(pr.alpha_offset() + k)] = false;
  }
  for (Index j = 0; j < design.q; ++j) {
    name(pr.gamma_offset() + j) = idx1("gamma", j);
    pr.nonneg[static_cast<std::size_t>(pr.gamma_offset() + j)] = false;
  }
  for (Index l = 0; l < design.m; ++l) {
    for (Index j = 0; j < N; ++j) {
      name(pr.theta_pos_offset() + l * N + j) = idx2("theta_pos", l, j);
      name(pr.theta_neg_offset() + l * N + j) = idx2("theta_neg", l, j);
    }
    name(pr.z_offset() + l) = idx1("z", l);
  }
  for (Index k = 0; k < K; ++k) {
    for (Index i = 0; i < n; ++i) {
      name(pr.r_pos_offset() + k * n + i) = idx2("r_pos", k, i);
      name(pr.r_neg_offset() + k * n + i) = idx2("r_neg", k, i);
    }
  }

  if (pen.lambda1 != 0.0) {
    for (Index j = 0; j < P; ++j) pr.objective.push_back({pr.theta_pos_offset() + j, pen.lambda1});
    for (Index j = 0; j < P; ++j) pr.objective.push_back({pr.theta_neg_offset() + j, pen.lambda1});
  }
  if (pen.lambda2 != 0.0) {
    for (Index l = 0; l < design.m; ++l) pr.objective.push_back({pr.z_offset() + l, pen.lambda2});
  }
  for (Index k = 0; k < K; ++k) {
    for (Index i = 0; i < n; ++i) pr.objective.push_back({pr.r_pos_offset() + k * n + i, taus[k]});
  }
  for (Index k = 0; k < K; ++k) {
    for (Index i = 0; i < n; ++i) pr.objective.push_back({pr.r_neg_offset() + k * n + i, 1.0 - taus[k]});
  }

  // a_ki'x + r+ >= y_i and a_ki'x - r- <= y_i.
  pr.rows.reserve(static_cast<std::size_t>(2 * K * n));
  for (Index k = 0; k < K; ++k) {
    for (Index i = 0; i < n; ++i) {
      std::vector<SparseEntry> fit;
      fit.push_back({pr.alpha_offset() + k, 1.0});
      for (Index j = 0; j < design.q; ++j) fit.push_back({pr.gamma_offset() + j, design.rows(i, 1 + P + j)});
      for (Index j = 0; j < P; ++j) {
        const double v = design.rows(i, 1 + j);
        if (v == 0.0) continue;
        fit.push_back({pr.theta_pos_offset() + j, v});
        fit.push_back({pr.theta_neg_offset() + j, -v});
      }
      LinearRow upper{fit, Sense::ge, y(i)};
      upper.coeffs.push_back({pr.r_pos_offset() + k * n + i, 1.0});
      LinearRow lower{std::move(fit), Sense::le, y(i)};
      lower.coeffs.push_back({pr.r_neg_offset() + k * n + i, -1.0});
      pr.rows.push_back(std::move(upper));
      pr.rows.push_back(std::move(lower));
    }
  }

  for (Index l = 0; l < design.m; ++l) {
    std::vector<Index> cone;
    cone.reserve(static_cast<std::size_t>(2 * N + 1));
    cone.push_back(pr.z_offset() + l);
    for (Index j = 0; j < N; ++j) cone.push_back(pr.theta_pos_offset() + l * N + j);
    for (Index j = 0; j < N; ++j) cone.push_back(pr.theta_neg_offset() + l * N + j);
    pr.cones.push_back(std::move(cone));
  }
  return pr;
}

VectorXd lift(const CoefficientSet& params, const ConicProblem& pr, const Design& design, const VectorXd& y,
              const QuantileLevels& taus) {
  check_dimensions(params, design, taus.size());
  if (pr.K != taus.size() || pr.n != design.n() || pr.m != design.m || pr.grid_len != design.grid_len ||
      pr.q != design.q) {
    throw DimensionError("conic problem shape differs from the design");
  }
  const Index n = design.n();
  const Index N = design.grid_len;
  VectorXd x = VectorXd::Zero(pr.num_vars);
  x.segment(pr.alpha_offset(), pr.K) = params.alpha;
  x.segment(pr.gamma_offset(), pr.q) = params.gamma;
  const Index P = design.theta_size();
  x.segment(pr.theta_pos_offset(), P) = params.theta.cwiseMax(0.0);
  x.segment(pr.theta_neg_offset(), P) = (-params.theta).cwiseMax(0.0);
  for (Index l = 0; l < design.m; ++l) x(pr.z_offset() + l) = params.theta.segment(l * N, N).norm();
  for (Index k = 0; k < pr.K; ++k) {
    const VectorXd r = y - predict_quantile(params, design, k);
    x.segment(pr.r_pos_offset() + k * n, n) = r.cwiseMax(0.0);
    x.segment(pr.r_neg_offset() + k * n, n) = (-r).cwiseMax(0.0);
  }
  return x;
}

VectorXd canonicalize(const ConicProblem& pr, const VectorXd& point) {
  if (point.size() != pr.num_vars) throw DimensionError("point length differs from the number of variables");
  VectorXd x = point;
  const Index P = pr.m * pr.grid_len;
  for (Index j = 0; j < P; ++j) {
    const double d = point(pr.theta_pos_offset() + j) - point(pr.theta_neg_offset() + j);
    x(pr.theta_pos_offset() + j) = std::max(d, 0.0);
    x(pr.theta_neg_offset() + j) = std::max(-d, 0.0);
  }
  for (const auto& cone : pr.cones) {
    double sq = 0.0;
    for (std::size_t t = 1; t < cone.size(); ++t) sq += x(cone[t]) * x(cone[t]);
    x(cone[0]) = std::sqrt(sq);
  }
  return x;
}

double conic_objective(const ConicProblem& pr, const VectorXd& point) {
  if (point.size() != pr.num_vars) throw DimensionError("point length differs from the number of variables");
  double v = 0.0;
  for (const auto& e : pr.objective) v += e.value * point(e.index);
  return v;
}

FeasibilityReport verify_feasible(const ConicProblem& pr, const VectorXd& point, double tol) {
  if (point.size() != pr.num_vars) throw DimensionError("point length differs from the number of variables");
  FeasibilityReport rep;
  auto note = [&](double violation, const std::string& what) {
    if (violation > rep.max_violation) {
      rep.max_violation = violation;
      rep.worst = what;
    }
  };
  for (Index j = 0; j < pr.num_vars; ++j) {
    if (!std::isfinite(point(j))) note(std::numeric_limits<double>::infinity(), "variable " + pr.var_names[static_cast<std::size_t>(j)] + " is not finite");
    if (pr.nonneg[static_cast<std::size_t>(j)] && point(j) < 0.0) {
      note(-point(j), "bound " + pr.var_names[static_cast<std::size_t>(j)] + " >= 0");
    }
  }
  for (std::size_t r = 0; r < pr.rows.size(); ++r) {
    const LinearRow& row = pr.rows[r];
    const double v = row_value(row, point);
    double viol = 0.0;
    switch (row.sense) {
      case Sense::le: viol = v - row.rhs; break;
      case Sense::ge: viol = row.rhs - v; break;
      case Sense::eq: viol = std::abs(v - row.rhs); break;
    }
    if (viol > 0.0) note(viol, "row " + std::to_string(r) + " (" + sense_name(row.sense) + ")");
  }
  for (std::size_t c = 0; c < pr.cones.size(); ++c) {
    const auto& cone = pr.cones[c];
    double sq = 0.0;
    for (std::size_t t = 1; t < cone.size(); ++t) sq += point(cone[t]) * point(cone[t]);
    const double viol = std::sqrt(sq) - point(cone[0]);
    if (viol > 0.0) note(viol, "cone " + std::to_string(c) + " head " + pr.var_names[static_cast<std::size_t>(cone[0])]);
  }
  rep.feasible = rep.max_violation <= tol;
  if (rep.feasible) rep.worst.clear();
  rep.objective = conic_objective(pr, point);
  return rep;
}

void write_socp(std::ostream& out, const ConicProblem& pr) {
  pr.validate();
  out << "WAVECQR-SOCP 1\n";
  out << "dims " << pr.num_vars << ' ' << pr.rows.size() << ' ' << pr.cones.size() << ' ' << pr.K << ' ' << pr.q
      << ' ' << pr.m << ' ' << pr.grid_len << ' ' << pr.n << '\n';
  for (Index j = 0; j < pr.num_vars; ++j) {
    out << "var " << j << ' ' << (pr.nonneg[static_cast<std::size_t>(j)] ? "nonneg" : "free") << ' '
        << pr.var_names[static_cast<std::size_t>(j)] << '\n';
  }
  for (const auto& e : pr.objective) out << "obj " << e.index << ' ' << io::format_double(e.value) << '\n';
  for (const auto& row : pr.rows) {
    out << "row " << sense_name(row.sense) << ' ' << io::format_double(row.rhs) << ' ' << row.coeffs.size();
    for (const auto& e : row.coeffs) out << ' ' << e.index << ' ' << io::format_double(e.value);
    out << '\n';
  }
  for (const auto& cone : pr.cones) {
    out << "cone " << cone.size();
    for (Index j : cone) out << ' ' << j;
    out << '\n';
  }
  out << "end\n";
}

void export_socp(const ConicProblem& problem, const std::filesystem::path& path) {
  io::require_writable_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  write_socp(out, problem);
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

ConicProblem read_socp(std::istream& in) {
  ConicProblem pr;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) -> DataError {
    return DataError("socp line " + std::to_string(line_no) + ": " + msg);
  };
  if (!std::getline(in, line)) throw DataError("socp line 1: empty input");
  ++line_no;
  if (line != "WAVECQR-SOCP 1") throw fail("expected header 'WAVECQR-SOCP 1'");

  std::size_t expect_rows = 0, expect_cones = 0;
  bool have_dims = false, ended = false;
  Index next_var = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (ended) {
      if (!line.empty()) throw fail("content after 'end'");
      continue;
    }
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    auto want = [&](auto& v, const char* what) {
      if (!(ls >> v)) throw fail(std::string("cannot read ") + what);
    };
    auto want_index = [&](Index& j, const char* what) {
      want(j, what);
      if (j < 0 || j >= pr.num_vars) throw fail(std::string(what) + " out of range");
    };
    if (tag == "dims") {
      if (have_dims) throw fail("repeated dims record");
      want(pr.num_vars, "num_vars");
      want(expect_rows, "row count");
      want(expect_cones, "cone count");
      want(pr.K, "K");
      want(pr.q, "q");
      want(pr.m, "m");
      want(pr.grid_len, "N");
      want(pr.n, "n");
      if (pr.num_vars < 0) throw fail("negative variable count");
      pr.nonneg.assign(static_cast<std::size_t>(pr.num_vars), false);
      pr.var_names.resize(static_cast<std::size_t>(pr.num_vars));
      have_dims = true;
    } else if (!have_dims) {
      throw fail("expected dims record");
    } else if (tag == "var") {
      Index j = 0;
      std::string kind, name;
      want(j, "variable index");
      want(kind, "bound kind");
      want(name, "variable name");
      if (j != next_var) throw fail("variables must be listed in order");
      if (j >= pr.num_vars) throw fail("variable index out of range");
      if (kind != "free" && kind != "nonneg") throw fail("bound kind must be free or nonneg");
      pr.nonneg[static_cast<std::size_t>(j)] = kind == "nonneg";
      pr.var_names[static_cast<std::size_t>(j)] = name;
      ++next_var;
    } else if (tag == "obj") {
      SparseEntry e;
      want_index(e.index, "objective index");
      want(e.value, "objective value");
      pr.objective.push_back(e);
    } else if (tag == "row") {
      std::string sense;
      LinearRow row;
      std::size_t count = 0;
      want(sense, "row sense");
      if (sense == "le") row.sense = Sense::le;
      else if (sense == "ge") row.sense = Sense::ge;
      else if (sense == "eq") row.sense = Sense::eq;
      else throw fail("row sense must be le, eq or ge");
      want(row.rhs, "row rhs");
      want(count, "row entry count");
      row.coeffs.resize(count);
      for (auto& e : row.coeffs) {
        want_index(e.index, "row index");
        want(e.value, "row value");
      }
      pr.rows.push_back(std::move(row));
    } else if (tag == "cone") {
      std::size_t count = 0;
      want(count, "cone size");
      std::vector<Index> cone(count);
      for (auto& j : cone) want_index(j, "cone index");
      pr.cones.push_back(std::move(cone));
    } else if (tag == "end") {
      ended = true;
      continue;
    } else {
      throw fail("unknown record '" + tag + "'");
    }
    std::string extra;
    if (ls >> extra) throw fail("trailing field '" + extra + "'");
  }
  if (!ended) throw fail("missing 'end' record");
  if (next_var != pr.num_vars) throw fail("expected " + std::to_string(pr.num_vars) + " var records");
  if (pr.rows.size() != expect_rows || pr.cones.size() != expect_cones) throw fail("record counts differ from dims");
  try {
    pr.validate();
  } catch (const DimensionError& e) {
    throw fail(e.what());
  }
  return pr;
}

ConicProblem import_socp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_socp(in);
}

}  // namespace wavecqr
