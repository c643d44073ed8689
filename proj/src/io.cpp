#include "wavecqr/io.hpp"

#include "wavecqr/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace wavecqr::io {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? pos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& field, const fs::path& path, std::size_t line_no) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw DataError(path.string() + ":" + std::to_string(line_no) + ": not a number: '" + field + "'");
  }
  return v;
}

void write_comment(std::ostream& out, const std::string& comment) {
  if (comment.empty()) return;
  std::istringstream in(comment);
  std::string line;
  while (std::getline(in, line)) out << "# " << line << '\n';
}

std::ofstream open_out(const fs::path& path) {
  require_writable_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  return out;
}

Index column_of(const Table& t, const std::string& name, const fs::path& path) {
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (t.header[c] == name) return static_cast<Index>(c);
  }
  throw DataError(path.string() + ": missing column '" + name + "'");
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_writable_parent(const fs::path& path) {
  const fs::path parent = path.parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw DataError("output directory '" + parent.string() + "' does not exist");
  }
}

Table read_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  Table t;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    if (!have_header) {
      t.header = split(s);
      have_header = true;
      continue;
    }
    const auto fields = split(s);
    if (fields.size() != t.header.size()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(t.header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_double(f, path, line_no));
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw DataError(path.string() + ": no header row");
  return t;
}

void write_table(const fs::path& path, const Table& table, const std::string& comment) {
  std::ofstream out = open_out(path);
  write_comment(out, comment);
  for (std::size_t c = 0; c < table.header.size(); ++c) out << (c ? "," : "") << table.header[c];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << '\n';
  }
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

Dataset read_dataset(const fs::path& curves, const fs::path& scalars, const fs::path& response) {
  const Table tr = read_table(response);
  if (tr.header.size() != 1) throw DataError(response.string() + ": response file must have exactly one column");
  const Index n = static_cast<Index>(tr.rows.size());
  if (n == 0) throw DataError(response.string() + ": no observations");

  Dataset d;
  d.response.resize(n);
  for (Index i = 0; i < n; ++i) d.response(i) = tr.rows[static_cast<std::size_t>(i)][0];

  Index q = 0;
  if (!scalars.empty()) {
    const Table ts = read_table(scalars);
    const bool none = ts.header.size() == 1 && ts.header[0] == "none" && ts.rows.empty();
    q = none ? 0 : static_cast<Index>(ts.header.size());
    if (!none && static_cast<Index>(ts.rows.size()) != n) {
      throw DataError(scalars.string() + ": " + std::to_string(ts.rows.size()) + " rows but response has " +
                      std::to_string(n));
    }
    d.scalars.resize(n, q);
    for (Index i = 0; i < n && q > 0; ++i) {
      for (Index j = 0; j < q; ++j) d.scalars(i, j) = ts.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  } else {
    d.scalars.resize(n, 0);
  }

  const Table tc = read_table(curves);
  const Index sample_col = column_of(tc, "sample", curves);
  const Index pred_col = column_of(tc, "predictor", curves);
  if (sample_col != 0 || pred_col != 1) throw DataError(curves.string() + ": first columns must be sample,predictor");
  const Index N = static_cast<Index>(tc.header.size()) - 2;
  if (N < 1) throw DataError(curves.string() + ": no grid columns");
  if (tc.rows.size() % static_cast<std::size_t>(n) != 0) {
    throw DataError(curves.string() + ": row count is not a multiple of n = " + std::to_string(n));
  }
  const Index m = static_cast<Index>(tc.rows.size()) / n;
  d.m = m;
  d.grid_len = N;
  d.curves.resize(n, m * N);
  std::vector<char> seen(static_cast<std::size_t>(n * m), 0);
  for (const auto& row : tc.rows) {
    const double si = row[0];
    const double pl = row[1];
    if (si != std::floor(si) || pl != std::floor(pl) || si < 0 || pl < 0 || si >= static_cast<double>(n) ||
        pl >= static_cast<double>(m)) {
      throw DataError(curves.string() + ": sample/predictor index out of range (" + format_double(si) + ", " +
                      format_double(pl) + ")");
    }
    const auto i = static_cast<Index>(si);
    const auto l = static_cast<Index>(pl);
    auto& flag = seen[static_cast<std::size_t>(i * m + l)];
    if (flag) throw DataError(curves.string() + ": duplicate row for sample " + std::to_string(i) + ", predictor " + std::to_string(l));
    flag = 1;
    for (Index j = 0; j < N; ++j) d.curves(i, l * N + j) = row[static_cast<std::size_t>(j + 2)];
  }
  d.validate();
  return d;
}

void write_dataset(const Dataset& data, const fs::path& curves, const fs::path& scalars,
                   const fs::path& response, const std::string& comment) {
  data.validate();
  const Index n = data.n();
  const Index N = data.grid_len;
  Table tc;
  tc.header = {"sample", "predictor"};
  for (Index j = 0; j < N; ++j) tc.header.push_back("t" + std::to_string(j));
  for (Index i = 0; i < n; ++i) {
    for (Index l = 0; l < data.m; ++l) {
      std::vector<double> row{static_cast<double>(i), static_cast<double>(l)};
      for (Index j = 0; j < N; ++j) row.push_back(data.curves(i, l * N + j));
      tc.rows.push_back(std::move(row));
    }
  }
  write_table(curves, tc, comment);

  Table ts;
  for (Index j = 0; j < data.q(); ++j) ts.header.push_back("u" + std::to_string(j + 1));
  if (data.q() == 0) ts.header.push_back("none");
  for (Index i = 0; i < n && data.q() > 0; ++i) {
    std::vector<double> row(static_cast<std::size_t>(data.q()));
    for (Index j = 0; j < data.q(); ++j) row[static_cast<std::size_t>(j)] = data.scalars(i, j);
    ts.rows.push_back(std::move(row));
  }
  write_table(scalars, ts, comment);

  Table ty;
  ty.header = {"y"};
  for (Index i = 0; i < n; ++i) ty.rows.push_back({data.response(i)});
  write_table(response, ty, comment);
}

void write_coefficients(const fs::path& path, const CoefficientSet& params, const std::string& comment) {
  std::ofstream out = open_out(path);
  write_comment(out, comment);
  out << "kind,index,value\n";
  for (Index k = 0; k < params.alpha.size(); ++k) out << "alpha," << k << ',' << format_double(params.alpha(k)) << '\n';
  for (Index j = 0; j < params.gamma.size(); ++j) out << "gamma," << j << ',' << format_double(params.gamma(j)) << '\n';
  for (Index j = 0; j < params.theta.size(); ++j) out << "theta," << j << ',' << format_double(params.theta(j)) << '\n';
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

CoefficientSet read_coefficients(const fs::path& path, Index m, Index grid_len) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::vector<double> alpha, gamma, theta;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    if (!header) {
      if (s != "kind,index,value") throw DataError(path.string() + ": expected header kind,index,value");
      header = true;
      continue;
    }
    const auto f = split(s);
    if (f.size() != 3) throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 3 fields");
    const double idx = parse_double(f[1], path, line_no);
    const double v = parse_double(f[2], path, line_no);
    std::vector<double>* dest = nullptr;
    if (f[0] == "alpha") dest = &alpha;
    else if (f[0] == "gamma") dest = &gamma;
    else if (f[0] == "theta") dest = &theta;
    else throw DataError(path.string() + ":" + std::to_string(line_no) + ": unknown kind '" + f[0] + "'");
    if (idx != static_cast<double>(dest->size())) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": indices must be consecutive from 0");
    }
    dest->push_back(v);
  }
  if (static_cast<Index>(theta.size()) != m * grid_len) {
    throw DimensionError(path.string() + ": theta has " + std::to_string(theta.size()) + " entries, expected " +
                         std::to_string(m * grid_len));
  }
  CoefficientSet out;
  out.m = m;
  out.grid_len = grid_len;
  out.alpha = Eigen::Map<const VectorXd>(alpha.data(), static_cast<Index>(alpha.size()));
  out.gamma = Eigen::Map<const VectorXd>(gamma.data(), static_cast<Index>(gamma.size()));
  out.theta = Eigen::Map<const VectorXd>(theta.data(), static_cast<Index>(theta.size()));
  return out;
}

void write_curves_matrix(const fs::path& path, const MatrixXd& betas, const std::string& comment) {
  Table t;
  t.header = {"predictor"};
  for (Index j = 0; j < betas.cols(); ++j) t.header.push_back("t" + std::to_string(j));
  for (Index l = 0; l < betas.rows(); ++l) {
    std::vector<double> row{static_cast<double>(l)};
    for (Index j = 0; j < betas.cols(); ++j) row.push_back(betas(l, j));
    t.rows.push_back(std::move(row));
  }
  write_table(path, t, comment);
}

MatrixXd read_curves_matrix(const fs::path& path) {
  const Table t = read_table(path);
  if (t.header.empty() || t.header[0] != "predictor") throw DataError(path.string() + ": first column must be predictor");
  const Index m = static_cast<Index>(t.rows.size());
  const Index N = static_cast<Index>(t.header.size()) - 1;
  MatrixXd out(m, N);
  for (Index l = 0; l < m; ++l) {
    const auto& row = t.rows[static_cast<std::size_t>(l)];
    if (row[0] != static_cast<double>(l)) throw DataError(path.string() + ": predictor rows must be 0..m-1 in order");
    for (Index j = 0; j < N; ++j) out(l, j) = row[static_cast<std::size_t>(j + 1)];
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

}  // namespace wavecqr::io
