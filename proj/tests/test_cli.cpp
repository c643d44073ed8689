#include "wavecqr/cli.hpp"
#include "wavecqr/errors.hpp"
#include "wavecqr/io.hpp"
#include "wavecqr/simgen.hpp"
#include "wavecqr/socp.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace wavecqr;
namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("wavecqr_test_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator/(const std::string& f) const { return (dir / f).string(); }
};

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json read_json(const std::string& path) { return nlohmann::json::parse(slurp(path)); }

std::vector<std::string> data_args(const Scratch& s) {
  return {"--curves", s / "curves.csv", "--scalars", s / "scalars.csv", "--response", s / "response.csv"};
}

std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

void simulate(const Scratch& s, const std::string& n = "60") {
  const auto r = run({"simulate", "--n", n, "--snr", "5", "--noise", "normal", "--seed", "7", "--grid-len", "32",
                      "--out-dir", s.dir.string()});
  REQUIRE(r.code == 0);
}

}  // namespace

TEST_CASE("table and dataset round trip") {
  Scratch s("io");
  io::Table t;
  t.header = {"a", "b"};
  t.rows = {{1.0, 0.1}, {-2.5, 1e-300}};
  io::write_table(s / "t.csv", t, "note: x=1");
  const std::string text = slurp(s / "t.csv");
  CHECK(text.rfind("# note: x=1\n", 0) == 0);
  const io::Table back = io::read_table(s / "t.csv");
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);

  sim::SimConfig c;
  c.n = 5;
  c.grid_len = 8;
  const auto d = sim::gen_dataset(c);
  io::write_dataset(d.data, s / "c.csv", s / "u.csv", s / "y.csv");
  const Dataset r = io::read_dataset(s / "c.csv", s / "u.csv", s / "y.csv");
  CHECK(r.curves == d.data.curves);
  CHECK(r.scalars == d.data.scalars);
  CHECK(r.response == d.data.response);
  CHECK(r.m == 12);

  Dataset no_scalars = r;
  no_scalars.scalars.resize(5, 0);
  io::write_dataset(no_scalars, s / "c0.csv", s / "u0.csv", s / "y0.csv");
  CHECK(io::read_dataset(s / "c0.csv", s / "u0.csv", s / "y0.csv").q() == 0);
  CHECK(io::read_dataset(s / "c0.csv", "", s / "y0.csv").q() == 0);

  CoefficientSet p = CoefficientSet::zeros(2, 2, 12, 8);
  p.alpha << 0.1, -0.2;
  p.theta(17) = 3.0;
  io::write_coefficients(s / "coef.csv", p);
  const CoefficientSet q = io::read_coefficients(s / "coef.csv", 12, 8);
  CHECK(q.alpha == p.alpha);
  CHECK(q.theta == p.theta);
  CHECK(q.gamma == p.gamma);
}

TEST_CASE("malformed inputs are data errors with locations") {
  Scratch s("bad");
  io::write_text(s / "y.csv", "y\n1.0\nfoo\n");
  try {
    io::read_table(s / "y.csv");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("y.csv:3") != std::string::npos);
  }
  CHECK_THROWS_AS(io::read_table(s / "missing.csv"), DataError);
  io::write_text(s / "c.csv", "sample,predictor,t0,t1\n0,0,1,2\n0,0,1,2\n");
  io::write_text(s / "r.csv", "y\n1\n");
  CHECK_THROWS_AS(io::read_dataset(s / "c.csv", "", s / "r.csv"), DataError);
  CHECK_THROWS_AS(io::require_writable_parent(s / "nope/out.csv"), DataError);
}

TEST_CASE("simulate, fit, evaluate pipeline") {
  Scratch s("pipe");
  simulate(s);
  for (const char* f : {"curves.csv", "scalars.csv", "response.csv", "truth_beta.csv", "truth_coefficients.csv",
                        "simulate.json"}) {
    CHECK(fs::exists(s.dir / f));
  }
  const auto sim_json = read_json(s / "simulate.json");
  CHECK(sim_json.contains("sigma"));
  CHECK(sim_json["config"]["seed"] == 7);
  CHECK(sim_json["true_support"] == nlohmann::json::array({0, 1, 2, 3}));

  const std::string before = slurp(s / "curves.csv");
  fs::create_directories(s.dir / "fit1");
  fs::create_directories(s.dir / "fit2");
  const auto fit_args = cat(cat({"fit"}, data_args(s)), {"--tau", "0.5", "--lambda1", "0.05", "--lambda2", "0.1"});
  const auto f1 = run(cat(fit_args, {"--out-dir", s / "fit1", "--trace", s / "fit1/trace.jsonl"}));
  REQUIRE(f1.code == 0);
  const auto f2 = run(cat(fit_args, {"--out-dir", s / "fit2"}));
  REQUIRE(f2.code == 0);
  CHECK(slurp(s / "fit1/coefficients.csv") == slurp(s / "fit2/coefficients.csv"));
  CHECK(slurp(s / "fit1/beta.csv") == slurp(s / "fit2/beta.csv"));
  CHECK(slurp(s / "curves.csv") == before);
  const auto diag = read_json(s / "fit1/diagnostics.json");
  CHECK(diag["fit"].contains("converged"));
  CHECK(diag["fit"].contains("primal_threshold"));
  CHECK(diag.contains("config"));
  CHECK(slurp(s / "fit1/coefficients.csv").rfind("#", 0) == 0);
  CHECK_FALSE(slurp(s / "fit1/trace.jsonl").empty());

  const auto ev = run({"evaluate", "--coefficients", s / "fit1/coefficients.csv", "--truth-beta", s / "truth_beta.csv",
                       "--truth-coefficients", s / "truth_coefficients.csv", "--out-dir", s / "fit1"});
  REQUIRE(ev.code == 0);
  CHECK(ev.out.find("mise") != std::string::npos);
  const auto metrics = read_json(s / "fit1/metrics.json")["metrics"];
  CHECK(metrics.contains("mise"));
  CHECK(metrics["ise"].size() == 12);
  CHECK(metrics.contains("va"));
  CHECK(metrics["ga"].get<double>() >= 0.0);
}

TEST_CASE("tune and export-socp write their artifacts") {
  Scratch s("tune");
  simulate(s);
  const auto t = run(cat(cat({"tune"}, data_args(s)),
                         {"--tau", "0.5", "--grid-size", "5", "--criterion", "gic", "--out-dir", s.dir.string()}));
  REQUIRE(t.code == 0);
  const auto sel = read_json(s / "selection.json");
  CHECK(sel.contains("lambda1"));
  CHECK(sel["config"]["criterion"] == "gic");
  CHECK(io::read_table(s / "path.csv").rows.size() == 5);

  const auto v = run(cat(cat({"tune"}, data_args(s)), {"--tau", "0.5", "--grid-size", "3", "--criterion", "gs", "--out-dir", s.dir.string()}));
  CHECK(v.code == 1);  // validation needs a tuning set

  // export on a smaller dataset keeps the file small.
  Scratch e("socp");
  simulate(e, "3");
  const auto x = run(cat(cat({"export-socp"}, data_args(e)),
                         {"--tau", "0.5", "--lambda1", "0.5", "--lambda2", "1", "--out-dir", e.dir.string()}));
  REQUIRE(x.code == 0);
  const ConicProblem pr = import_socp(e / "problem.socp");
  CHECK(pr.m == 12);
  CHECK(pr.n == 3);
  CHECK(pr.cones.size() == 12);
  CHECK(fs::exists(e.dir / "problem.socp.json"));
}

TEST_CASE("exit codes and error prefixes") {
  Scratch s("codes");
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"--help"}).code == 0);
  const auto h = run({"fit", "--help"});
  CHECK(h.code == 0);
  CHECK(h.out.find("--lambda1") != std::string::npos);

  const auto missing = run({"fit", "--curves", s / "none.csv", "--response", s / "none.csv", "--lambda1", "1",
                            "--lambda2", "1", "--out-dir", s.dir.string()});
  CHECK(missing.code == 2);
  CHECK(missing.err.rfind("wavecqr: error[data]:", 0) == 0);

  const auto usage = run({"fit", "--lambda1", "1"});
  CHECK(usage.code == 1);
  CHECK(usage.err.find("wavecqr: error[usage]:") != std::string::npos);

  simulate(s);
  const auto capped = cat(cat({"fit"}, data_args(s)),
                          {"--tau", "0.5", "--lambda1", "0.001", "--lambda2", "0.002", "--max-outer", "1", "--out-dir", s.dir.string()});
  const auto warn = run(capped);
  CHECK(warn.code == 0);
  CHECK(warn.err.find("wavecqr: warning[convergence]:") != std::string::npos);
  const auto strict = run(cat(capped, {"--strict"}));
  CHECK(strict.code == 3);

  const auto neg = run(cat(cat({"fit"}, data_args(s)), {"--lambda1", "-1", "--lambda2", "1", "--out-dir", s.dir.string()}));
  CHECK(neg.code == 1);
  const auto bad_out = run(cat(cat({"fit"}, data_args(s)), {"--lambda1", "1", "--lambda2", "1", "--out-dir",
                                                              s / "does/not/exist"}));
  CHECK(bad_out.code != 0);
}

TEST_CASE("config files merge under flags and reject unknown keys") {
  Scratch s("config");
  simulate(s);
  io::write_text(s / "good.json", R"({"tau": [0.5], "lambda1": 0.05, "lambda2": 0.1, "max-outer": 1})");
  const auto from_file = run(cat(cat({"fit"}, data_args(s)), {"--config", s / "good.json", "--out-dir", s.dir.string()}));
  CHECK(from_file.code == 0);
  CHECK(read_json(s / "diagnostics.json")["fit"]["outer_iters"] == 1);
  const auto overridden = run(cat(cat({"fit"}, data_args(s)), {"--config", s / "good.json", "--max-outer", "2",
                                                                 "--out-dir", s.dir.string()}));
  CHECK(overridden.code == 0);
  CHECK(read_json(s / "diagnostics.json")["fit"]["outer_iters"].get<int>() <= 2);

  io::write_text(s / "typo.json", R"({"lamda1": 0.05, "lambda2": 0.1})");
  const auto typo = run(cat(cat({"fit"}, data_args(s)), {"--config", s / "typo.json", "--lambda1", "1", "--out-dir", s.dir.string()}));
  CHECK(typo.code == 1);
  CHECK(typo.err.find("lamda1") != std::string::npos);
}

TEST_CASE("stability-select and reproduce artifacts") {
  Scratch s("stab");
  simulate(s, "40");
  const auto st = run(cat(cat({"stability-select"}, data_args(s)),
                          {"--tau", "0.5", "--bootstraps", "2", "--grid-size", "3", "--threads", "1", "--out-dir",
                           s.dir.string()}));
  REQUIRE(st.code == 0);
  CHECK(io::read_table(s / "boxplot.csv").rows.size() == 12);
  CHECK(io::read_table(s / "norms.csv").rows.size() == 2);
  CHECK(read_json(s / "selection.json").contains("selected"));

  const auto rp = run({"reproduce", "table1-row", "--n", "30", "--reps", "1", "--grid-len", "32", "--grid-size", "3",
                       "--method", "qSGL", "--criterion", "gic", "--threads", "1", "--out-dir", s.dir.string()});
  REQUIRE(rp.code == 0);
  const std::string agg = slurp(s / "aggregate.csv");
  CHECK(agg.find("# ") == 0);
  CHECK(agg.find("\nmethod,criterion,") != std::string::npos);
  CHECK(agg.find("\nqSGL,gic,1,") != std::string::npos);
  CHECK(rp.out.find("qSGL,gic,1,") != std::string::npos);
  CHECK(read_json(s / "reproduce.json")["threads"] == 1);
}
