#include "doctest.h"

#include "cli.hpp"
#include "kmodal/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace kmodal;
namespace fs = std::filesystem;

namespace {

struct Outcome
{
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args)
{
  std::ostringstream out;
  std::ostringstream err;
  int code = cli::run(args, out, err);
  return { code, out.str(), err.str() };
}

fs::path scratch(const std::string& name)
{
  fs::path dir = fs::temp_directory_path() / "kmodal_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path bimodal_file()
{
  fs::path p = scratch("bimodal.txt");
  MixtureSpec m{ MixtureKind::gaussian, { { 0.0, 1.0, 0.5 }, { 6.0, 1.0, 0.5 } } };
  auto s = sample_mixture(m, 400, 17);
  std::ofstream f(p);
  f.precision(17);
  f << "value\n";
  for (double v : s.values())
    f << v << "\n";
  return p;
}

} // namespace

TEST_CASE("fit writes a density that eval reproduces")
{
  auto input = bimodal_file();
  auto fit = run({ "fit", input.string(), "--k", "2", "--multigrid-l", "3" });
  REQUIRE(fit.code == 0);
  json j = json::parse(fit.out);
  CHECK(j["K"] == 2);
  REQUIRE(j["knots"].size() == 1);
  const double knot = j["knots"][0].get<double>();
  CHECK(knot > 0.0);
  CHECK(knot < 6.0);

  fs::path saved = scratch("fit.json");
  std::ofstream(saved) << fit.out;
  KModalDensity f = density_from_json(j);

  // right-continuity at the knot
  std::ostringstream kx;
  kx.precision(17);
  kx << knot;
  auto at = run({ "eval", saved.string(), "--x", kx.str() });
  REQUIRE(at.code == 0);
  std::istringstream lines(at.out);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  CHECK(header == "x,pdf,cdf");
  double x = 0, pdf = 0, cdf = 0;
  char c1 = 0, c2 = 0;
  std::istringstream(row) >> x >> c1 >> pdf >> c2 >> cdf;
  CHECK(pdf == doctest::Approx(f.weights()[1] * f.pieces()[1].pdf(knot)).epsilon(1e-12));
  CHECK(pdf == doctest::Approx(f.pdf(knot)).epsilon(1e-12));
  CHECK(cdf == doctest::Approx(f.cdf(knot)).epsilon(1e-12));

  auto far = run({ "eval", saved.string(), "--x", "-1000" });
  REQUIRE(far.code == 0);
  CHECK(far.out.find("-1000,0,0") != std::string::npos);

  // round trip through JSON within 1e-12 on 1000 probes
  KModalDensity g = density_from_json(json::parse(slurp(saved)));
  const double lo = f.support_lo() - 1.0;
  const double hi = f.support_hi() + 1.0;
  for (int i = 0; i < 1000; ++i) {
    double p = lo + (hi - lo) * i / 999.0;
    CHECK(std::abs(f.pdf(p) - g.pdf(p)) <= 1e-12);
    CHECK(std::abs(f.cdf(p) - g.cdf(p)) <= 1e-12);
  }
}

TEST_CASE("K = 1 fit has no knots")
{
  auto input = bimodal_file();
  auto r = run({ "fit", input.string(), "--k", "1" });
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["knots"].empty());
  CHECK(j["K"] == 1);
}

TEST_CASE("every subcommand is byte-identical on rerun")
{
  auto input = bimodal_file();
  fs::path saved = scratch("rerun_fit.json");
  std::vector<std::vector<std::string>> cmds = {
    { "fit", input.string(), "--k", "2", "--fitter", "grenander_mle" },
    { "select", input.string(), "--k-max", "3" },
    { "select", input.string(), "--k-max", "3", "--method", "cv", "--seed", "4" },
    { "simulate", "--kind", "laplace", "--b", "2", "--n", "300" },
  };
  for (const auto& cmd : cmds) {
    CAPTURE(cmd[0]);
    auto a = run(cmd);
    auto b = run(cmd);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(!a.out.empty());
  }
  std::ofstream(saved) << run(cmds[0]).out;
  auto e1 = run({ "eval", saved.string(), "--x", "1.5", "--x", "3" });
  auto e2 = run({ "eval", saved.string(), "--x", "1.5", "--x", "3" });
  REQUIRE(e1.code == 0);
  CHECK(e1.out == e2.out);
}

TEST_CASE("select output holds both the report and the fit")
{
  auto input = bimodal_file();
  auto r = run({ "select", input.string(), "--k-max", "3", "--tau", "0.05" });
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  REQUIRE(j.contains("selection"));
  REQUIRE(j.contains("fit"));
  CHECK(j["fit"]["K"] == j["selection"]["chosen_K"]);
  CHECK(j["selection"]["method"] == "fit_measure");
}

TEST_CASE("simulate lists every replicate")
{
  auto r = run({ "simulate", "--b", "3", "--n", "300", "--k-max", "3" });
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  REQUIRE(j["per_replicate"].size() == 3);
  std::size_t correct = 0;
  for (const auto& e : j["per_replicate"])
    correct += e["correct"].get<bool>();
  CHECK(j["correct"] == correct);
  CHECK(j["per_replicate"][2]["replicate"] == 2);
}

TEST_CASE("usage and runtime errors")
{
  auto input = bimodal_file();
  CHECK(run({ "select", input.string(), "--method", "bogus" }).code == cli::usage_error);
  CHECK(run({ "simulate", "--b", "0" }).code == cli::usage_error);
  CHECK(run({ "fit" }).code == cli::usage_error);
  CHECK(run({}).code == cli::usage_error);

  auto missing = run({ "fit", scratch("does_not_exist.txt").string() });
  CHECK(missing.code == cli::runtime_error);
  json e = json::parse(missing.err);
  CHECK(e["error"].contains("kind"));
  CHECK(e["error"].contains("message"));

  fs::path bad = scratch("bad.txt");
  std::ofstream(bad) << "1\n2\nnan\n";
  auto nf = run({ "fit", bad.string(), "--k", "1" });
  CHECK(nf.code == cli::runtime_error);
  CHECK(json::parse(nf.err)["error"]["kind"] == "NonFiniteValue");
}

TEST_CASE("--out writes the file and prints a summary")
{
  auto input = bimodal_file();
  fs::path out = scratch("out.json");
  fs::path curve = scratch("curve.csv");
  fs::remove(out);
  auto r = run({ "fit", input.string(), "--k", "2", "--out", out.string(), "--curve",
                 curve.string(), "--curve-points", "64" });
  REQUIRE(r.code == 0);
  CHECK(r.out.find("loglik") != std::string::npos);
  CHECK(fs::exists(out));
  json j = json::parse(slurp(out));
  CHECK(j["curve"].size() == 64);
  std::string csv = slurp(curve);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 65);
}
