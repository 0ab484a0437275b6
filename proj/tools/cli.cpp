#include "cli.hpp"

#include "kmodal/io.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace kmodal::cli {

namespace {

struct RunConfig
{
  std::string input;
  std::string out;
  std::string curve_path;
  std::size_t curve_resolution = 512;

  std::size_t K = 2;
  std::size_t M = 0;
  std::size_t L = 5;
  std::optional<double> r;
  std::string fitter = "histogram_unimodal";
  std::size_t bins = 0;
  std::size_t mode_candidates = 64;
  std::size_t min_points = 2;
  bool snap_knots = false;
  unsigned threads = 1;

  std::string method = "fit_measure";
  double tau = 0.01;
  std::size_t folds = 5;
  double improvement = 0.01;
  std::size_t k_max = 5;
  std::size_t coarse_L = 3;
  std::uint64_t seed = 0;

  std::string kind = "gaussian";
  std::size_t B = 20;
  std::size_t n = 2000;
  std::string csv_path;

  std::vector<double> query;
  std::string query_file;
};

const std::map<std::string, FitterKind> fitter_names{
  { "grenander_mle", FitterKind::grenander_mle },
  { "histogram_unimodal", FitterKind::histogram_unimodal },
};

const std::map<std::string, SelectionMethod> method_names{
  { "fit_measure", SelectionMethod::fit_measure },
  { "cross_validation", SelectionMethod::cross_validation },
  { "cv", SelectionMethod::cross_validation },
};

FitterSpec fitter_spec(const RunConfig& c)
{
  FitterSpec spec;
  spec.kind = fitter_names.at(c.fitter);
  spec.histogram_bins = c.bins;
  spec.mode_candidates_per_interval = c.mode_candidates;
  return spec;
}

FitOptions fit_options(const RunConfig& c, std::size_t K)
{
  FitOptions opt;
  opt.K = K;
  opt.M = c.M;
  opt.min_points = c.min_points;
  opt.snap_knots = c.snap_knots;
  opt.threads = c.threads;
  if (c.L > 1 || c.r)
    opt.multigrid = MultiGridConfig{ std::max<std::size_t>(c.L, 1), c.r };
  return opt;
}

SelectionConfig selection_config(const RunConfig& c)
{
  SelectionConfig s;
  s.method = method_names.at(c.method);
  s.tau = c.tau;
  s.folds = c.folds;
  s.improvement = c.improvement;
  s.k_max = c.k_max;
  s.coarse_L = c.coarse_L;
  s.seed = c.seed;
  s.min_points = c.min_points;
  return s;
}

void write_text(const std::string& path, const std::string& text, std::ostream& fallback)
{
  if (path.empty() || path == "-") {
    fallback << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw Error(ErrorCode::invalid_argument, "cannot write " + path);
  f << text;
}

std::string dump(const json& j)
{
  return j.dump(2) + "\n";
}

Sample read_sample(const std::string& path)
{
  auto raw = read_values(std::filesystem::path(path));
  return Sample::from(raw);
}

std::string format_knots(const KnotVector& k)
{
  std::ostringstream os;
  os << std::setprecision(10) << '[';
  for (std::size_t i = 0; i < k.interior.size(); ++i)
    os << (i ? ", " : "") << k.interior[i];
  os << ']';
  return os.str();
}

int cmd_fit(const RunConfig& c, std::ostream& out)
{
  Sample s = read_sample(c.input);
  FitResult res = fit_kmodal(s, fit_options(c, c.K), fitter_spec(c));
  json j = to_json(res, c.curve_resolution);
  write_text(c.out, dump(j), out);
  if (!c.curve_path.empty())
    write_text(c.curve_path, curve_csv(density_curve(res.density, c.curve_resolution)), out);
  if (!c.out.empty() && c.out != "-") {
    out << std::setprecision(10) << "loglik " << res.loglik << "\n"
        << "negative_loglik " << -res.loglik << "\n"
        << "knots " << format_knots(res.knots) << "\n";
  }
  return ok;
}

int cmd_select(const RunConfig& c, std::ostream& out)
{
  Sample s = read_sample(c.input);
  SelectionConfig sel = selection_config(c);
  FitterSpec spec = fitter_spec(c);
  SelectionReport rep = select_k(s, sel, spec);
  FitResult fit = fit_kmodal(s, fit_options(c, rep.chosen_K), spec);
  json j;
  j["selection"] = to_json(rep);
  j["fit"] = to_json(fit, c.curve_resolution);
  write_text(c.out, dump(j), out);
  if (!c.out.empty() && c.out != "-")
    out << "chosen_K " << rep.chosen_K << " (" << to_string(rep.stopped_reason) << ")\n"
        << std::setprecision(10) << "loglik " << fit.loglik << "\n"
        << "knots " << format_knots(fit.knots) << "\n";
  return ok;
}

int cmd_simulate(const RunConfig& c, std::ostream& out)
{
  BenchmarkReport rep = run_benchmark(parse_mixture_kind(c.kind), c.B, c.n, selection_config(c),
                                      fitter_spec(c), c.seed, c.threads);
  write_text(c.out, dump(to_json(rep)), out);
  if (!c.csv_path.empty())
    write_text(c.csv_path, benchmark_csv(rep), out);
  if (!c.out.empty() && c.out != "-")
    out << to_string(rep.kind) << ' ' << to_string(rep.method) << ' ' << rep.threshold << ": "
        << rep.accuracy << "/" << rep.B << " correct\n";
  return ok;
}

int cmd_eval(const RunConfig& c, std::ostream& out)
{
  std::ifstream f(c.input);
  if (!f)
    throw Error(ErrorCode::parse_error, "cannot open " + c.input);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("malformed density file: ") + e.what());
  }
  // accept both a bare FitResult and the select output
  const json& dj = j.contains("fit") ? j["fit"] : j;
  KModalDensity d = density_from_json(dj);
  std::vector<double> xs = c.query;
  if (!c.query_file.empty()) {
    auto more = read_values(std::filesystem::path(c.query_file));
    xs.insert(xs.end(), more.begin(), more.end());
  }
  std::ostringstream os;
  os << std::setprecision(17) << "x,pdf,cdf\n";
  for (double x : xs)
    os << x << ',' << d.pdf(x) << ',' << d.cdf(x) << '\n';
  write_text(c.out, os.str(), out);
  return ok;
}

void emit_error(std::ostream& err, std::string_view kind, const std::string& message)
{
  json j{ { "error", { { "kind", std::string(kind) }, { "message", message } } } };
  err << j.dump() << "\n";
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  RunConfig c;
  CLI::App app{ "Fit densities with at most K modal intervals", "kmodal" };
  app.require_subcommand(1);

  auto add_fit_flags = [&](CLI::App* sub) {
    sub->add_option("--m", c.M, "Grid size M (0: 5K)");
    sub->add_option("--multigrid-l", c.L, "Multigrid subgrid size L (<= 1 disables)");
    sub->add_option("--multigrid-r", c.r, "Multigrid radius r (default delta*(1/2 - 1/2L))")
      ->check(CLI::NonNegativeNumber);
    sub->add_option("--fitter", c.fitter, "Unimodal fitter")
      ->check(CLI::IsMember({ "grenander_mle", "histogram_unimodal" }));
    sub->add_option("--bins", c.bins, "Histogram bins (0: ceil(sqrt(n)))");
    sub->add_option("--mode-candidates", c.mode_candidates, "Mode candidates per interval")
      ->check(CLI::PositiveNumber);
    sub->add_option("--min-points", c.min_points, "Minimum points per modal interval")
      ->check(CLI::PositiveNumber);
    sub->add_flag("--snap-knots", c.snap_knots, "Move knots to the middle of flat valleys");
    sub->add_option("--threads", c.threads, "Worker threads (0: all cores)");
    sub->add_option("--curve-points", c.curve_resolution, "Points in the exported curve");
    sub->add_option("--curve", c.curve_path, "Write the pdf/cdf curve as CSV");
    sub->add_option("--out", c.out, "Output path (default stdout)");
  };
  auto add_selection_flags = [&](CLI::App* sub) {
    sub->add_option("--method", c.method, "fit_measure or cross_validation")
      ->check(CLI::IsMember({ "fit_measure", "cross_validation", "cv" }));
    sub->add_option("--tau", c.tau, "Fit-measure threshold")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--folds", c.folds, "Cross-validation folds")->check(CLI::Range(2, 1 << 20));
    sub->add_option("--improvement", c.improvement, "Relative CV improvement needed to grow K")
      ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--k-max", c.k_max, "Largest K considered")->check(CLI::PositiveNumber);
    sub->add_option("--coarse-l", c.coarse_L, "Multigrid L while comparing K")
      ->check(CLI::PositiveNumber);
    sub->add_option("--seed", c.seed, "RNG seed");
  };

  auto* fit = app.add_subcommand("fit", "Fit a K-modal density");
  fit->add_option("input,--input", c.input, "Sample file")->required();
  fit->add_option("--k", c.K, "Number of modal intervals")->check(CLI::PositiveNumber);
  add_fit_flags(fit);

  auto* select = app.add_subcommand("select", "Choose K from data, then fit it");
  select->add_option("input,--input", c.input, "Sample file")->required();
  add_fit_flags(select);
  add_selection_flags(select);

  auto* simulate = app.add_subcommand("simulate", "Run the random-mixture benchmark");
  simulate->add_option("--kind", c.kind, "gaussian or laplace")
    ->check(CLI::IsMember({ "gaussian", "laplace" }));
  simulate->add_option("--b", c.B, "Number of replicates")->check(CLI::PositiveNumber);
  simulate->add_option("--n", c.n, "Sample size per replicate")->check(CLI::PositiveNumber);
  simulate->add_option("--csv", c.csv_path, "Per-replicate CSV output");
  add_fit_flags(simulate);
  add_selection_flags(simulate);

  auto* eval = app.add_subcommand("eval", "Evaluate a saved density");
  eval->add_option("input,--input", c.input, "FitResult JSON")->required();
  eval->add_option("--x", c.query, "Query point (repeatable)");
  eval->add_option("--points", c.query_file, "File of query points");
  eval->add_option("--out", c.out, "Output path (default stdout)");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    emit_error(err, "UsageError", e.what());
    return usage_error;
  }

  try {
    if (*fit)
      return cmd_fit(c, out);
    if (*select)
      return cmd_select(c, out);
    if (*simulate)
      return cmd_simulate(c, out);
    return cmd_eval(c, out);
  } catch (const Error& e) {
    emit_error(err, to_string(e.code()), e.what());
    return runtime_error;
  } catch (const std::exception& e) {
    emit_error(err, "RuntimeError", e.what());
    return runtime_error;
  }
}

} // namespace kmodal::cli
