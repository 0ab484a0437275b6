// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run everything
//   acceptance 1 4 7      run a subset (criterion 10 always covers what ran)

#include "cli.hpp"
#include "density_checks.hpp"
#include "kmodal/io.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

using namespace kmodal;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome
{
  bool pass = true;
  std::string detail;
};

// criterion 10 bookkeeping
std::size_t densities_checked = 0;
std::vector<std::string> density_failures;

void audit(const KModalDensity& f, const std::string& where)
{
  ++densities_checked;
  std::string p = checks::density_problems(f, 1e-6);
  if (!p.empty() && density_failures.size() < 20)
    density_failures.push_back(where + ": " + p);
}

// criterion 6 bookkeeping
std::size_t multigrid_fits = 0;
std::vector<std::string> multigrid_failures;

FitResult refine_checked(const Sample& s, const FitResult& coarse, const MultiGridConfig& cfg,
                         const FitterSpec& spec, const std::string& where)
{
  FitResult r = multigrid_refine(s, coarse, cfg, spec);
  ++multigrid_fits;
  if (!(r.loglik >= coarse.loglik))
    multigrid_failures.push_back(where);
  audit(coarse.density, where + " coarse");
  audit(r.density, where + " refined");
  return r;
}

FitterSpec grenander()
{
  FitterSpec s;
  s.kind = FitterKind::grenander_mle;
  return s;
}

Sample three_bumps(std::size_t n, std::uint64_t seed)
{
  MixtureSpec m{ MixtureKind::gaussian,
                 { { 0.0, 1.0, 1.0 / 3 }, { 5.0, 1.0, 1.0 / 3 }, { 10.0, 1.0, 1.0 / 3 } } };
  return sample_mixture(m, n, seed);
}

std::string fmt(const char* f, double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1 -------------------------------------------------------------------------

Outcome dp_exactness()
{
  Outcome o;
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<std::size_t> pickM(6, 12);
  std::uniform_int_distribution<std::size_t> pickK(2, 4);
  const FitterSpec spec = grenander();
  double worst = 0.0;
  std::size_t ties = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t M = pickM(rng);
    const std::size_t K = pickK(rng);
    Sample s = Sample::from(oracle::draw_mixture_sample(rng, 200));
    Grid g = build_grid(s, M);
    ScoreMatrix S = build_score_matrix(s, g, spec);
    DPTables t = dp_tables(S, K);
    Backtracked bt = backtrack(t, g, K);
    oracle::BruteForce bf = oracle::enumerate_knots(S, K);

    const double d = t.D(M - 1, K);
    worst = std::max(worst, std::abs(d - bf.best));
    if (!(std::abs(d - bf.best) <= 1e-10)) {
      o.pass = false;
      o.detail = "D mismatch at instance " + std::to_string(rep);
    }
    if (bf.best - bf.runner_up > 1e-10) {
      std::vector<double> expect;
      for (std::size_t p = 1; p < K; ++p)
        expect.push_back(g.points[bf.starts[p] - 1]);
      if (bt.knots.interior != expect) {
        o.pass = false;
        o.detail = "knot mismatch at instance " + std::to_string(rep);
      }
    } else {
      ++ties;
      // tied optimum: the backtracked subset must score the optimum
      double total = 0.0;
      for (std::size_t p = 0; p < K; ++p)
        total += S(bt.starts[p], p + 1 < K ? bt.starts[p + 1] - 1 : M - 1);
      if (!(std::abs(total - bf.best) <= 1e-10)) {
        o.pass = false;
        o.detail = "tied knots off the optimum at instance " + std::to_string(rep);
      }
    }
    audit(assemble_density(s, bt.knots, spec), "c1 #" + std::to_string(rep));
  }
  if (o.pass)
    o.detail = "max |D - brute force| = " + fmt("%.2e", worst) + ", " + std::to_string(ties) +
               " near-tied instances";
  return o;
}

// 2 -------------------------------------------------------------------------

Outcome grenander_vs_lcm()
{
  Outcome o;
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::size_t> size(1, 50);
  double worst_slope = 0.0;
  double worst_mass = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = size(rng);
    std::vector<double> x(n);
    // mix of continuous and rounded values so ties occur
    std::exponential_distribution<double> e(1.0);
    for (auto& v : x) {
      v = e(rng);
      if (rep % 3 == 0)
        v = std::round(v * 4.0) / 4.0 + 0.125;
    }
    std::sort(x.begin(), x.end());
    const double a = 0.0;
    const double b = x.back() + 0.5;
    MonotoneFit fit = grenander_monotone(x, Direction::non_increasing, { a, b });
    oracle::LcmDensity lcm = oracle::lcm_decreasing(x, a);
    for (std::size_t i = 0; i + 1 < lcm.xs.size(); ++i) {
      double mid = 0.5 * (lcm.xs[i] + lcm.xs[i + 1]);
      double diff = std::abs(fit.pdf(mid) - lcm.slopes[i]);
      worst_slope = std::max(worst_slope, diff);
    }
    // beyond the last point the majorant is flat
    worst_slope = std::max(worst_slope, std::abs(fit.pdf(0.5 * (x.back() + b))));
    double mass = 0.0;
    for (std::size_t c = 0; c < fit.heights.size(); ++c)
      mass += fit.heights[c] * (fit.breakpoints[c + 1] - fit.breakpoints[c]);
    worst_mass = std::max(worst_mass, std::abs(mass - 1.0));

    // mirrored direction against the mirrored oracle
    std::vector<double> m(n);
    for (std::size_t i = 0; i < n; ++i)
      m[i] = -x[n - 1 - i];
    MonotoneFit up = grenander_monotone(m, Direction::non_decreasing, { -b, -a });
    for (std::size_t i = 0; i + 1 < lcm.xs.size(); ++i) {
      double mid = -0.5 * (lcm.xs[i] + lcm.xs[i + 1]);
      worst_slope = std::max(worst_slope, std::abs(up.pdf(mid) - lcm.slopes[i]));
    }
    worst_mass = std::max(worst_mass, std::abs(up.mass() - 1.0));
  }
  o.pass = worst_slope <= 1e-10 && worst_mass <= 1e-9;
  o.detail = "max slope error " + fmt("%.2e", worst_slope) + ", max |mass - 1| " +
             fmt("%.2e", worst_mass);
  return o;
}

// 3 -------------------------------------------------------------------------

Outcome pava_vs_exhaustive()
{
  Outcome o;
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> len(1, 8);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> w(0.1, 3.0);
  double worst = 0.0;
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t n = len(rng);
    std::vector<double> y(n);
    std::vector<double> wt(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rep % 4 == 0 ? std::round(z(rng) * 2.0) : z(rng);
      wt[i] = rep % 2 ? w(rng) : 1.0;
    }
    for (bool inc : { true, false }) {
      auto fit = pava(y, wt, inc ? Direction::non_decreasing : Direction::non_increasing);
      auto ref = oracle::isotonic_exhaustive(y, wt, inc);
      for (std::size_t i = 0; i < n; ++i)
        worst = std::max(worst, std::abs(fit[i] - ref[i]));
    }
  }
  o.pass = worst <= 1e-10;
  o.detail = "max deviation " + fmt("%.2e", worst);
  return o;
}

// 4 -------------------------------------------------------------------------

Outcome knot_recovery(const FitterSpec& spec)
{
  Outcome o;
  std::size_t hits = 0;
  std::string knots;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Sample s = three_bumps(10000, seed);
    FitOptions opt;
    opt.K = 3;
    opt.M = 5 * 3 - 1;
    FitResult coarse = fit_kmodal(s, opt, spec);
    FitResult fit = refine_checked(s, coarse, { 5, std::nullopt }, spec,
                                   "c4 seed " + std::to_string(seed));
    const auto& k = fit.knots.interior;
    bool ok = k.size() == 2 && std::abs(k[0] - 2.5) <= 0.75 && std::abs(k[1] - 7.5) <= 0.75;
    hits += ok;
    if (k.size() == 2)
      knots += " (" + fmt("%.2f", k[0]) + "," + fmt("%.2f", k[1]) + ")";
  }
  o.pass = hits >= 9;
  o.detail = std::to_string(hits) + "/10 within 0.75; knots" + knots;
  return o;
}

// 5 -------------------------------------------------------------------------

Outcome monotone_in_k()
{
  Outcome o;
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> pickM(6, 16);
  std::uniform_int_distribution<std::size_t> pickN(60, 400);
  const FitterSpec spec = grenander();
  std::size_t comparisons = 0;
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = pickN(rng);
    const std::size_t M = pickM(rng);
    Sample s = Sample::from(oracle::draw_mixture_sample(rng, n));
    Grid g = build_grid(s, M);
    ScoreMatrix S = build_score_matrix(s, g, spec);
    double prev = -inf;
    for (std::size_t K = 1; K <= M; ++K) {
      double d;
      try {
        d = dp_tables(S, K).D(M - 1, K);
      } catch (const Error&) {
        break;
      }
      if (K > 1) {
        ++comparisons;
        worst = std::min(worst, d - prev);
        if (!(d >= prev - 1e-9)) {
          o.pass = false;
          o.detail = "decrease at instance " + std::to_string(rep) + ", K = " + std::to_string(K);
        }
      }
      prev = d;
    }
  }
  if (o.pass)
    o.detail = std::to_string(comparisons) + " consecutive pairs, min D[K+1]-D[K] = " +
               fmt("%.3g", worst);
  return o;
}

// 6 is collected by refine_checked plus a dedicated sweep --------------------

void multigrid_sweep()
{
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<std::size_t> pickK(2, 4);
  std::uniform_int_distribution<std::size_t> pickL(2, 7);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t K = pickK(rng);
    const std::size_t L = pickL(rng);
    Sample s = Sample::from(oracle::draw_mixture_sample(rng, 500));
    FitterSpec spec = rep % 2 ? grenander() : FitterSpec{};
    FitOptions opt;
    opt.K = K;
    FitResult coarse = fit_kmodal(s, opt, spec);
    refine_checked(s, coarse, { L, std::nullopt }, spec, "c6 sweep #" + std::to_string(rep));
  }
}

// 7 -------------------------------------------------------------------------

Outcome geyser()
{
  Outcome o;
  Sample s = load_sample(read_values(fs::path(KMODAL_DATA_DIR) / "old_faithful_waiting.txt"));
  const FitterSpec spec = grenander();
  FitOptions one;
  one.K = 1;
  FitResult k1 = fit_kmodal(s, one, spec);
  audit(k1.density, "c7 K=1");
  FitOptions opt;
  opt.K = 2;
  opt.M = 10;
  FitResult coarse = fit_kmodal(s, opt, spec);
  FitResult fit = refine_checked(s, coarse, { 15, std::nullopt }, spec, "c7 K=2");
  const double nll2 = -fit.loglik;
  const double nll1 = -k1.loglik;
  o.pass = s.size() == 272 && nll2 <= 1050.0 && nll2 < nll1;
  o.detail = "n = " + std::to_string(s.size()) + ", NLL K=2 " + fmt("%.2f", nll2) + ", K=1 " +
             fmt("%.2f", nll1) + ", knot " + fmt("%.6f", fit.knots.interior.at(0));
  return o;
}

// 8 -------------------------------------------------------------------------

void audit_benchmark(const BenchmarkReport& r, const SelectionConfig& sel, const FitterSpec& spec,
                     const std::string& tag)
{
  // refit the chosen K of every replicate from its derived seeds
  for (const auto& rep : r.per_replicate) {
    if (!rep.error.empty())
      continue;
    MixtureSpec mix = random_mixture(r.kind, derive_seed(rep.seed, 0));
    Sample s = sample_mixture(mix, r.n, derive_seed(rep.seed, 1));
    SelectionConfig cfg = sel;
    cfg.seed = derive_seed(rep.seed, 2);
    const std::string where = tag + " replicate " + std::to_string(rep.index);
    FitResult fit = selection_fit(s, rep.chosen_K, cfg, spec);
    audit(fit.density, where);
    if (rep.chosen_K > 1) {
      FitOptions opt;
      opt.K = rep.chosen_K;
      opt.M = 5 * rep.chosen_K;
      FitResult coarse = fit_kmodal(s, opt, spec);
      ++multigrid_fits;
      if (!(fit.loglik >= coarse.loglik))
        multigrid_failures.push_back(where);
    }
  }
}

Outcome selection_accuracy(const FitterSpec& spec, unsigned threads)
{
  Outcome o;
  const std::size_t B = 20;
  const std::size_t n = 2000;
  std::ostringstream d;

  SelectionConfig fm;
  fm.method = SelectionMethod::fit_measure;
  double acc01 = 0.0;
  double acc05 = 0.0;
  std::size_t first01 = 0;
  for (std::uint64_t master : { 1u, 2u, 3u }) {
    fm.tau = 0.01;
    auto a = run_benchmark(MixtureKind::gaussian, B, n, fm, spec, master, threads);
    fm.tau = 0.05;
    auto b = run_benchmark(MixtureKind::gaussian, B, n, fm, spec, master, threads);
    audit_benchmark(a, fm, spec, "c8 tau=0.01 seed " + std::to_string(master));
    if (master == 1)
      first01 = a.accuracy;
    acc01 += a.accuracy / 3.0;
    acc05 += b.accuracy / 3.0;
    d << "seed " << master << ": tau .01 " << a.accuracy << ", tau .05 " << b.accuracy << "; ";
  }

  SelectionConfig cv;
  cv.method = SelectionMethod::cross_validation;
  cv.improvement = 0.01;
  auto c = run_benchmark(MixtureKind::gaussian, B, n, cv, spec, 1, threads);
  audit_benchmark(c, cv, spec, "c8 cv");
  d << "cv 1% " << c.accuracy << "/20";

  const bool a = first01 >= 10;
  const bool b = c.accuracy >= 8;
  const bool t = acc01 >= acc05;
  o.pass = a && b && t;
  d << " | fit-measure >= 10: " << (a ? "yes" : "no") << ", cv >= 8: " << (b ? "yes" : "no")
    << ", mean tau .01 " << fmt("%.2f", acc01) << " >= tau .05 " << fmt("%.2f", acc05) << ": "
    << (t ? "yes" : "no");
  o.detail = d.str();
  return o;
}

// 9 -------------------------------------------------------------------------

Outcome cli_determinism()
{
  Outcome o;
  fs::path dir = fs::temp_directory_path() / "kmodal_acceptance";
  fs::create_directories(dir);
  const std::string faithful = (fs::path(KMODAL_DATA_DIR) / "old_faithful_waiting.txt").string();
  const std::string saved = (dir / "fit.json").string();

  auto run = [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return std::make_pair(code, out.str());
  };
  {
    auto fit = run({ "fit", faithful, "--k", "2" });
    std::ofstream(saved) << fit.second;
  }
  std::vector<std::vector<std::string>> cmds = {
    { "fit", faithful, "--k", "2", "--fitter", "grenander_mle", "--m", "10", "--multigrid-l", "15" },
    { "fit", faithful, "--k", "3", "--threads", "2" },
    { "select", faithful, "--k-max", "3" },
    { "select", faithful, "--k-max", "3", "--method", "cross_validation", "--seed", "11" },
    { "simulate", "--kind", "gaussian", "--b", "3", "--n", "500", "--seed", "5" },
    { "simulate", "--kind", "laplace", "--b", "3", "--n", "500", "--method", "cv" },
    { "eval", saved, "--x", "55", "--x", "70.5", "--x", "80" },
  };
  std::size_t same = 0;
  for (const auto& cmd : cmds) {
    auto a = run(cmd);
    auto b = run(cmd);
    if (a.first == 0 && a == b && !a.second.empty())
      ++same;
    else
      o.detail += " [" + cmd[0] + " differs or failed]";
  }
  o.pass = same == cmds.size();
  o.detail = std::to_string(same) + "/" + std::to_string(cmds.size()) +
             " invocations byte-identical" + o.detail;
  return o;
}

} // namespace

int main(int argc, char** argv)
{
  std::set<int> only;
  for (int i = 1; i < argc; ++i)
    only.insert(std::atoi(argv[i]));
  auto wanted = [&](int c) { return only.empty() || only.count(c) > 0; };

  const FitterSpec default_spec{};
  const unsigned threads = std::max(1u, std::thread::hardware_concurrency());

  struct Criterion
  {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> body;
  };
  std::vector<Criterion> all = {
    { 1, "DP equals brute-force knot enumeration", 60, dp_exactness },
    { 2, "Grenander equals the LCM oracle", 0, grenander_vs_lcm },
    { 3, "PAVA equals exhaustive block partition", 0, pava_vs_exhaustive },
    { 4, "knot recovery on three Gaussian bumps", 300, [&] { return knot_recovery(default_spec); } },
    { 5, "D[M,K] non-decreasing in K", 0, monotone_in_k },
    { 7, "Old Faithful waiting-time bound", 30, geyser },
    { 8, "Gaussian benchmark selection accuracy", 1200,
      [&] { return selection_accuracy(default_spec, threads); } },
    { 9, "CLI reruns are byte-identical", 0, cli_determinism },
  };

  int failures = 0;
  auto report = [&](int id, const char* name, const Outcome& o, double secs, double budget) {
    bool in_time = budget <= 0 || secs < budget;
    bool pass = o.pass && in_time;
    failures += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << "  [" << id << "] " << name << "  ("
              << fmt("%.1f", secs) << " s" << (budget > 0 ? ", budget " + fmt("%.0f", budget) + " s" : "")
              << (in_time ? "" : ", OVER BUDGET") << ")  " << o.detail << std::endl;
  };

  for (const auto& c : all) {
    if (!wanted(c.id))
      continue;
    auto t0 = Clock::now();
    Outcome o = c.body();
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    report(c.id, c.name, o, secs, c.budget_s);
  }

  if (wanted(6)) {
    auto t0 = Clock::now();
    multigrid_sweep();
    Outcome o;
    o.pass = multigrid_failures.empty();
    o.detail = std::to_string(multigrid_fits) + " refined fits checked";
    if (!o.pass)
      o.detail += ", first failure: " + multigrid_failures.front();
    report(6, "multigrid refinement never lowers the loglik", o,
           std::chrono::duration<double>(Clock::now() - t0).count(), 0);
  }

  {
    Outcome o;
    o.pass = density_failures.empty() && densities_checked > 0;
    o.detail = std::to_string(densities_checked) + " densities checked";
    for (const auto& f : density_failures)
      o.detail += "; " + f;
    report(10, "every produced density is valid", o, 0.0, 0);
  }

  std::cout << (failures ? "ACCEPTANCE FAILED" : "ACCEPTANCE PASSED") << std::endl;
  return failures ? 1 : 0;
}
