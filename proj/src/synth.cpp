#include "kmodal/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

namespace kmodal {

std::string_view to_string(MixtureKind k)
{
  return k == MixtureKind::gaussian ? "gaussian" : "laplace";
}

MixtureKind parse_mixture_kind(std::string_view s)
{
  if (s == "gaussian")
    return MixtureKind::gaussian;
  if (s == "laplace")
    return MixtureKind::laplace;
  throw Error(ErrorCode::invalid_argument, "unknown mixture kind: " + std::string(s));
}

double MixtureSpec::pdf(double x) const
{
  double acc = 0.0;
  for (const auto& c : components) {
    if (kind == MixtureKind::gaussian) {
      double z = (x - c.center) / c.sd;
      acc += c.weight * std::exp(-0.5 * z * z) / (c.sd * std::sqrt(2.0 * std::numbers::pi));
    } else {
      double b = c.sd / std::numbers::sqrt2;
      acc += c.weight * std::exp(-std::abs(x - c.center) / b) / (2.0 * b);
    }
  }
  return acc;
}

double MixtureSpec::cdf(double x) const
{
  double acc = 0.0;
  for (const auto& c : components) {
    if (kind == MixtureKind::gaussian) {
      acc += c.weight * 0.5 * std::erfc(-(x - c.center) / (c.sd * std::numbers::sqrt2));
    } else {
      double b = c.sd / std::numbers::sqrt2;
      double u = (x - c.center) / b;
      acc += c.weight * (u < 0.0 ? 0.5 * std::exp(u) : 1.0 - 0.5 * std::exp(-u));
    }
  }
  return acc;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t i)
{
  // splitmix64 finalizer over (master, counter)
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (i + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

MixtureSpec random_mixture(MixtureKind kind, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> count(1, 5);
  std::uniform_real_distribution<double> center(0.0, 10.0);
  std::exponential_distribution<double> sd(1.0);

  MixtureSpec m;
  m.kind = kind;
  int c = count(rng);
  for (int i = 0; i < c; ++i) {
    Component comp;
    comp.center = center(rng);
    comp.sd = sd(rng);
    comp.weight = 1.0 / c;
    m.components.push_back(comp);
  }
  return m;
}

std::size_t true_mode_count(const MixtureSpec& m, std::size_t grid_points)
{
  if (grid_points < 2)
    throw Error(ErrorCode::invalid_argument, "grid_points must be >= 2");
  double lo = inf, hi = -inf, max_sd = 0.0;
  for (const auto& c : m.components) {
    lo = std::min(lo, c.center);
    hi = std::max(hi, c.center);
    max_sd = std::max(max_sd, c.sd);
  }
  lo -= 5.0 * max_sd;
  hi += 5.0 * max_sd;

  const double step = (hi - lo) / static_cast<double>(grid_points - 1);
  std::size_t modes = 0;
  int last_sign = 0; // sign of the last non-zero difference
  double prev = m.pdf(lo);
  for (std::size_t i = 1; i < grid_points; ++i) {
    double cur = m.pdf(lo + step * static_cast<double>(i));
    double d = cur - prev;
    prev = cur;
    if (d == 0.0)
      continue; // plateaus are skipped
    int sign = d > 0.0 ? 1 : -1;
    if (last_sign == 1 && sign == -1)
      ++modes;
    last_sign = sign;
  }
  return modes;
}

Sample sample_mixture(const MixtureSpec& m, std::size_t n, std::uint64_t seed)
{
  if (n < 1)
    throw Error(ErrorCode::invalid_argument, "n must be >= 1");
  if (m.components.empty())
    throw Error(ErrorCode::invalid_argument, "mixture has no components");
  std::mt19937_64 rng(seed);
  std::vector<double> w;
  for (const auto& c : m.components)
    w.push_back(c.weight);
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  std::normal_distribution<double> normal(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  std::bernoulli_distribution coin(0.5);

  std::vector<double> x(n);
  for (auto& v : x) {
    const auto& c = m.components[pick(rng)];
    if (m.kind == MixtureKind::gaussian) {
      v = c.center + c.sd * normal(rng);
    } else {
      double b = c.sd / std::numbers::sqrt2;
      double e = b * expo(rng);
      v = c.center + (coin(rng) ? e : -e);
    }
  }
  return Sample::from(x);
}

BenchmarkReport run_benchmark(MixtureKind kind, std::size_t B, std::size_t n,
                              const SelectionConfig& sel, const FitterSpec& spec,
                              std::uint64_t seed, unsigned threads)
{
  if (B < 1)
    throw Error(ErrorCode::invalid_argument, "B must be >= 1");
  sel.validate();
  spec.validate();

  BenchmarkReport rep;
  rep.kind = kind;
  rep.method = sel.method;
  rep.B = B;
  rep.n = n;
  rep.seed = seed;
  rep.threshold = sel.method == SelectionMethod::fit_measure ? sel.tau : sel.improvement;
  rep.per_replicate.resize(B);

  auto run_one = [&](std::size_t i) {
    Replicate& r = rep.per_replicate[i];
    r.index = i;
    r.seed = derive_seed(seed, i);
    MixtureSpec mix = random_mixture(kind, derive_seed(r.seed, 0));
    r.components = mix.components.size();
    r.true_modes = true_mode_count(mix);
    Sample s = sample_mixture(mix, n, derive_seed(r.seed, 1));
    SelectionConfig cfg = sel;
    cfg.seed = derive_seed(r.seed, 2);
    try {
      r.chosen_K = select_k(s, cfg, spec).chosen_K;
      r.correct = r.chosen_K == r.true_modes;
    } catch (const Error& e) {
      r.error = e.what();
    }
  };

  if (threads == 0)
    threads = std::max(1u, std::thread::hardware_concurrency());
  if (threads <= 1) {
    for (std::size_t i = 0; i < B; ++i)
      run_one(i);
  } else {
    std::atomic<std::size_t> next{ 0 };
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < std::min<std::size_t>(threads, B); ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < B; i = next++)
          run_one(i);
      });
  }
  for (const auto& r : rep.per_replicate)
    rep.accuracy += r.correct ? 1 : 0;
  return rep;
}

} // namespace kmodal
