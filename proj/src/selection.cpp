#include "kmodal/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace kmodal {

std::string_view to_string(SelectionMethod m)
{
  return m == SelectionMethod::fit_measure ? "fit_measure" : "cross_validation";
}

std::string_view to_string(StopReason r)
{
  switch (r) {
    case StopReason::threshold_met: return "threshold_met";
    case StopReason::k_max_reached: return "k_max_reached";
    case StopReason::infeasible: return "infeasible";
  }
  return "unknown";
}

void SelectionConfig::validate() const
{
  if (method == SelectionMethod::fit_measure && !(tau >= 0.0 && tau <= 1.0))
    throw Error(ErrorCode::invalid_argument, "tau must lie in [0, 1]");
  if (method == SelectionMethod::cross_validation) {
    if (folds < 2)
      throw Error(ErrorCode::invalid_argument, "need at least 2 folds");
    if (!(improvement > 0.0 && improvement < 1.0))
      throw Error(ErrorCode::invalid_argument, "improvement must lie in (0, 1)");
  }
  if (k_max < 1)
    throw Error(ErrorCode::invalid_argument, "k_max must be >= 1");
  if (coarse_L < 1)
    throw Error(ErrorCode::invalid_argument, "coarse_L must be >= 1");
}

double supnorm_fit(const KModalDensity& f, const Sample& s)
{
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double F = f.cdf(s[i]);
    d = std::max(d, std::abs(F - static_cast<double>(i + 1) / n));
    d = std::max(d, std::abs(F - static_cast<double>(i) / n));
  }
  return d;
}

FitResult selection_fit(const Sample& s, std::size_t K, const SelectionConfig& cfg,
                        const FitterSpec& spec)
{
  FitOptions opt;
  opt.K = K;
  opt.M = 5 * K;
  opt.min_points = cfg.min_points;
  if (cfg.coarse_L > 1)
    opt.multigrid = MultiGridConfig{ cfg.coarse_L, std::nullopt };
  return fit_kmodal(s, opt, spec);
}

SelectionReport select_k_fit_measure(const Sample& s, const SelectionConfig& cfg,
                                     const FitterSpec& spec)
{
  cfg.validate();
  SelectionReport rep;
  rep.method = SelectionMethod::fit_measure;
  for (std::size_t K = 1; K <= cfg.k_max; ++K) {
    KRecord rec;
    rec.K = K;
    try {
      FitResult fit = selection_fit(s, K, cfg, spec);
      rec.feasible = true;
      rec.loglik = fit.loglik;
      rec.score = supnorm_fit(fit.density, s);
    } catch (const Error& e) {
      rec.error = e.what();
    }
    rep.per_K.push_back(rec);
    if (rec.feasible && rec.score <= cfg.tau) {
      rep.chosen_K = K;
      rep.stopped_reason = StopReason::threshold_met;
      return rep;
    }
  }

  const auto& last = rep.per_K.back();
  if (last.feasible) {
    rep.chosen_K = last.K;
    rep.stopped_reason = StopReason::k_max_reached;
    return rep;
  }
  // k_max itself infeasible: best-fitting feasible candidate
  auto best = rep.per_K.end();
  for (auto it = rep.per_K.begin(); it != rep.per_K.end(); ++it)
    if (it->feasible && (best == rep.per_K.end() || it->score < best->score))
      best = it;
  if (best == rep.per_K.end())
    throw Error(ErrorCode::infeasible_k, "no candidate K could be fitted");
  rep.chosen_K = best->K;
  rep.stopped_reason = StopReason::infeasible;
  return rep;
}

std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t R, std::uint64_t seed)
{
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{ 0 });
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::size_t> label(n);
  for (std::size_t i = 0; i < n; ++i)
    label[perm[i]] = i % R;
  return label;
}

std::vector<double> cv_round_scores(const Sample& s, std::size_t K, const SelectionConfig& cfg,
                                    const FitterSpec& spec, std::span<const std::size_t> labels)
{
  const std::size_t n = s.size();
  const std::size_t R = cfg.folds;
  if (R < 2 || R > n)
    throw Error(ErrorCode::too_few_points_for_folds,
                "cannot split " + std::to_string(n) + " points into " + std::to_string(R) + " folds");
  if (labels.size() != n)
    throw Error(ErrorCode::length_mismatch, "one fold label per point is required");
  const double range = s.max() - s.min();
  if (!(range > 0.0))
    throw Error(ErrorCode::degenerate_sample, "all sample values are equal");
  // zero-density held-out points score log(1 / (n * range))
  const double log_floor = -std::log(static_cast<double>(n) * range);

  std::vector<double> rounds;
  std::vector<double> train;
  std::vector<double> test;
  for (std::size_t r = 0; r < R; ++r) {
    train.clear();
    test.clear();
    for (std::size_t i = 0; i < n; ++i)
      (labels[i] == r ? test : train).push_back(s[i]);
    if (train.empty() || test.empty())
      throw Error(ErrorCode::too_few_points_for_folds, "empty fold");
    Sample tr = Sample::from_sorted(train);
    FitResult fit = selection_fit(tr, K, cfg, spec);
    double ll = 0.0;
    for (double x : test) {
      double p = fit.density.pdf(x);
      ll += p > 0.0 ? std::log(p) : log_floor;
    }
    rounds.push_back(ll);
  }
  return rounds;
}

double cv_score(const Sample& s, std::size_t K, const SelectionConfig& cfg,
                const FitterSpec& spec)
{
  if (cfg.folds < 2 || cfg.folds > s.size())
    throw Error(ErrorCode::too_few_points_for_folds,
                "cannot split " + std::to_string(s.size()) + " points into " +
                  std::to_string(cfg.folds) + " folds");
  auto labels = fold_assignment(s.size(), cfg.folds, cfg.seed);
  auto rounds = cv_round_scores(s, K, cfg, spec, labels);
  return std::accumulate(rounds.begin(), rounds.end(), 0.0) / static_cast<double>(rounds.size());
}

std::size_t greedy_stop(std::span<const double> scores, double improvement)
{
  for (std::size_t i = 0; i + 1 < scores.size(); ++i) {
    double gain = (scores[i + 1] - scores[i]) / std::abs(scores[i]);
    if (!(gain > improvement))
      return i + 1;
  }
  return scores.size();
}

SelectionReport select_k_cv(const Sample& s, const SelectionConfig& cfg,
                            const FitterSpec& spec)
{
  cfg.validate();
  SelectionReport rep;
  rep.method = SelectionMethod::cross_validation;
  std::vector<double> scores;
  for (std::size_t K = 1; K <= cfg.k_max; ++K) {
    KRecord rec;
    rec.K = K;
    try {
      rec.score = cv_score(s, K, cfg, spec);
      rec.feasible = true;
      rec.loglik = rec.score;
    } catch (const Error& e) {
      if (K == 1)
        throw;
      rec.error = e.what();
    }
    rep.per_K.push_back(rec);
    if (!rec.feasible) {
      rep.chosen_K = K - 1;
      rep.stopped_reason = StopReason::infeasible;
      return rep;
    }
    scores.push_back(rec.score);
    if (scores.size() >= 2 && greedy_stop(scores, cfg.improvement) < scores.size()) {
      rep.chosen_K = K - 1;
      rep.stopped_reason = StopReason::threshold_met;
      return rep;
    }
  }
  rep.chosen_K = cfg.k_max;
  rep.stopped_reason = StopReason::k_max_reached;
  return rep;
}

SelectionReport select_k(const Sample& s, const SelectionConfig& cfg,
                         const FitterSpec& spec)
{
  return cfg.method == SelectionMethod::fit_measure ? select_k_fit_measure(s, cfg, spec)
                                                    : select_k_cv(s, cfg, spec);
}

} // namespace kmodal
