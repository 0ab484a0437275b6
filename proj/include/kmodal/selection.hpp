#pragma once

#include "kmodal/dpsearch.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kmodal {

enum class SelectionMethod
{
  fit_measure,
  cross_validation
};

enum class StopReason
{
  threshold_met,
  k_max_reached,
  infeasible
};

std::string_view to_string(SelectionMethod m);
std::string_view to_string(StopReason r);

struct SelectionConfig
{
  SelectionMethod method = SelectionMethod::fit_measure;
  double tau = 0.01;
  std::size_t folds = 5;
  double improvement = 0.01;
  std::size_t k_max = 5;
  //! Multigrid subgrid size used while comparing candidate K.
  std::size_t coarse_L = 3;
  std::uint64_t seed = 0;
  std::size_t min_points = 2;

  void validate() const;
};

struct KRecord
{
  std::size_t K = 0;
  bool feasible = false;
  double loglik = -inf;
  //! Sup-norm distance for fit_measure, mean held-out log-likelihood for CV.
  double score = 0.0;
  std::string error;
};

struct SelectionReport
{
  SelectionMethod method = SelectionMethod::fit_measure;
  std::size_t chosen_K = 1;
  std::vector<KRecord> per_K;
  StopReason stopped_reason = StopReason::k_max_reached;
};

//! Kolmogorov-Smirnov distance between the fitted cdf and the ECDF of `s`.
double supnorm_fit(const KModalDensity& f, const Sample& s);

//! The fit used while scoring a candidate K: M = 5K, multigrid L = coarse_L.
FitResult selection_fit(const Sample& s, std::size_t K, const SelectionConfig& cfg,
                        const FitterSpec& spec);

SelectionReport select_k_fit_measure(const Sample& s, const SelectionConfig& cfg,
                                     const FitterSpec& spec);

//! Fold label in [0, R) for each of n points; depends only on (n, R, seed).
std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t R, std::uint64_t seed);

//! Held-out log-likelihood of each round for explicit fold labels.
std::vector<double> cv_round_scores(const Sample& s, std::size_t K, const SelectionConfig& cfg,
                                    const FitterSpec& spec, std::span<const std::size_t> labels);

//! Mean held-out log-likelihood over cfg.folds seeded random folds.
double cv_score(const Sample& s, std::size_t K, const SelectionConfig& cfg,
                const FitterSpec& spec);

//! Greedy forward stop rule over scores for K = 1, 2, ...: the first K whose
//! successor improves by at most `improvement` relative to |score(K)|.
std::size_t greedy_stop(std::span<const double> scores, double improvement);

SelectionReport select_k_cv(const Sample& s, const SelectionConfig& cfg,
                            const FitterSpec& spec);

SelectionReport select_k(const Sample& s, const SelectionConfig& cfg,
                         const FitterSpec& spec);

} // namespace kmodal
