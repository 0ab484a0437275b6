#pragma once

#include "kmodal/core.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace kmodal {

enum class FitterKind
{
  grenander_mle,
  histogram_unimodal
};

enum class Direction
{
  non_decreasing,
  non_increasing
};

struct FitterSpec
{
  FitterKind kind = FitterKind::histogram_unimodal;
  //! Bin count for histogram_unimodal; 0 selects ceil(sqrt(n_interval)).
  std::size_t histogram_bins = 0;
  //! Upper bound on mode locations tried by grenander_mle.
  std::size_t mode_candidates_per_interval = 64;

  void validate() const;
};

struct MonotoneFit
{
  std::vector<double> breakpoints;
  std::vector<double> heights;
  Direction direction = Direction::non_increasing;

  double pdf(double x) const;
  double mass() const;
};

//! Weighted least-squares projection onto monotone sequences.
std::vector<double> pava(std::span<const double> values,
                         std::span<const double> weights, Direction dir);

//! Grenander MLE of a monotone density on `support` from the sorted
//! `points`, all of which must lie strictly inside it.
MonotoneFit grenander_monotone(std::span<const double> points, Direction dir,
                               Interval support);

//! Grenander up to `mu`, Grenander down after it, halves weighted by the
//! fraction of points on each side.
UnimodalPiece fit_unimodal_known_mode(std::span<const double> points,
                                      Interval support, double mu);

//! Midpoints between consecutive distinct points. Above `cap`, only gaps
//! whose index (counted from `rank_offset`, the distinct rank of points[0]
//! in the full sample) is a multiple of the smallest power of two that
//! brings the count under `cap` are kept, so subintervals of one sample
//! thin onto nested lattices. Falls back to the interval midpoint when fewer
//! than two distinct points are present. Never returns a data value.
std::vector<double> mode_candidates(std::span<const double> points,
                                    Interval support, std::size_t cap,
                                    std::size_t rank_offset = 0);

//! Best unimodal least-squares fit (up then down) of equally weighted values.
std::vector<double> unimodal_regression(std::span<const double> values);

UnimodalPiece fit_histogram_unimodal(std::span<const double> points,
                                     Interval support, std::size_t bins);

//! Dispatches on `spec.kind`. `support` must be finite and `points` sorted,
//! all inside it. grenander_mle also tries the two monotone fits (mode at
//! either end). `rank_offset` as in mode_candidates.
UnimodalPiece fit_unimodal(std::span<const double> points, Interval support,
                           const FitterSpec& spec, std::size_t rank_offset = 0);

} // namespace kmodal
