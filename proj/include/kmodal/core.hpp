#pragma once

#include "kmodal/error.hpp"

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace kmodal {

inline constexpr double inf = std::numeric_limits<double>::infinity();

//! Sorted, finite, univariate observations.
class Sample
{
public:
  //! Sorts a copy of `raw`; throws on empty input or any NaN/inf entry.
  static Sample from(std::span<const double> raw);

  //! Wraps values already known to be sorted and finite (no validation
  //! beyond a debug sort check).
  static Sample from_sorted(std::vector<double> sorted);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double min() const { return values_.front(); }
  double max() const { return values_.back(); }

  //! Number of distinct values.
  std::size_t distinct() const { return distinct_; }
  //! Number of observations that repeat an earlier one (n - distinct).
  std::size_t ties() const { return values_.size() - distinct_; }
  //! Number of distinct values strictly below observation i.
  std::size_t distinct_rank(std::size_t i) const { return rank_[i]; }

  //! Count of observations in [lo, hi).
  std::size_t count_in(double lo, double hi) const;
  //! Index range [first, last) of observations in [lo, hi).
  std::pair<std::size_t, std::size_t> range_in(double lo, double hi) const;
  std::span<const double> slice(double lo, double hi) const;

  bool contains(double x) const;

  //! Mean spacing between consecutive order statistics.
  double mean_gap() const;

private:
  explicit Sample(std::vector<double> v);

  std::vector<double> values_;
  std::vector<std::size_t> rank_;
  std::size_t distinct_ = 0;
};

//! Half-open [lo, hi). Either end may be infinite.
struct Interval
{
  double lo = -inf;
  double hi = inf;

  bool finite() const;
  double width() const { return hi - lo; }
};

//! Step density on [lo, hi] that rises to `mode` and falls after it.
//!
//! `breakpoints` has one more entry than `heights`; cell c spans
//! [breakpoints[c], breakpoints[c+1]]. At an interior breakpoint the density
//! takes the larger of the two adjacent heights (upper semicontinuous), which
//! is the convention under which monotone MLE fits attain their likelihood.
struct UnimodalPiece
{
  std::vector<double> breakpoints;
  std::vector<double> heights;
  double mode = 0.0;
  double loglik = 0.0;

  double lo() const { return breakpoints.front(); }
  double hi() const { return breakpoints.back(); }
  std::size_t cells() const { return heights.size(); }

  double pdf(double x) const;
  //! Integral of the piece density over [lo, x].
  double cdf(double x) const;
  double mass() const;
  //! Sum of log pdf over `points`; -inf if any point has zero density.
  double loglik_of(std::span<const double> points) const;
};

//! Interior knots lambda_2 < ... < lambda_K; the sentinels are implied.
struct KnotVector
{
  std::vector<double> interior;

  std::size_t modal_intervals() const { return interior.size() + 1; }
  //! Interval k (0-based) of the partition of the real line.
  Interval interval(std::size_t k) const;
};

//! Weighted union of unimodal pieces on consecutive modal intervals.
//!
//! Piece k is supported on [lo_k, hi_k) and the last piece on [lo, hi]; a
//! point sitting exactly on a knot belongs to the piece on its right.
class KModalDensity
{
public:
  KModalDensity() = default;
  KModalDensity(KnotVector knots, std::vector<double> weights,
                std::vector<UnimodalPiece> pieces);

  const KnotVector& knots() const { return knots_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const UnimodalPiece> pieces() const { return pieces_; }
  std::size_t K() const { return pieces_.size(); }

  double support_lo() const { return pieces_.front().lo(); }
  double support_hi() const { return pieces_.back().hi(); }

  double pdf(double x) const;
  double cdf(double x) const;

private:
  // index of the piece covering x, or npos
  std::size_t locate(double x) const;

  KnotVector knots_;
  std::vector<double> weights_;
  std::vector<UnimodalPiece> pieces_;
  std::vector<double> cum_weights_;
};

Sample load_sample(std::span<const double> raw);

double pdf_eval(const KModalDensity& f, double x);
double cdf_eval(const KModalDensity& f, double x);
double log_likelihood(const KModalDensity& f, const Sample& s);
double log_likelihood(const KModalDensity& f, std::span<const double> points);

// Structural checks shared by the test suites and the CLI.

//! Heights never decrease before the cell holding the mode and never
//! increase after it.
bool is_unimodal(const UnimodalPiece& p, double tol = 0.0);
//! |integral - 1| <= tol for every piece and for the weighted sum.
bool is_normalized(const KModalDensity& f, double tol);
//! Midpoint-rule integral of the pdf over `cells` uniform cells spanning the
//! support; independent of the closed-form cdf.
double numeric_integral(const KModalDensity& f, std::size_t cells);

} // namespace kmodal
