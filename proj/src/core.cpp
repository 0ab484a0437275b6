#include "kmodal/core.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <string>

namespace kmodal {

std::string_view to_string(ErrorCode code)
{
  switch (code) {
    case ErrorCode::empty_input: return "EmptyInput";
    case ErrorCode::non_finite_value: return "NonFiniteValue";
    case ErrorCode::length_mismatch: return "LengthMismatch";
    case ErrorCode::no_interior_points: return "NoInteriorPoints";
    case ErrorCode::too_few_points: return "TooFewPoints";
    case ErrorCode::degenerate_sample: return "DegenerateSample";
    case ErrorCode::infeasible_k: return "InfeasibleK";
    case ErrorCode::empty_modal_interval: return "EmptyModalInterval";
    case ErrorCode::overlap_violation: return "OverlapViolation";
    case ErrorCode::too_few_points_for_folds: return "TooFewPointsForFolds";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::parse_error: return "ParseError";
  }
  return "Unknown";
}

// ---------------------------------------------------------------- Sample

Sample::Sample(std::vector<double> v)
  : values_(std::move(v))
{
  rank_.resize(values_.size());
  distinct_ = values_.empty() ? 0 : 1;
  for (std::size_t i = 1; i < values_.size(); ++i) {
    if (values_[i] != values_[i - 1])
      ++distinct_;
    rank_[i] = distinct_ - 1;
  }
}

Sample Sample::from(std::span<const double> raw)
{
  if (raw.empty())
    throw Error(ErrorCode::empty_input, "sample is empty");
  for (std::size_t i = 0; i < raw.size(); ++i)
    if (!std::isfinite(raw[i]))
      throw Error(ErrorCode::non_finite_value,
                  "non-finite value at index " + std::to_string(i));
  std::vector<double> v(raw.begin(), raw.end());
  std::sort(v.begin(), v.end());
  return Sample(std::move(v));
}

Sample Sample::from_sorted(std::vector<double> sorted)
{
  if (sorted.empty())
    throw Error(ErrorCode::empty_input, "sample is empty");
  assert(std::is_sorted(sorted.begin(), sorted.end()));
  return Sample(std::move(sorted));
}

std::pair<std::size_t, std::size_t> Sample::range_in(double lo, double hi) const
{
  auto first = std::lower_bound(values_.begin(), values_.end(), lo);
  auto last = std::lower_bound(first, values_.end(), hi);
  return { static_cast<std::size_t>(first - values_.begin()),
           static_cast<std::size_t>(last - values_.begin()) };
}

std::size_t Sample::count_in(double lo, double hi) const
{
  auto [a, b] = range_in(lo, hi);
  return b - a;
}

std::span<const double> Sample::slice(double lo, double hi) const
{
  auto [a, b] = range_in(lo, hi);
  return std::span<const double>(values_).subspan(a, b - a);
}

bool Sample::contains(double x) const
{
  return std::binary_search(values_.begin(), values_.end(), x);
}

double Sample::mean_gap() const
{
  if (values_.size() < 2)
    return 0.0;
  return (max() - min()) / static_cast<double>(values_.size() - 1);
}

bool Interval::finite() const
{
  return std::isfinite(lo) && std::isfinite(hi);
}

// ---------------------------------------------------------- UnimodalPiece

double UnimodalPiece::pdf(double x) const
{
  if (heights.empty() || x < lo() || x > hi())
    return 0.0;
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
  auto c = static_cast<std::size_t>(it - breakpoints.begin());
  if (c == 0)
    return heights.front();
  if (c > heights.size())
    return heights.back();
  double h = heights[c - 1];
  // on an interior breakpoint: the larger neighbour
  if (x == breakpoints[c - 1] && c >= 2)
    h = std::max(h, heights[c - 2]);
  return h;
}

double UnimodalPiece::cdf(double x) const
{
  if (heights.empty() || x <= lo())
    return 0.0;
  double acc = 0.0;
  for (std::size_t c = 0; c < heights.size(); ++c) {
    double a = breakpoints[c];
    double b = breakpoints[c + 1];
    if (x >= b) {
      acc += heights[c] * (b - a);
    } else {
      acc += heights[c] * (x - a);
      break;
    }
  }
  return acc;
}

double UnimodalPiece::mass() const
{
  double acc = 0.0;
  for (std::size_t c = 0; c < heights.size(); ++c)
    acc += heights[c] * (breakpoints[c + 1] - breakpoints[c]);
  return acc;
}

double UnimodalPiece::loglik_of(std::span<const double> points) const
{
  double acc = 0.0;
  for (double x : points) {
    double h = pdf(x);
    if (!(h > 0.0))
      return -inf;
    acc += std::log(h);
  }
  return acc;
}

// ------------------------------------------------------------ KnotVector

Interval KnotVector::interval(std::size_t k) const
{
  Interval iv;
  iv.lo = k == 0 ? -inf : interior[k - 1];
  iv.hi = k == interior.size() ? inf : interior[k];
  return iv;
}

// --------------------------------------------------------- KModalDensity

KModalDensity::KModalDensity(KnotVector knots, std::vector<double> weights,
                             std::vector<UnimodalPiece> pieces)
  : knots_(std::move(knots))
  , weights_(std::move(weights))
  , pieces_(std::move(pieces))
{
  if (pieces_.empty() || weights_.size() != pieces_.size() ||
      knots_.interior.size() + 1 != pieces_.size())
    throw Error(ErrorCode::invalid_argument,
                "density needs K pieces, K weights and K-1 knots");
  for (std::size_t k = 1; k < pieces_.size(); ++k)
    if (pieces_[k].lo() < pieces_[k - 1].hi())
      throw Error(ErrorCode::invalid_argument, "pieces overlap");
  cum_weights_.resize(weights_.size() + 1, 0.0);
  std::partial_sum(weights_.begin(), weights_.end(), cum_weights_.begin() + 1);
}

std::size_t KModalDensity::locate(double x) const
{
  constexpr auto npos = static_cast<std::size_t>(-1);
  if (x < support_lo() || x > support_hi())
    return npos;
  // first piece whose hi exceeds x; the last piece is closed on the right
  auto it = std::upper_bound(
    pieces_.begin(), pieces_.end(), x,
    [](double v, const UnimodalPiece& p) { return v < p.hi(); });
  std::size_t k = it == pieces_.end() ? pieces_.size() - 1
                                      : static_cast<std::size_t>(it - pieces_.begin());
  if (x < pieces_[k].lo())
    return npos;
  return k;
}

double KModalDensity::pdf(double x) const
{
  std::size_t k = locate(x);
  if (k == static_cast<std::size_t>(-1))
    return 0.0;
  const auto& p = pieces_[k];
  // right-continuity at a knot: skip the breakpoint max-rule at lo
  if (x == p.lo())
    return weights_[k] * p.heights.front();
  return weights_[k] * p.pdf(x);
}

double KModalDensity::cdf(double x) const
{
  if (x < support_lo())
    return 0.0;
  if (x >= support_hi())
    return 1.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    const auto& p = pieces_[k];
    if (x >= p.hi()) {
      acc += weights_[k] * p.mass();
    } else {
      if (x > p.lo())
        acc += weights_[k] * p.cdf(x);
      break;
    }
  }
  return std::clamp(acc, 0.0, 1.0);
}

// ------------------------------------------------------------ free functions

Sample load_sample(std::span<const double> raw)
{
  return Sample::from(raw);
}

double pdf_eval(const KModalDensity& f, double x)
{
  return f.pdf(x);
}

double cdf_eval(const KModalDensity& f, double x)
{
  return f.cdf(x);
}

double log_likelihood(const KModalDensity& f, std::span<const double> points)
{
  double acc = 0.0;
  for (double x : points) {
    double h = f.pdf(x);
    if (!(h > 0.0))
      return -inf;
    acc += std::log(h);
  }
  return acc;
}

double log_likelihood(const KModalDensity& f, const Sample& s)
{
  return log_likelihood(f, s.values());
}

bool is_unimodal(const UnimodalPiece& p, double tol)
{
  if (p.heights.empty() || p.mode < p.lo() || p.mode > p.hi())
    return false;
  // cell holding the mode
  std::size_t m = 0;
  while (m + 1 < p.cells() && p.breakpoints[m + 1] <= p.mode)
    ++m;
  // a mode sitting on a breakpoint may belong to either neighbour
  if (m > 0 && p.breakpoints[m] == p.mode && p.heights[m - 1] > p.heights[m])
    --m;
  for (std::size_t c = 1; c <= m; ++c)
    if (p.heights[c] + tol < p.heights[c - 1])
      return false;
  for (std::size_t c = m + 1; c < p.cells(); ++c)
    if (p.heights[c] > p.heights[c - 1] + tol)
      return false;
  return true;
}

bool is_normalized(const KModalDensity& f, double tol)
{
  double total = 0.0;
  double wsum = 0.0;
  for (std::size_t k = 0; k < f.K(); ++k) {
    double w = f.weights()[k];
    if (w < 0.0)
      return false;
    const auto& p = f.pieces()[k];
    for (double h : p.heights)
      if (h < 0.0)
        return false;
    if (w > 0.0 && std::abs(p.mass() - 1.0) > tol)
      return false;
    total += w * p.mass();
    wsum += w;
  }
  return std::abs(total - 1.0) <= tol && std::abs(wsum - 1.0) <= tol;
}

double numeric_integral(const KModalDensity& f, std::size_t cells)
{
  // Midpoint rule on a mesh refined between consecutive breakpoints, so it
  // stays accurate for tall narrow cells.
  std::vector<double> edges;
  for (const auto& p : f.pieces())
    edges.insert(edges.end(), p.breakpoints.begin(), p.breakpoints.end());
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  std::size_t per = std::max<std::size_t>(1, cells / std::max<std::size_t>(1, edges.size()));
  double acc = 0.0;
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    double a = edges[e];
    double w = (edges[e + 1] - a) / static_cast<double>(per);
    for (std::size_t j = 0; j < per; ++j)
      acc += f.pdf(a + (static_cast<double>(j) + 0.5) * w) * w;
  }
  return acc;
}

} // namespace kmodal
