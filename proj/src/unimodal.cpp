#include "kmodal/unimodal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace kmodal {

void FitterSpec::validate() const
{
  if (kind == FitterKind::histogram_unimodal && histogram_bins == 1)
    throw Error(ErrorCode::invalid_argument, "histogram_bins must be >= 2");
  if (mode_candidates_per_interval == 0)
    throw Error(ErrorCode::invalid_argument,
                "mode_candidates_per_interval must be positive");
}

double MonotoneFit::pdf(double x) const
{
  if (heights.empty() || x < breakpoints.front() || x > breakpoints.back())
    return 0.0;
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
  auto c = static_cast<std::size_t>(it - breakpoints.begin());
  if (c == 0)
    return heights.front();
  if (c > heights.size())
    return heights.back();
  double h = heights[c - 1];
  if (x == breakpoints[c - 1] && c >= 2)
    h = std::max(h, heights[c - 2]);
  return h;
}

double MonotoneFit::mass() const
{
  double acc = 0.0;
  for (std::size_t c = 0; c < heights.size(); ++c)
    acc += heights[c] * (breakpoints[c + 1] - breakpoints[c]);
  return acc;
}

// ------------------------------------------------------------------ PAVA

std::vector<double> pava(std::span<const double> values,
                         std::span<const double> weights, Direction dir)
{
  if (values.size() != weights.size())
    throw Error(ErrorCode::length_mismatch, "values and weights differ in length");
  for (double w : weights)
    if (!(w > 0.0))
      throw Error(ErrorCode::invalid_argument, "pava weights must be positive");

  const double sign = dir == Direction::non_decreasing ? 1.0 : -1.0;
  struct Block
  {
    double mean;
    double weight;
    std::size_t len;
  };
  std::vector<Block> blocks;
  blocks.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    blocks.push_back({ sign * values[i], weights[i], 1 });
    while (blocks.size() > 1 &&
           blocks[blocks.size() - 2].mean > blocks.back().mean) {
      Block b = blocks.back();
      blocks.pop_back();
      Block& a = blocks.back();
      double w = a.weight + b.weight;
      a.mean = (a.mean * a.weight + b.mean * b.weight) / w;
      a.weight = w;
      a.len += b.len;
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& b : blocks)
    out.insert(out.end(), b.len, sign * b.mean);
  return out;
}

// ------------------------------------------------------------- Grenander

namespace {

void require_inside(std::span<const double> points, Interval support)
{
  if (!support.finite() || !(support.lo < support.hi))
    throw Error(ErrorCode::invalid_argument, "support must be finite and non-empty");
  if (points.empty())
    throw Error(ErrorCode::no_interior_points, "no points inside the interval");
  if (!(points.front() > support.lo) || !(points.back() < support.hi))
    throw Error(ErrorCode::invalid_argument,
                "points must lie strictly inside the support");
}

// Non-increasing fit anchored at support.lo: slopes of the least concave
// majorant of the ECDF through (lo, 0).
MonotoneFit grenander_decreasing(std::span<const double> points, Interval support)
{
  struct Vertex
  {
    double x;
    double y; // cumulative count
  };
  std::vector<Vertex> hull;
  hull.push_back({ support.lo, 0.0 });
  std::size_t count = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    ++count;
    if (i + 1 < points.size() && points[i + 1] == points[i])
      continue;
    Vertex p{ points[i], static_cast<double>(count) };
    while (hull.size() >= 2) {
      const Vertex& o = hull[hull.size() - 2];
      const Vertex& q = hull.back();
      double cross = (q.x - o.x) * (p.y - o.y) - (q.y - o.y) * (p.x - o.x);
      if (cross >= 0.0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(p);
  }

  const double n = static_cast<double>(points.size());
  MonotoneFit fit;
  fit.direction = Direction::non_increasing;
  for (const auto& v : hull)
    fit.breakpoints.push_back(v.x);
  for (std::size_t i = 1; i < hull.size(); ++i)
    fit.heights.push_back((hull[i].y - hull[i - 1].y) / (n * (hull[i].x - hull[i - 1].x)));
  fit.breakpoints.push_back(support.hi);
  fit.heights.push_back(0.0);
  return fit;
}

} // namespace

MonotoneFit grenander_monotone(std::span<const double> points, Direction dir,
                               Interval support)
{
  require_inside(points, support);
  if (dir == Direction::non_increasing)
    return grenander_decreasing(points, support);

  // mirror x -> -x, fit decreasing, mirror back
  std::vector<double> mirrored(points.rbegin(), points.rend());
  for (double& v : mirrored)
    v = -v;
  MonotoneFit m = grenander_decreasing(mirrored, { -support.hi, -support.lo });
  MonotoneFit fit;
  fit.direction = Direction::non_decreasing;
  fit.breakpoints.assign(m.breakpoints.rbegin(), m.breakpoints.rend());
  for (double& v : fit.breakpoints)
    v = -v;
  fit.heights.assign(m.heights.rbegin(), m.heights.rend());
  return fit;
}

UnimodalPiece fit_unimodal_known_mode(std::span<const double> points,
                                      Interval support, double mu)
{
  require_inside(points, support);
  if (!(mu > support.lo && mu < support.hi))
    throw Error(ErrorCode::invalid_argument, "mode must lie inside the support");
  if (std::binary_search(points.begin(), points.end(), mu))
    throw Error(ErrorCode::invalid_argument, "mode must not be a data point");

  auto split = static_cast<std::size_t>(
    std::lower_bound(points.begin(), points.end(), mu) - points.begin());
  auto left = points.first(split);
  auto right = points.subspan(split);
  const double n = static_cast<double>(points.size());

  UnimodalPiece piece;
  piece.mode = mu;
  if (left.empty()) {
    piece.breakpoints = { support.lo, mu };
    piece.heights = { 0.0 };
  } else {
    MonotoneFit up = grenander_monotone(left, Direction::non_decreasing, { support.lo, mu });
    double w = static_cast<double>(left.size()) / n;
    piece.breakpoints = up.breakpoints;
    for (double h : up.heights)
      piece.heights.push_back(w * h);
  }
  if (right.empty()) {
    piece.breakpoints.push_back(support.hi);
    piece.heights.push_back(0.0);
  } else {
    MonotoneFit down = grenander_monotone(right, Direction::non_increasing, { mu, support.hi });
    double w = static_cast<double>(right.size()) / n;
    piece.breakpoints.insert(piece.breakpoints.end(), down.breakpoints.begin() + 1,
                             down.breakpoints.end());
    for (double h : down.heights)
      piece.heights.push_back(w * h);
  }
  piece.loglik = piece.loglik_of(points);
  return piece;
}

std::vector<double> mode_candidates(std::span<const double> points,
                                    Interval support, std::size_t cap,
                                    std::size_t rank_offset)
{
  std::vector<double> mids;
  std::vector<std::size_t> gap; // global gap index of each midpoint
  std::size_t r = rank_offset;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (points[i + 1] == points[i])
      continue;
    double m = 0.5 * (points[i] + points[i + 1]);
    if (m > points[i] && m < points[i + 1]) {
      mids.push_back(m);
      gap.push_back(r);
    }
    ++r;
  }
  if (mids.empty()) {
    double m = 0.5 * (support.lo + support.hi);
    if (!points.empty() && std::binary_search(points.begin(), points.end(), m))
      m = 0.5 * (m + support.hi);
    mids.push_back(m);
  }
  if (cap == 0 || mids.size() <= cap)
    return mids;

  std::size_t stride = 1;
  while ((mids.size() + stride - 1) / stride > cap)
    stride *= 2;
  std::vector<double> thinned;
  for (std::size_t j = 0; j < mids.size(); ++j)
    if (gap[j] % stride == 0)
      thinned.push_back(mids[j]);
  if (thinned.empty())
    thinned.push_back(mids[mids.size() / 2]);
  return thinned;
}

// ------------------------------------------------------------- histogram

std::vector<double> unimodal_regression(std::span<const double> values)
{
  const std::size_t n = values.size();
  if (n == 0)
    return {};
  std::vector<double> ones(n, 1.0);
  auto sse = [](std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      acc += (a[i] - b[i]) * (a[i] - b[i]);
    return acc;
  };

  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_fit;
  // rising part covers [0, split), falling part [split, n)
  for (std::size_t split = 0; split <= n; ++split) {
    auto head = values.first(split);
    auto tail = values.subspan(split);
    auto up = pava(head, std::span<const double>(ones).first(split), Direction::non_decreasing);
    auto down = pava(tail, std::span<const double>(ones).first(n - split), Direction::non_increasing);
    double err = sse(head, up) + sse(tail, down);
    if (err < best) {
      best = err;
      best_fit = std::move(up);
      best_fit.insert(best_fit.end(), down.begin(), down.end());
    }
  }
  return best_fit;
}

UnimodalPiece fit_histogram_unimodal(std::span<const double> points,
                                     Interval support, std::size_t bins)
{
  require_inside(points, support);
  if (bins < 2)
    throw Error(ErrorCode::invalid_argument, "histogram needs at least 2 bins");

  UnimodalPiece piece;
  const double width = support.hi - support.lo;
  piece.breakpoints.resize(bins + 1);
  for (std::size_t c = 0; c <= bins; ++c)
    piece.breakpoints[c] = support.lo + width * static_cast<double>(c) / static_cast<double>(bins);
  piece.breakpoints.back() = support.hi;

  // bin membership uses the same lookup as pdf evaluation
  std::vector<double> counts(bins, 0.0);
  for (double x : points) {
    auto it = std::upper_bound(piece.breakpoints.begin(), piece.breakpoints.end(), x);
    auto c = static_cast<std::size_t>(it - piece.breakpoints.begin());
    c = std::clamp<std::size_t>(c, 1, bins) - 1;
    counts[c] += 1.0;
  }
  const double n = static_cast<double>(points.size());
  std::vector<double> raw(bins);
  for (std::size_t c = 0; c < bins; ++c)
    raw[c] = counts[c] / (n * (piece.breakpoints[c + 1] - piece.breakpoints[c]));

  piece.heights = unimodal_regression(raw);
  double mass = 0.0;
  for (std::size_t c = 0; c < bins; ++c) {
    piece.heights[c] = std::max(0.0, piece.heights[c]);
    mass += piece.heights[c] * (piece.breakpoints[c + 1] - piece.breakpoints[c]);
  }
  for (double& h : piece.heights)
    h /= mass;

  auto peak = static_cast<std::size_t>(
    std::max_element(piece.heights.begin(), piece.heights.end()) - piece.heights.begin());
  piece.mode = 0.5 * (piece.breakpoints[peak] + piece.breakpoints[peak + 1]);
  piece.loglik = piece.loglik_of(points);
  return piece;
}

// -------------------------------------------------------------- dispatch

namespace {

UnimodalPiece monotone_piece(std::span<const double> points, Interval support, Direction dir)
{
  MonotoneFit f = grenander_monotone(points, dir, support);
  UnimodalPiece p;
  p.breakpoints = std::move(f.breakpoints);
  p.heights = std::move(f.heights);
  p.mode = dir == Direction::non_increasing ? support.lo : support.hi;
  p.loglik = p.loglik_of(points);
  return p;
}

} // namespace

UnimodalPiece fit_unimodal(std::span<const double> points, Interval support,
                           const FitterSpec& spec, std::size_t rank_offset)
{
  require_inside(points, support);
  if (spec.kind == FitterKind::histogram_unimodal) {
    std::size_t bins = spec.histogram_bins;
    if (bins == 0)
      bins = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(points.size())))));
    return fit_histogram_unimodal(points, support, bins);
  }

  auto modes = mode_candidates(points, support, spec.mode_candidates_per_interval, rank_offset);
  UnimodalPiece best = monotone_piece(points, support, Direction::non_increasing);
  {
    UnimodalPiece up = monotone_piece(points, support, Direction::non_decreasing);
    if (up.loglik > best.loglik)
      best = std::move(up);
  }
  for (double mu : modes) {
    UnimodalPiece p = fit_unimodal_known_mode(points, support, mu);
    if (p.loglik > best.loglik)
      best = std::move(p);
  }
  return best;
}

} // namespace kmodal
