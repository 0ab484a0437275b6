#include "kmodal/dpsearch.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>

namespace kmodal {

Interval padded_support(const Sample& s)
{
  double gap = s.mean_gap();
  if (!(gap > 0.0))
    throw Error(ErrorCode::degenerate_sample, "all sample values are equal");
  return { s.min() - gap, s.max() + gap };
}

std::vector<double> boundaries(const Sample& s, const Grid& g)
{
  Interval range = padded_support(s);
  std::vector<double> b;
  b.reserve(g.points.size() + 2);
  b.push_back(range.lo);
  b.insert(b.end(), g.points.begin(), g.points.end());
  b.push_back(range.hi);
  return b;
}

Grid build_grid(const Sample& s, std::size_t M)
{
  if (M < 1)
    throw Error(ErrorCode::invalid_argument, "grid size M must be >= 1");
  const std::size_t n = s.size();
  if (n < M)
    throw Error(ErrorCode::too_few_points,
                "need n >= M (n = " + std::to_string(n) + ", M = " + std::to_string(M) + ")");
  if (s.distinct() < 2)
    throw Error(ErrorCode::degenerate_sample, "all sample values are equal");

  // gaps between distinct consecutive order statistics
  std::vector<std::size_t> gaps;
  for (std::size_t t = 0; t + 1 < n; ++t)
    if (s[t] < s[t + 1])
      gaps.push_back(t);
  const std::size_t want = M - 1;
  if (gaps.size() < want)
    throw Error(ErrorCode::too_few_points,
                "only " + std::to_string(gaps.size() + 1) + " distinct values for M = " +
                  std::to_string(M));

  Grid g;
  g.points.reserve(want);
  std::size_t prev = 0;
  for (std::size_t j = 1; j <= want; ++j) {
    // gap just after the rounded j/M quantile, 0-based
    std::size_t q = (2 * j * n + M) / (2 * M);
    std::size_t target = std::clamp<std::size_t>(q, 1, n - 1) - 1;
    auto pos = static_cast<std::size_t>(
      std::lower_bound(gaps.begin(), gaps.end(), target) - gaps.begin());
    if (j > 1)
      pos = std::max(pos, prev + 1);
    pos = std::min(pos, gaps.size() - 1 - (want - j));
    prev = pos;
    std::size_t t = gaps[pos];
    g.points.push_back(0.5 * (s[t] + s[t + 1]));
  }
  return g;
}

double interval_score(const Sample& s, Interval support, const FitterSpec& spec,
                      std::size_t min_points)
{
  auto [first, last] = s.range_in(support.lo, support.hi);
  auto pts = s.values().subspan(first, last - first);
  if (pts.size() < std::max<std::size_t>(1, min_points))
    return -inf;
  UnimodalPiece h = fit_unimodal(pts, support, spec, s.distinct_rank(first));
  double nij = static_cast<double>(pts.size());
  return h.loglik + nij * std::log(nij / static_cast<double>(s.size()));
}

ScoreMatrix build_score_matrix(const Sample& s, const Grid& g, const FitterSpec& spec,
                               std::size_t min_points, unsigned threads)
{
  spec.validate();
  const std::size_t M = g.M();
  const auto b = boundaries(s, g);
  ScoreMatrix S(M);

  // column j holds every interval ending at elementary interval j
  auto column = [&](std::size_t j) {
    for (std::size_t i = 0; i <= j; ++i)
      S(i, j) = interval_score(s, { b[i], b[j + 1] }, spec, min_points);
  };

  if (threads == 0)
    threads = std::max(1u, std::thread::hardware_concurrency());
  if (threads <= 1 || M < 4) {
    for (std::size_t j = 0; j < M; ++j)
      column(j);
    return S;
  }
  std::atomic<std::size_t> next{ 0 };
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < std::min<std::size_t>(threads, M); ++w)
    pool.emplace_back([&] {
      for (std::size_t j = next++; j < M; j = next++)
        column(j);
    });
  pool.clear();
  return S;
}

DPTables dp_tables(const ScoreMatrix& S, std::size_t K)
{
  const std::size_t M = S.M();
  if (K < 1)
    throw Error(ErrorCode::invalid_argument, "K must be >= 1");
  if (M < K)
    throw Error(ErrorCode::infeasible_k, "K exceeds the number of grid intervals");

  DPTables t(M, K);
  for (std::size_t m = 0; m < M; ++m) {
    t.D(m, 1) = S(0, m);
    t.I(m, 1) = 0;
  }
  for (std::size_t k = 2; k <= K; ++k) {
    for (std::size_t m = k - 1; m < M; ++m) {
      // last piece starts at interval `start`; earlier pieces cover 0..start-1
      double best = -inf;
      std::size_t arg = k - 1;
      for (std::size_t start = k - 1; start <= m; ++start) {
        double v = t.D(start - 1, k - 1) + S(start, m);
        if (v > best) {
          best = v;
          arg = start;
        }
      }
      t.D(m, k) = best;
      t.I(m, k) = arg;
    }
  }
  if (t.D(M - 1, K) == -inf)
    throw Error(ErrorCode::infeasible_k,
                "no feasible placement of " + std::to_string(K) + " modal intervals");
  return t;
}

Backtracked backtrack(const DPTables& t, const Grid& g, std::size_t K)
{
  const std::size_t M = t.M();
  if (K < 1 || K > t.K() || M != g.M())
    throw Error(ErrorCode::invalid_argument, "tables and grid disagree");
  if (t.D(M - 1, K) == -inf)
    throw Error(ErrorCode::infeasible_k, "D[M,K] is -inf");

  Backtracked out;
  out.loglik = t.D(M - 1, K);
  out.starts.assign(K, 0);
  std::size_t last = M - 1;
  for (std::size_t k = K; k >= 1; --k) {
    out.starts[k - 1] = t.I(last, k);
    if (k > 1)
      last = t.I(last, k) - 1;
  }
  for (std::size_t k = 1; k < K; ++k)
    out.knots.interior.push_back(g.points[out.starts[k] - 1]);
  return out;
}

namespace {

std::vector<Interval> modal_intervals(const Sample& s, const KnotVector& knots)
{
  Interval range = padded_support(s);
  std::vector<Interval> out;
  double lo = range.lo;
  for (double k : knots.interior) {
    out.push_back({ lo, k });
    lo = k;
  }
  out.push_back({ lo, range.hi });
  for (const auto& iv : out)
    if (!(iv.lo < iv.hi))
      throw Error(ErrorCode::invalid_argument, "knots must be strictly increasing inside the data range");
  return out;
}

} // namespace

KModalDensity assemble_density(const Sample& s, const KnotVector& knots,
                               const FitterSpec& spec, std::size_t min_points)
{
  spec.validate();
  for (double k : knots.interior)
    if (s.contains(k))
      throw Error(ErrorCode::invalid_argument, "knot coincides with a data point");
  auto ivs = modal_intervals(s, knots);
  const double n = static_cast<double>(s.size());
  std::vector<double> weights;
  std::vector<UnimodalPiece> pieces;
  for (std::size_t k = 0; k < ivs.size(); ++k) {
    auto [first, last] = s.range_in(ivs[k].lo, ivs[k].hi);
    auto pts = s.values().subspan(first, last - first);
    if (pts.size() < std::max<std::size_t>(1, min_points))
      throw Error(ErrorCode::empty_modal_interval,
                  "modal interval " + std::to_string(k + 1) + " holds " +
                    std::to_string(pts.size()) + " points");
    pieces.push_back(fit_unimodal(pts, ivs[k], spec, s.distinct_rank(first)));
    weights.push_back(static_cast<double>(pts.size()) / n);
  }
  return KModalDensity(knots, std::move(weights), std::move(pieces));
}

double min_knot_spacing(const Sample& s, const KnotVector& knots)
{
  std::vector<double> pts;
  pts.push_back(s.min());
  pts.insert(pts.end(), knots.interior.begin(), knots.interior.end());
  pts.push_back(s.max());
  double d = inf;
  for (std::size_t i = 1; i < pts.size(); ++i)
    d = std::min(d, pts[i] - pts[i - 1]);
  return d;
}

std::vector<double> knot_subgrid(const Sample& s, double knot, double r, std::size_t L)
{
  if (L == 0)
    throw Error(ErrorCode::invalid_argument, "subgrid size L must be >= 1");
  if (L == 1 || r == 0.0)
    return { knot };

  std::vector<double> pts(L);
  for (std::size_t i = 0; i < L; ++i)
    pts[i] = knot - r + 2.0 * r * static_cast<double>(i) / static_cast<double>(L - 1);
  // the coarse knot is always a candidate
  auto nearest = std::min_element(pts.begin(), pts.end(), [&](double a, double b) {
    return std::abs(a - knot) < std::abs(b - knot);
  });
  *nearest = knot;

  auto vals = s.values();
  for (double& v : pts) {
    if (!s.contains(v))
      continue;
    auto lo = std::lower_bound(vals.begin(), vals.end(), v);
    auto hi = std::upper_bound(vals.begin(), vals.end(), v);
    double gap = inf;
    if (lo != vals.begin())
      gap = std::min(gap, v - *(lo - 1));
    if (hi != vals.end())
      gap = std::min(gap, *hi - v);
    if (!std::isfinite(gap))
      gap = r / static_cast<double>(L);
    v += 0.5 * gap;
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

FitResult multigrid_refine(const Sample& s, const FitResult& coarse,
                           const MultiGridConfig& cfg, const FitterSpec& spec,
                           std::size_t min_points)
{
  const std::size_t K = coarse.K;
  if (K < 2)
    return coarse;
  if (cfg.L == 0)
    throw Error(ErrorCode::invalid_argument, "subgrid size L must be >= 1");

  const double delta = min_knot_spacing(s, coarse.knots);
  const double L = static_cast<double>(cfg.L);
  const double r = cfg.r.value_or(delta * (0.5 - 0.5 / L));
  if (r < 0.0)
    throw Error(ErrorCode::invalid_argument, "search radius must be non-negative");
  if (!(2.0 * r < delta))
    throw Error(ErrorCode::overlap_violation,
                "2r = " + std::to_string(2.0 * r) + " must be below delta* = " + std::to_string(delta));

  const std::size_t nk = K - 1;
  std::vector<std::vector<double>> sub(nk);
  std::vector<std::size_t> coarse_idx(nk);
  for (std::size_t k = 0; k < nk; ++k) {
    double knot = coarse.knots.interior[k];
    sub[k] = knot_subgrid(s, knot, r, cfg.L);
    coarse_idx[k] = static_cast<std::size_t>(
      std::find(sub[k].begin(), sub[k].end(), knot) - sub[k].begin());
  }

  // piece p spans (left candidate a of knot p-1, right candidate b of knot p);
  // cache its score so the L^(K-1) enumeration refits each interval once
  const Interval range = padded_support(s);
  auto left_size = [&](std::size_t p) { return p == 0 ? 1 : sub[p - 1].size(); };
  auto right_size = [&](std::size_t p) { return p == nk ? 1 : sub[p].size(); };
  std::vector<std::vector<double>> cache(K);
  std::vector<std::vector<char>> have(K);
  for (std::size_t p = 0; p < K; ++p) {
    cache[p].assign(left_size(p) * right_size(p), -inf);
    have[p].assign(left_size(p) * right_size(p), 0);
  }
  auto piece_score = [&](std::size_t p, std::size_t a, std::size_t b) {
    std::size_t key = a * right_size(p) + b;
    if (!have[p][key]) {
      double lo = p == 0 ? range.lo : sub[p - 1][a];
      double hi = p == nk ? range.hi : sub[p][b];
      cache[p][key] = lo < hi ? interval_score(s, { lo, hi }, spec, min_points) : -inf;
      have[p][key] = 1;
    }
    return cache[p][key];
  };
  auto combo_score = [&](const std::vector<std::size_t>& idx) {
    for (std::size_t k = 1; k < nk; ++k)
      if (!(sub[k - 1][idx[k - 1]] < sub[k][idx[k]]))
        return -inf;
    double total = 0.0;
    for (std::size_t p = 0; p < K; ++p) {
      std::size_t a = p == 0 ? 0 : idx[p - 1];
      std::size_t b = p == nk ? 0 : idx[p];
      total += piece_score(p, a, b);
      if (total == -inf)
        return -inf;
    }
    return total;
  };

  std::vector<std::size_t> best_idx = coarse_idx;
  double best = combo_score(coarse_idx);
  std::vector<std::size_t> idx(nk, 0);
  for (;;) {
    double v = combo_score(idx);
    if (v > best) {
      best = v;
      best_idx = idx;
    }
    // mixed-radix increment
    std::size_t k = 0;
    while (k < nk && ++idx[k] == sub[k].size()) {
      idx[k] = 0;
      ++k;
    }
    if (k == nk)
      break;
  }

  FitResult out = coarse;
  out.refined = true;
  if (best_idx == coarse_idx)
    return out;

  KnotVector knots;
  for (std::size_t k = 0; k < nk; ++k)
    knots.interior.push_back(sub[k][best_idx[k]]);
  KModalDensity f = assemble_density(s, knots, spec, min_points);
  double ll = log_likelihood(f, s);
  // guard against rounding flipping the comparison
  if (!(ll >= coarse.loglik))
    return out;
  out.density = std::move(f);
  out.knots = std::move(knots);
  out.loglik = ll;
  return out;
}

KnotVector snap_knots_to_valleys(const Sample& s, const KModalDensity& f)
{
  KnotVector out = f.knots();
  const auto pieces = f.pieces();
  const auto w = f.weights();
  for (std::size_t k = 0; k < out.interior.size(); ++k) {
    const auto& left = pieces[k];
    const auto& right = pieces[k + 1];
    double lv = w[k] * left.heights.back();
    double rv = w[k + 1] * right.heights.front();
    double floor = std::min(lv, rv);
    double a = out.interior[k];
    double b = out.interior[k];
    if (lv == floor)
      a = left.breakpoints[left.cells() - 1];
    if (rv == floor)
      b = right.breakpoints[1];
    double mid = 0.5 * (a + b);
    double lo_bound = k == 0 ? s.min() : out.interior[k - 1];
    if (!(mid > lo_bound) || s.contains(mid))
      continue;
    out.interior[k] = mid;
  }
  return out;
}

FitResult fit_kmodal(const Sample& s, const FitOptions& opt, const FitterSpec& spec)
{
  spec.validate();
  const std::size_t K = opt.K;
  if (K < 1)
    throw Error(ErrorCode::invalid_argument, "K must be >= 1");
  if (s.size() < K * std::max<std::size_t>(1, opt.min_points))
    throw Error(ErrorCode::too_few_points,
                "need at least " + std::to_string(K * opt.min_points) + " points for K = " +
                  std::to_string(K));

  FitResult res;
  res.K = K;
  res.M = opt.M ? opt.M : 5 * K;

  if (K == 1) {
    res.density = assemble_density(s, {}, spec, opt.min_points);
    res.loglik = log_likelihood(res.density, s);
    return res;
  }

  if (res.M < K)
    throw Error(ErrorCode::infeasible_k, "K exceeds M");
  res.grid = build_grid(s, res.M);
  ScoreMatrix S = build_score_matrix(s, res.grid, spec, opt.min_points, opt.threads);
  DPTables t = dp_tables(S, K);
  Backtracked bt = backtrack(t, res.grid, K);
  res.knots = bt.knots;
  res.density = assemble_density(s, res.knots, spec, opt.min_points);
  res.loglik = log_likelihood(res.density, s);

  if (opt.multigrid)
    res = multigrid_refine(s, res, *opt.multigrid, spec, opt.min_points);

  if (opt.snap_knots) {
    KnotVector snapped = snap_knots_to_valleys(s, res.density);
    try {
      KModalDensity f = assemble_density(s, snapped, spec, opt.min_points);
      res.loglik = log_likelihood(f, s);
      res.density = std::move(f);
      res.knots = std::move(snapped);
    } catch (const Error&) {
      // keep the unsnapped knots when snapping empties an interval
    }
  }
  return res;
}

} // namespace kmodal
