#pragma once

#include "kmodal/core.hpp"
#include "kmodal/unimodal.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace kmodal {

//! Candidate knot locations g_2 < ... < g_M. Together with the padded
//! sample range they cut the line into M elementary intervals, numbered
//! 0..M-1 here: interval m is [boundary(m), boundary(m+1)).
struct Grid
{
  std::vector<double> points;

  std::size_t M() const { return points.size() + 1; }
};

//! Sample range widened by one mean inter-point gap on each side. This is
//! the finite stand-in for (-inf, +inf) used by every fitter.
Interval padded_support(const Sample& s);

//! M+1 interval boundaries: padded lo, the grid points, padded hi.
std::vector<double> boundaries(const Sample& s, const Grid& g);

Grid build_grid(const Sample& s, std::size_t M);

//! S(i, j): rescaled log-likelihood of one unimodal fit on intervals i..j.
class ScoreMatrix
{
public:
  explicit ScoreMatrix(std::size_t M)
    : M_(M)
    , data_(M * M, -inf)
  {}

  std::size_t M() const { return M_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * M_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * M_ + j]; }

private:
  std::size_t M_;
  std::vector<double> data_;
};

//! D(m, k): best score for k pieces covering intervals 0..m.
//! I(m, k): first interval of the k-th piece in that optimum.
//! m is a 0-based interval index, k counts pieces from 1.
class DPTables
{
public:
  DPTables(std::size_t M, std::size_t K)
    : M_(M)
    , K_(K)
    , D_(M * K, -inf)
    , I_(M * K, 0)
  {}

  std::size_t M() const { return M_; }
  std::size_t K() const { return K_; }
  double D(std::size_t m, std::size_t k) const { return D_[m * K_ + k - 1]; }
  double& D(std::size_t m, std::size_t k) { return D_[m * K_ + k - 1]; }
  std::size_t I(std::size_t m, std::size_t k) const { return I_[m * K_ + k - 1]; }
  std::size_t& I(std::size_t m, std::size_t k) { return I_[m * K_ + k - 1]; }

private:
  std::size_t M_;
  std::size_t K_;
  std::vector<double> D_;
  std::vector<std::size_t> I_;
};

struct MultiGridConfig
{
  std::size_t L = 5;
  //! Search radius; unset means delta* (1/2 - 1/(2L)).
  std::optional<double> r;
};

struct FitOptions
{
  std::size_t K = 1;
  //! Grid size; 0 means 5K.
  std::size_t M = 0;
  std::optional<MultiGridConfig> multigrid;
  std::size_t min_points = 2;
  //! Move each knot to the middle of the flat stretch of density around it.
  bool snap_knots = false;
  //! Worker threads for the score matrix; 0 means hardware concurrency.
  unsigned threads = 1;
};

struct FitResult
{
  KModalDensity density;
  KnotVector knots;
  double loglik = -inf;
  Grid grid;
  std::size_t K = 1;
  std::size_t M = 0;
  bool refined = false;
};

struct Backtracked
{
  KnotVector knots;
  double loglik = -inf;
  //! First elementary interval of each piece (0-based, length K).
  std::vector<std::size_t> starts;
};

//! Score of a single fitted modal interval: its unimodal log-likelihood plus
//! n_ij log(n_ij / n); -inf below `min_points`.
double interval_score(const Sample& s, Interval support, const FitterSpec& spec,
                      std::size_t min_points);

ScoreMatrix build_score_matrix(const Sample& s, const Grid& g, const FitterSpec& spec,
                               std::size_t min_points = 2, unsigned threads = 1);

DPTables dp_tables(const ScoreMatrix& S, std::size_t K);

Backtracked backtrack(const DPTables& t, const Grid& g, std::size_t K);

KModalDensity assemble_density(const Sample& s, const KnotVector& knots,
                               const FitterSpec& spec, std::size_t min_points = 2);

FitResult multigrid_refine(const Sample& s, const FitResult& coarse,
                           const MultiGridConfig& cfg, const FitterSpec& spec,
                           std::size_t min_points = 2);

//! Local subgrid of candidate positions around a coarse knot.
std::vector<double> knot_subgrid(const Sample& s, double knot, double r, std::size_t L);

//! Smallest spacing among x_min, the knots and x_max.
double min_knot_spacing(const Sample& s, const KnotVector& knots);

KnotVector snap_knots_to_valleys(const Sample& s, const KModalDensity& f);

FitResult fit_kmodal(const Sample& s, const FitOptions& opt, const FitterSpec& spec);

} // namespace kmodal
