#pragma once

#include "kmodal/selection.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kmodal {

enum class MixtureKind
{
  gaussian,
  laplace
};

std::string_view to_string(MixtureKind k);
MixtureKind parse_mixture_kind(std::string_view s);

struct Component
{
  double center = 0.0;
  double sd = 1.0;
  double weight = 1.0;
};

struct MixtureSpec
{
  MixtureKind kind = MixtureKind::gaussian;
  std::vector<Component> components;

  double pdf(double x) const;
  double cdf(double x) const;
};

struct Replicate
{
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::size_t components = 0;
  std::size_t true_modes = 0;
  std::size_t chosen_K = 0;
  bool correct = false;
  std::string error;
};

struct BenchmarkReport
{
  MixtureKind kind = MixtureKind::gaussian;
  SelectionMethod method = SelectionMethod::fit_measure;
  std::size_t B = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double threshold = 0.0; // tau or improvement, whichever applies
  std::vector<Replicate> per_replicate;
  std::size_t accuracy = 0;
};

//! Counter-based seed split: stream `i` of `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t i);

//! 1-5 equally weighted components, centers U[0, 10], sds Exp(1).
MixtureSpec random_mixture(MixtureKind kind, std::uint64_t seed);

//! Number of + to - sign changes of successive pdf differences on a uniform
//! grid over [min center - 5 max sd, max center + 5 max sd].
std::size_t true_mode_count(const MixtureSpec& m, std::size_t grid_points = 20000);

Sample sample_mixture(const MixtureSpec& m, std::size_t n, std::uint64_t seed);

BenchmarkReport run_benchmark(MixtureKind kind, std::size_t B, std::size_t n,
                              const SelectionConfig& sel, const FitterSpec& spec,
                              std::uint64_t seed, unsigned threads = 1);

} // namespace kmodal
