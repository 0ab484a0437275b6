#include "kmodal/io.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace kmodal;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a)
{
  return std::vector<double>(a.data(), a.data() + a.size());
}

template <typename F>
py::array_t<double> vectorize(const Array& x, F&& f)
{
  py::array_t<double> out(x.request().shape);
  double* o = out.mutable_data();
  const double* p = x.data();
  for (py::ssize_t i = 0; i < x.size(); ++i)
    o[i] = f(p[i]);
  return out;
}

FitterSpec make_spec(const std::string& fitter, std::size_t bins, std::size_t mode_candidates)
{
  FitterSpec spec;
  if (fitter == "grenander_mle")
    spec.kind = FitterKind::grenander_mle;
  else if (fitter == "histogram_unimodal")
    spec.kind = FitterKind::histogram_unimodal;
  else
    throw Error(ErrorCode::invalid_argument, "unknown fitter: " + fitter);
  spec.histogram_bins = bins;
  spec.mode_candidates_per_interval = mode_candidates;
  return spec;
}

SelectionConfig make_selection(const std::string& method, double tau, std::size_t folds,
                               double improvement, std::size_t k_max, std::size_t coarse_L,
                               std::uint64_t seed, std::size_t min_points)
{
  SelectionConfig cfg;
  if (method == "fit_measure")
    cfg.method = SelectionMethod::fit_measure;
  else if (method == "cross_validation" || method == "cv")
    cfg.method = SelectionMethod::cross_validation;
  else
    throw Error(ErrorCode::invalid_argument, "unknown selection method: " + method);
  cfg.tau = tau;
  cfg.folds = folds;
  cfg.improvement = improvement;
  cfg.k_max = k_max;
  cfg.coarse_L = coarse_L;
  cfg.seed = seed;
  cfg.min_points = min_points;
  return cfg;
}

} // namespace

PYBIND11_MODULE(_kmodal, m)
{
  m.doc() = "K-modal density fitting by dynamic programming";

  static py::exception<Error> error(m, "KModalError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p)
        std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error;
      PyErr_SetObject(exc.ptr(),
                      py::make_tuple(std::string(to_string(e.code())), e.what()).ptr());
    }
  });

  py::class_<KModalDensity>(m, "KModalDensity")
    .def_property_readonly("K", &KModalDensity::K)
    .def_property_readonly("knots", [](const KModalDensity& f) { return f.knots().interior; })
    .def_property_readonly("weights", [](const KModalDensity& f) {
      return std::vector<double>(f.weights().begin(), f.weights().end());
    })
    .def_property_readonly("support", [](const KModalDensity& f) {
      return py::make_tuple(f.support_lo(), f.support_hi());
    })
    .def("pdf", [](const KModalDensity& f, double x) { return f.pdf(x); }, py::arg("x"))
    .def("pdf", [](const KModalDensity& f, const Array& x) {
      return vectorize(x, [&](double v) { return f.pdf(v); });
    }, py::arg("x"))
    .def("cdf", [](const KModalDensity& f, double x) { return f.cdf(x); }, py::arg("x"))
    .def("cdf", [](const KModalDensity& f, const Array& x) {
      return vectorize(x, [&](double v) { return f.cdf(v); });
    }, py::arg("x"))
    .def("log_likelihood", [](const KModalDensity& f, const Array& x) {
      auto v = to_vector(x);
      return log_likelihood(f, std::span<const double>(v));
    }, py::arg("x"))
    .def("to_json", [](const KModalDensity& f, std::size_t curve_points) {
      return to_json(f, curve_points).dump();
    }, py::arg("curve_points") = 0)
    .def_static("from_json", [](const std::string& s) {
      json j;
      try {
        j = json::parse(s);
      } catch (const json::exception& e) {
        throw Error(ErrorCode::parse_error, e.what());
      }
      return density_from_json(j.contains("fit") ? j["fit"] : j);
    }, py::arg("text"));

  py::class_<FitResult>(m, "FitResult")
    .def_readonly("density", &FitResult::density)
    .def_property_readonly("knots", [](const FitResult& r) { return r.knots.interior; })
    .def_readonly("loglik", &FitResult::loglik)
    .def_readonly("K", &FitResult::K)
    .def_readonly("M", &FitResult::M)
    .def_readonly("refined", &FitResult::refined)
    .def_property_readonly("grid", [](const FitResult& r) { return r.grid.points; })
    .def("to_json", [](const FitResult& r, std::size_t curve_points) {
      return to_json(r, curve_points).dump();
    }, py::arg("curve_points") = 0);

  m.def("fit",
    [](const Array& data, std::size_t K,
       std::size_t M, std::size_t multigrid_L, std::optional<double> multigrid_r,
       const std::string& fitter, std::size_t bins, std::size_t mode_candidates,
       std::size_t min_points, bool snap_knots, unsigned threads) {
      auto v = to_vector(data);
      Sample s = load_sample(v);
      FitOptions opt;
      opt.K = K;
      opt.M = M;
      if (multigrid_L > 1)
        opt.multigrid = MultiGridConfig{ multigrid_L, multigrid_r };
      opt.min_points = min_points;
      opt.snap_knots = snap_knots;
      opt.threads = threads;
      py::gil_scoped_release release;
      return fit_kmodal(s, opt, make_spec(fitter, bins, mode_candidates));
    },
    py::arg("data"), py::arg("K") = 2, py::arg("M") = 0, py::arg("multigrid_L") = 5,
    py::arg("multigrid_r") = std::nullopt, py::arg("fitter") = "histogram_unimodal",
    py::arg("bins") = 0, py::arg("mode_candidates") = 64, py::arg("min_points") = 2,
    py::arg("snap_knots") = false, py::arg("threads") = 1);

  m.def("select_k",
    [](const Array& data,
       const std::string& method, double tau, std::size_t folds, double improvement,
       std::size_t k_max, std::size_t coarse_L, std::uint64_t seed, std::size_t min_points,
       const std::string& fitter, std::size_t bins, std::size_t mode_candidates) {
      auto v = to_vector(data);
      Sample s = load_sample(v);
      auto cfg = make_selection(method, tau, folds, improvement, k_max, coarse_L, seed, min_points);
      auto spec = make_spec(fitter, bins, mode_candidates);
      SelectionReport r;
      {
        py::gil_scoped_release release;
        r = select_k(s, cfg, spec);
      }
      return to_json(r).dump();
    },
    py::arg("data"), py::arg("method") = "fit_measure", py::arg("tau") = 0.01,
    py::arg("folds") = 5, py::arg("improvement") = 0.01, py::arg("k_max") = 5,
    py::arg("coarse_L") = 3, py::arg("seed") = 0, py::arg("min_points") = 2,
    py::arg("fitter") = "histogram_unimodal", py::arg("bins") = 0,
    py::arg("mode_candidates") = 64);

  m.def("run_benchmark",
    [](const std::string& kind, std::size_t B, std::size_t n, const std::string& method,
       double tau, double improvement, std::size_t k_max, std::uint64_t seed,
       const std::string& fitter, unsigned threads) {
      auto cfg = make_selection(method, tau, 5, improvement, k_max, 3, 0, 2);
      auto spec = make_spec(fitter, 0, 64);
      auto mk = parse_mixture_kind(kind);
      BenchmarkReport r;
      {
        py::gil_scoped_release release;
        r = run_benchmark(mk, B, n, cfg, spec, seed, threads);
      }
      return to_json(r).dump();
    },
    py::arg("kind") = "gaussian", py::arg("B") = 20, py::arg("n") = 2000,
    py::arg("method") = "fit_measure", py::arg("tau") = 0.01, py::arg("improvement") = 0.01,
    py::arg("k_max") = 5, py::arg("seed") = 0, py::arg("fitter") = "histogram_unimodal",
    py::arg("threads") = 1);

  m.def("pava",
    [](const std::vector<double>& y, std::optional<std::vector<double>> w, bool increasing) {
      std::vector<double> wt = w ? *w : std::vector<double>(y.size(), 1.0);
      return pava(y, wt, increasing ? Direction::non_decreasing : Direction::non_increasing);
    },
    py::arg("values"), py::arg("weights") = std::nullopt, py::arg("increasing") = true);

  m.def("grenander",
    [](std::vector<double> points, double lo, double hi, bool decreasing) {
      std::sort(points.begin(), points.end());
      auto f = grenander_monotone(points,
                                  decreasing ? Direction::non_increasing : Direction::non_decreasing,
                                  { lo, hi });
      return py::make_tuple(f.breakpoints, f.heights);
    },
    py::arg("points"), py::arg("lo"), py::arg("hi"), py::arg("decreasing") = true,
    "Breakpoints and cell heights of the monotone density MLE on [lo, hi].");

  m.def("sample_mixture",
    [](const std::string& kind, const std::vector<std::tuple<double, double, double>>& comps,
       std::size_t n, std::uint64_t seed) {
      MixtureSpec spec;
      spec.kind = parse_mixture_kind(kind);
      for (auto [c, sd, w] : comps)
        spec.components.push_back({ c, sd, w });
      Sample s = sample_mixture(spec, n, seed);
      return py::array_t<double>(static_cast<py::ssize_t>(s.size()), s.values().data());
    },
    py::arg("kind"), py::arg("components"), py::arg("n"), py::arg("seed") = 0,
    "Sorted i.i.d. draws; components are (center, sd, weight) triples.");

  m.def("true_mode_count",
    [](const std::string& kind, const std::vector<std::tuple<double, double, double>>& comps,
       std::size_t grid_points) {
      MixtureSpec spec;
      spec.kind = parse_mixture_kind(kind);
      for (auto [c, sd, w] : comps)
        spec.components.push_back({ c, sd, w });
      return true_mode_count(spec, grid_points);
    },
    py::arg("kind"), py::arg("components"), py::arg("grid_points") = 20000);
}
