#include "kmodal/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace kmodal {

namespace {

bool parse_double(std::string_view tok, double& out)
{
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

std::vector<std::string_view> tokenize(std::string_view line)
{
  std::vector<std::string_view> toks;
  std::size_t i = 0;
  auto is_sep = [](char c) { return c == ',' || c == ' ' || c == '\t' || c == '\r' || c == ';'; };
  while (i < line.size()) {
    while (i < line.size() && is_sep(line[i]))
      ++i;
    std::size_t j = i;
    while (j < line.size() && !is_sep(line[j]))
      ++j;
    if (j > i)
      toks.push_back(line.substr(i, j - i));
    i = j;
  }
  return toks;
}

// quoted CSV headers and fields
std::string_view unquote(std::string_view t)
{
  if (t.size() >= 2 && t.front() == '"' && t.back() == '"')
    return t.substr(1, t.size() - 2);
  return t;
}

// null for non-finite values
json number(double v)
{
  return std::isfinite(v) ? json(v) : json(nullptr);
}

} // namespace

std::vector<double> read_values(std::istream& in)
{
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  bool seen_data_line = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos)
      view = view.substr(0, hash);
    auto toks = tokenize(view);
    if (toks.empty())
      continue;
    bool first_line = !seen_data_line;
    seen_data_line = true;
    std::vector<double> vals;
    bool ok = true;
    for (auto t : toks) {
      double v = 0.0;
      if (!parse_double(unquote(t), v)) {
        ok = false;
        break;
      }
      vals.push_back(v);
    }
    if (!ok) {
      if (first_line)
        continue; // header
      throw Error(ErrorCode::parse_error, "non-numeric value on line " + std::to_string(lineno));
    }
    out.insert(out.end(), vals.begin(), vals.end());
  }
  return out;
}

std::vector<double> read_values(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::parse_error, "cannot open " + path.string());
  return read_values(in);
}

std::vector<CurvePoint> density_curve(const KModalDensity& f, std::size_t resolution)
{
  std::vector<CurvePoint> out;
  if (resolution == 0)
    return out;
  double lo = f.support_lo();
  double hi = f.support_hi();
  double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  out.reserve(resolution);
  for (std::size_t i = 0; i < resolution; ++i) {
    double x = resolution == 1 ? 0.5 * (lo + hi)
                               : lo + (hi - lo) * static_cast<double>(i) /
                                        static_cast<double>(resolution - 1);
    out.push_back({ x, f.pdf(x), f.cdf(x) });
  }
  return out;
}

json to_json(const UnimodalPiece& p)
{
  return json{ { "breakpoints", p.breakpoints },
               { "heights", p.heights },
               { "mode", p.mode },
               { "loglik", number(p.loglik) } };
}

json to_json(const KModalDensity& f, std::size_t curve_resolution)
{
  json j;
  j["K"] = f.K();
  j["knots"] = f.knots().interior;
  j["weights"] = std::vector<double>(f.weights().begin(), f.weights().end());
  j["pieces"] = json::array();
  for (const auto& p : f.pieces())
    j["pieces"].push_back(to_json(p));
  json curve = json::array();
  for (const auto& c : density_curve(f, curve_resolution))
    curve.push_back({ c.x, c.pdf, c.cdf });
  j["curve"] = std::move(curve);
  return j;
}

json to_json(const FitResult& r, std::size_t curve_resolution)
{
  json j = to_json(r.density, curve_resolution);
  j["loglik"] = number(r.loglik);
  j["M"] = r.M;
  j["grid"] = r.grid.points;
  j["refined"] = r.refined;
  return j;
}

json to_json(const SelectionReport& r)
{
  json j;
  j["method"] = std::string(to_string(r.method));
  j["chosen_K"] = r.chosen_K;
  j["stopped_reason"] = std::string(to_string(r.stopped_reason));
  j["per_K"] = json::array();
  for (const auto& k : r.per_K) {
    json rec{ { "K", k.K }, { "feasible", k.feasible }, { "loglik", number(k.loglik) } };
    rec[r.method == SelectionMethod::fit_measure ? "fit_measure" : "cv_score"] =
      k.feasible ? number(k.score) : json(nullptr);
    if (!k.error.empty())
      rec["error"] = k.error;
    j["per_K"].push_back(std::move(rec));
  }
  return j;
}

json to_json(const BenchmarkReport& r)
{
  json j;
  j["mixture"] = std::string(to_string(r.kind));
  j["method"] = std::string(to_string(r.method));
  j[r.method == SelectionMethod::fit_measure ? "tau" : "improvement"] = r.threshold;
  j["B"] = r.B;
  j["n"] = r.n;
  j["seed"] = r.seed;
  j["correct"] = r.accuracy;
  std::size_t failed = 0;
  for (const auto& rep : r.per_replicate)
    failed += rep.error.empty() ? 0 : 1;
  j["failed"] = failed;
  j["per_replicate"] = json::array();
  for (const auto& rep : r.per_replicate) {
    json e{ { "replicate", rep.index }, { "seed", rep.seed },
            { "components", rep.components }, { "true_modes", rep.true_modes },
            { "chosen_K", rep.chosen_K }, { "correct", rep.correct } };
    if (!rep.error.empty())
      e["error"] = rep.error;
    j["per_replicate"].push_back(std::move(e));
  }
  return j;
}

KModalDensity density_from_json(const json& j)
{
  try {
    KnotVector knots;
    knots.interior = j.at("knots").get<std::vector<double>>();
    auto weights = j.at("weights").get<std::vector<double>>();
    std::vector<UnimodalPiece> pieces;
    for (const auto& pj : j.at("pieces")) {
      UnimodalPiece p;
      p.breakpoints = pj.at("breakpoints").get<std::vector<double>>();
      p.heights = pj.at("heights").get<std::vector<double>>();
      p.mode = pj.at("mode").get<double>();
      if (p.breakpoints.size() != p.heights.size() + 1 || p.heights.empty())
        throw Error(ErrorCode::parse_error, "piece breakpoints/heights mismatch");
      if (pj.contains("loglik") && pj["loglik"].is_number())
        p.loglik = pj["loglik"].get<double>();
      pieces.push_back(std::move(p));
    }
    return KModalDensity(std::move(knots), std::move(weights), std::move(pieces));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("malformed density: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::parse_error, std::string("malformed density: ") + e.what());
  }
}

std::string curve_csv(const std::vector<CurvePoint>& curve)
{
  std::ostringstream os;
  os.precision(17);
  os << "x,pdf,cdf\n";
  for (const auto& c : curve)
    os << c.x << ',' << c.pdf << ',' << c.cdf << '\n';
  return os.str();
}

std::string benchmark_csv(const BenchmarkReport& r)
{
  std::ostringstream os;
  os << "replicate,seed,components,true_modes,chosen_K,correct,error\n";
  for (const auto& rep : r.per_replicate) {
    std::string err = rep.error;
    for (char& c : err)
      if (c == ',' || c == '\n')
        c = ';';
    os << rep.index << ',' << rep.seed << ',' << rep.components << ',' << rep.true_modes << ','
       << rep.chosen_K << ',' << (rep.correct ? 1 : 0) << ',' << err << '\n';
  }
  return os.str();
}

} // namespace kmodal
