#pragma once

#include "kmodal/synth.hpp"

#include "json.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace kmodal {

using json = nlohmann::json;

//! One numeric column: whitespace- or comma-separated values, optional
//! header line, blank lines and `#` comments ignored.
std::vector<double> read_values(std::istream& in);
std::vector<double> read_values(const std::filesystem::path& path);

struct CurvePoint
{
  double x;
  double pdf;
  double cdf;
};

//! `resolution` evenly spaced probes over the support padded by 5% each side.
std::vector<CurvePoint> density_curve(const KModalDensity& f, std::size_t resolution);

json to_json(const UnimodalPiece& p);
json to_json(const KModalDensity& f, std::size_t curve_resolution = 0);
json to_json(const FitResult& r, std::size_t curve_resolution = 0);
json to_json(const SelectionReport& r);
json to_json(const BenchmarkReport& r);

KModalDensity density_from_json(const json& j);

std::string curve_csv(const std::vector<CurvePoint>& curve);
std::string benchmark_csv(const BenchmarkReport& r);

} // namespace kmodal
