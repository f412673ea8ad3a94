#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "latfield/lattice.hpp"
#include "latfield/noise.hpp"
#include "latfield/solver.hpp"
#include "latfield/stats.hpp"

namespace latfield::io {

using json = nlohmann::ordered_json;

/// {"n":N,"origin":[...],"extents":[...],"values":[row-major]}
json to_json(const LatticeField& f);
/// Field object plus "theta".
json to_json(const NoiseField& g);
/// {"field":{...},"depth":M,"tail_bound":...}
json to_json(const SeriesSolution& s);
json to_json(const TestReport& r);
json to_json(const Window& w);

/// Accepts a plain field object, a NoiseField object, or a SeriesSolution wrapper
/// (the "field" member is used). Throws ParseError describing the first problem.
LatticeField field_from_json(const json& j);
/// Requires "theta"; validates the zero planes.
NoiseField noise_from_json(const json& j);
Window window_from_json(const json& j);

/// One row per lattice point, "t1,...,tN,value", values with 17 significant digits.
/// `comment` lines are emitted first, each prefixed with "# ".
std::string to_csv(const LatticeField& f, std::string_view comment = {});
/// Skips blank lines and lines starting with '#', and an optional header row. The
/// points must fill a rectangular window exactly once each.
LatticeField field_from_csv(std::string_view text);

/// The (N-1)-dimensional field {t : t_axis = at}. Needs N >= 2.
LatticeField slice(const LatticeField& f, int axis, std::int64_t at);

/// count, mean, variance (n-1), min, max, max_abs.
json summary(const LatticeField& f);

/// Whole-file read; throws ParseError when the file cannot be opened.
std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, std::string_view content);

/// Parses "lo:hi,lo:hi,..." (inclusive-exclusive per axis).
Window parse_window(std::string_view spec);
std::string format_window(const Window& w);
/// Parses "a,b,c" into doubles.
std::vector<double> parse_list(std::string_view spec);

/// "%.17g": enough digits for an exact round trip.
std::string format_real(double v);

}  // namespace latfield::io
