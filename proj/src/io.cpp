#include "latfield/io.hpp"

#include <algorithm>
#include <charconv>
#include <fmt/format.h>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace latfield::io {

namespace {

[[noreturn]] void parse_fail(const std::string& what) { throw LatticeError(ErrorKind::ParseError, what); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

bool parse_int(std::string_view s, std::int64_t& v) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size() && !s.empty();
}

bool parse_double(std::string_view s, double& v) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size() && !s.empty();
}

MultiIndex index_from_json(const json& j, const char* what) {
  if (!j.is_array()) parse_fail(fmt::format("\"{}\" must be an array of integers", what));
  std::vector<std::int64_t> c;
  for (const auto& x : j) {
    if (!x.is_number_integer()) parse_fail(fmt::format("\"{}\" must contain integers only", what));
    c.push_back(x.get<std::int64_t>());
  }
  if (c.empty() || c.size() > static_cast<std::size_t>(kMaxDim))
    parse_fail(fmt::format("\"{}\" must have between 1 and {} entries", what, kMaxDim));
  return MultiIndex(std::span<const std::int64_t>(c));
}

json index_to_json(const MultiIndex& t) {
  json a = json::array();
  for (auto c : t.coords()) a.push_back(c);
  return a;
}

}  // namespace

std::string format_real(double v) { return fmt::format("{:.17g}", v); }

json to_json(const Window& w) { return json{{"origin", index_to_json(w.origin)}, {"extents", index_to_json(w.extents)}}; }

json to_json(const LatticeField& f) {
  json j;
  j["n"] = f.dim();
  j["origin"] = index_to_json(f.window().origin);
  j["extents"] = index_to_json(f.window().extents);
  j["values"] = json(std::vector<double>(f.values().begin(), f.values().end()));
  return j;
}

json to_json(const NoiseField& g) {
  json j = to_json(g.inner);
  j["theta"] = g.theta.values();
  return j;
}

json to_json(const SeriesSolution& s) {
  return json{{"field", to_json(s.field)}, {"depth", s.truncation_depth}, {"tail_bound", s.tail_bound}};
}

json to_json(const TestReport& r) {
  json details = json::array();
  for (const auto& d : r.details) {
    details.push_back(json{{"statistic", d.statistic},
                           {"point", index_to_json(d.point)},
                           {"shift", index_to_json(d.shift)},
                           {"lag", index_to_json(d.lag)},
                           {"z", std::isfinite(d.z) ? json(d.z) : json(d.z > 0 ? "inf" : "-inf")}});
  }
  return json{{"statistic_name", r.statistic_name},
              {"max_abs_z", std::isfinite(r.max_abs_z) ? json(r.max_abs_z) : json("inf")},
              {"threshold", r.threshold},
              {"pass", r.pass},
              {"comparisons", r.details.size()},
              {"details", std::move(details)}};
}

Window window_from_json(const json& j) {
  if (j.is_string()) return parse_window(j.get<std::string>());
  if (!j.is_object() || !j.contains("origin") || !j.contains("extents"))
    parse_fail("window must be \"lo:hi,...\" or {\"origin\":[...],\"extents\":[...]}");
  const MultiIndex o = index_from_json(j["origin"], "origin");
  const MultiIndex e = index_from_json(j["extents"], "extents");
  require_same_dim(o.size(), e.size(), "window origin vs extents");
  return Window(o, e);
}

LatticeField field_from_json(const json& j) {
  if (!j.is_object()) parse_fail("field document must be a JSON object");
  if (j.contains("field") && j["field"].is_object()) return field_from_json(j["field"]);
  for (const char* key : {"n", "origin", "extents", "values"})
    if (!j.contains(key)) parse_fail(fmt::format("field object lacks \"{}\"", key));
  if (!j["n"].is_number_integer()) parse_fail("\"n\" must be an integer");
  const int n = j["n"].get<int>();
  const Window w = window_from_json(j);
  if (w.dim() != n) parse_fail(fmt::format("\"n\" = {} disagrees with origin of dimension {}", n, w.dim()));
  const auto& vals = j["values"];
  if (!vals.is_array()) parse_fail("\"values\" must be an array");
  std::vector<double> v;
  v.reserve(vals.size());
  for (const auto& x : vals) {
    if (!x.is_number()) parse_fail("\"values\" must contain numbers only");
    v.push_back(x.get<double>());
  }
  return LatticeField(w, std::move(v));
}

NoiseField noise_from_json(const json& j) {
  if (!j.is_object() || !j.contains("theta")) parse_fail("noise field lacks \"theta\"");
  std::vector<double> th;
  for (const auto& x : j["theta"]) {
    if (!x.is_number()) parse_fail("\"theta\" must contain numbers only");
    th.push_back(x.get<double>());
  }
  return NoiseField::checked(field_from_json(j), ThetaVector(std::move(th)));
}

std::string to_csv(const LatticeField& f, std::string_view comment) {
  std::string out;
  if (!comment.empty()) {
    for (auto line : split(comment, '\n')) out += fmt::format("# {}\n", line);
  }
  const int n = f.dim();
  for (int l = 0; l < n; ++l) out += fmt::format("t{},", l + 1);
  out += "value\n";
  const auto vals = f.values();
  std::size_t k = 0;
  for_each_point(f.window(), [&](const MultiIndex& t) {
    for (int l = 0; l < n; ++l) out += fmt::format("{},", t[l]);
    out += format_real(vals[k++]);
    out += '\n';
  });
  return out;
}

LatticeField field_from_csv(std::string_view text) {
  std::vector<std::pair<MultiIndex, double>> rows;
  int n = -1;
  std::size_t line_no = 0;
  bool header_allowed = true;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto cols = split(line, ',');
    std::vector<std::int64_t> coords;
    double value = 0.0;
    bool numeric = cols.size() >= 2 && parse_double(cols.back(), value);
    for (std::size_t c = 0; numeric && c + 1 < cols.size(); ++c) {
      std::int64_t v;
      if (!parse_int(cols[c], v)) numeric = false;
      coords.push_back(v);
    }
    if (!numeric) {
      if (header_allowed) {
        header_allowed = false;
        continue;
      }
      parse_fail(fmt::format("CSV line {} is not \"t1,...,tN,value\"", line_no));
    }
    header_allowed = false;
    const int dim = static_cast<int>(coords.size());
    if (n < 0) {
      if (dim < 1 || dim > kMaxDim) parse_fail(fmt::format("CSV line {} has {} coordinates", line_no, dim));
      n = dim;
    } else if (dim != n) {
      parse_fail(fmt::format("CSV line {} has {} coordinates, expected {}", line_no, dim, n));
    }
    rows.emplace_back(MultiIndex(std::span<const std::int64_t>(coords)), value);
  }
  if (rows.empty()) parse_fail("CSV contains no data rows");
  MultiIndex lo = rows.front().first, hi = rows.front().first;
  for (const auto& [t, v] : rows)
    for (int l = 0; l < n; ++l) {
      lo[l] = std::min(lo[l], t[l]);
      hi[l] = std::max(hi[l], t[l]);
    }
  const Window w = Window::from_bounds(lo, hi + MultiIndex::filled(n, 1));
  if (w.volume() != rows.size())
    parse_fail(fmt::format("CSV rows ({}) do not fill the window {} ({} points)", rows.size(), w.to_string(),
                           w.volume()));
  std::vector<double> vals(w.volume());
  std::vector<char> seen(w.volume(), 0);
  for (const auto& [t, v] : rows) {
    const auto k = w.offset_of(t);
    if (seen[k]) parse_fail(fmt::format("CSV repeats point {}", t.to_string()));
    seen[k] = 1;
    vals[k] = v;
  }
  return LatticeField(w, std::move(vals));
}

LatticeField slice(const LatticeField& f, int axis, std::int64_t at) {
  const int n = f.dim();
  if (n < 2) throw LatticeError(ErrorKind::InvalidArgument, "slicing needs a field of dimension >= 2");
  if (axis < 0 || axis >= n)
    throw LatticeError(ErrorKind::InvalidArgument, fmt::format("slice axis {} outside 1..{}", axis + 1, n));
  const Window& w = f.window();
  if (at < w.lo()[axis] || at >= w.hi()[axis])
    throw LatticeError(ErrorKind::OutOfWindow,
                       fmt::format("t_{} = {} is outside {}", axis + 1, at, w.to_string()));
  MultiIndex o(n - 1), e(n - 1);
  for (int l = 0, k = 0; l < n; ++l) {
    if (l == axis) continue;
    o[k] = w.origin[l];
    e[k] = w.extents[l];
    ++k;
  }
  const Window sw(o, e);
  return LatticeField::generate(sw, [&](const MultiIndex& s) {
    MultiIndex t(n);
    for (int l = 0, k = 0; l < n; ++l) t[l] = l == axis ? at : s[k++];
    return f(t);
  });
}

json summary(const LatticeField& f) {
  const auto v = f.values();
  CompensatedSum sum;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double x : v) {
    sum.add(x);
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  const double count = static_cast<double>(v.size());
  const double mean = v.empty() ? 0.0 : sum.value() / count;
  CompensatedSum sq;
  for (double x : v) sq.add((x - mean) * (x - mean));
  json j;
  j["count"] = v.size();
  j["mean"] = mean;
  j["variance"] = v.size() > 1 ? sq.value() / (count - 1.0) : 0.0;
  j["min"] = v.empty() ? 0.0 : lo;
  j["max"] = v.empty() ? 0.0 : hi;
  j["max_abs"] = f.max_abs();
  return j;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) parse_fail(fmt::format("cannot open '{}'", p.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, std::string_view content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw LatticeError(ErrorKind::InvalidArgument, fmt::format("cannot write '{}'", p.string()));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw LatticeError(ErrorKind::InvalidArgument, fmt::format("short write to '{}'", p.string()));
}

Window parse_window(std::string_view spec) {
  const auto axes = split(trim(spec), ',');
  if (axes.empty() || axes.size() > static_cast<std::size_t>(kMaxDim))
    parse_fail(fmt::format("window '{}' must list 1 to {} axes", spec, kMaxDim));
  const int n = static_cast<int>(axes.size());
  MultiIndex lo(n), hi(n);
  for (int l = 0; l < n; ++l) {
    const auto parts = split(axes[static_cast<std::size_t>(l)], ':');
    if (parts.size() != 2 || !parse_int(parts[0], lo[l]) || !parse_int(parts[1], hi[l]))
      parse_fail(fmt::format("window axis '{}' is not lo:hi", axes[static_cast<std::size_t>(l)]));
    if (hi[l] <= lo[l])
      throw LatticeError(ErrorKind::InvalidArgument,
                         fmt::format("window axis {} is empty: {}:{} (hi is exclusive)", l + 1, lo[l], hi[l]));
  }
  return Window::from_bounds(lo, hi);
}

std::string format_window(const Window& w) {
  std::string s;
  for (int l = 0; l < w.dim(); ++l) {
    if (l) s += ',';
    s += fmt::format("{}:{}", w.lo()[l], w.hi()[l]);
  }
  return s;
}

std::vector<double> parse_list(std::string_view spec) {
  std::vector<double> out;
  for (auto part : split(trim(spec), ',')) {
    double v;
    if (!parse_double(part, v)) parse_fail(fmt::format("'{}' is not a number in list '{}'", part, spec));
    out.push_back(v);
  }
  return out;
}

}  // namespace latfield::io
