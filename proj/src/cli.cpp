#include "latfield/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <fmt/format.h>
#include <map>
#include <optional>
#include <ostream>
#include <set>

#include "latfield/gaussian.hpp"
#include "latfield/io.hpp"
#include "latfield/lamperti.hpp"
#include "latfield/noise.hpp"
#include "latfield/operators.hpp"
#include "latfield/parallel.hpp"
#include "latfield/rng.hpp"
#include "latfield/solver.hpp"
#include "latfield/stats.hpp"

namespace latfield::cli {

namespace {

using io::json;

constexpr const char* kVersion = LATFIELD_VERSION;
// Dense covariance sampling cap (points), matching a 40 x 40 window.
constexpr std::size_t kDenseCap = 1600;

[[noreturn]] void config_fail(const std::string& what) { throw LatticeError(ErrorKind::InvalidArgument, what); }

struct OptionSpec {
  const char* flag;
  const char* key;
  const char* help;
};

const std::vector<OptionSpec> kOptions = {
    {"--n", "n", "lattice dimension N"},
    {"--theta", "theta", "rate vector, comma separated (all > 0)"},
    {"--hurst", "hurst", "Hurst indices in (0,1), comma separated"},
    {"--variance", "variance_at_one", "E X^2(1,...,1) of the sheet"},
    {"--window", "window", "lo:hi per axis (hi exclusive), comma separated"},
    {"--depth", "depth", "series truncation depth M"},
    {"--seed", "seed", "64-bit seed"},
    {"--replicates", "replicates", "number of replicates"},
    {"--format", "format", "json or csv"},
    {"--out", "out", "output path (default: standard output)"},
    {"--config", "config", "JSON config, or a previous output file carrying metadata"},
    {"--threads", "threads", "worker cap (0 = all cores)"},
    {"--emit-noise", "emit_noise", "also write the driving noise to this path"},
    {"--field", "field", "solution or field file"},
    {"--noise", "noise", "noise field file"},
    {"--max-m", "max_m", "largest M for the binomial identities"},
    {"--trials", "trials", "random trials"},
    {"--max-extent", "max_extent", "largest window extent per axis in random trials"},
    {"--source", "source", "generator for the stationarity suite: fou-first, fou-second, noise, sheet"},
    {"--shift", "shift", "lattice shift, comma separated integers"},
    {"--threshold", "threshold", "|z| threshold"},
    {"--trend", "trend", "linear trend added along axis 1 (negative control)"},
    {"--input", "input", "input field file (JSON or CSV)"},
    {"--slice-axis", "slice_axis", "1-based axis to slice"},
    {"--slice-at", "slice_at", "coordinate of the slice"},
};

// Keys that steer where output goes rather than what is computed.
const std::set<std::string> kRuntimeKeys = {"out", "config", "threads", "emit_noise"};

enum class Type { Int, UInt, Real, Reals, Ints, Win, Str, Bool };

const std::map<std::string, Type> kTypes = {
    {"command", Type::Str},   {"kind", Type::Str},      {"n", Type::Int},           {"theta", Type::Reals},
    {"hurst", Type::Reals},   {"variance_at_one", Type::Real}, {"window", Type::Win}, {"depth", Type::Int},
    {"seed", Type::UInt},     {"replicates", Type::Int}, {"format", Type::Str},     {"field", Type::Str},
    {"noise", Type::Str},     {"max_m", Type::Int},      {"trials", Type::Int},     {"max_extent", Type::Int},
    {"source", Type::Str},    {"shift", Type::Ints},     {"threshold", Type::Real}, {"trend", Type::Real},
    {"input", Type::Str},     {"slice_axis", Type::Int}, {"slice_at", Type::Int},   {"summary", Type::Bool},
};

std::vector<std::string> allowed_keys(const std::string& command, const std::string& kind) {
  if (command == "simulate") {
    if (kind == "fou-first")
      return {"n", "theta", "hurst", "variance_at_one", "window", "depth", "seed", "replicates", "format"};
    if (kind == "fou-second" || kind == "noise")
      return {"n", "theta", "hurst", "variance_at_one", "window", "seed", "replicates", "format"};
    if (kind == "sheet") return {"n", "hurst", "variance_at_one", "window", "seed", "replicates", "format"};
  } else if (command == "verify") {
    if (kind == "lemma-gg" || kind == "uniqueness") return {"n", "trials", "max_extent", "seed"};
    if (kind == "recursion")
      return {"field", "noise", "n", "theta", "hurst", "variance_at_one", "window", "depth", "seed"};
    if (kind == "lamperti") return {"n", "theta", "hurst", "window", "shift", "seed", "replicates", "threshold"};
    if (kind == "stationarity")
      return {"source", "n", "theta", "hurst", "variance_at_one", "window", "depth", "seed", "replicates",
              "threshold", "trend"};
    if (kind == "binomial") return {"max_m"};
    if (kind == "membership") return {"n", "theta", "hurst", "variance_at_one", "depth", "seed"};
  } else if (command == "export") {
    return {"input", "format", "slice_axis", "slice_at", "summary"};
  }
  config_fail(fmt::format("unknown command '{}{}{}'", command, kind.empty() ? "" : " ", kind));
}

bool parse_int64(std::string_view s, std::int64_t& v) {
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size() && !s.empty();
}

json flag_value(const std::string& key, const std::string& raw) {
  const auto it = kTypes.find(key);
  if (it == kTypes.end()) return raw;
  switch (it->second) {
    case Type::Int: {
      std::int64_t v;
      if (!parse_int64(raw, v)) config_fail(fmt::format("--{} expects an integer, got '{}'", key, raw));
      return v;
    }
    case Type::UInt: {
      std::uint64_t v;
      const auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
      if (ec != std::errc() || p != raw.data() + raw.size() || raw.empty())
        config_fail(fmt::format("--{} expects a nonnegative 64-bit integer, got '{}'", key, raw));
      return v;
    }
    case Type::Real: {
      const auto v = io::parse_list(raw);
      if (v.size() != 1) config_fail(fmt::format("--{} expects one number, got '{}'", key, raw));
      return v.front();
    }
    case Type::Reals:
      return io::parse_list(raw);
    case Type::Ints: {
      json a = json::array();
      for (double d : io::parse_list(raw)) {
        if (d != std::floor(d)) config_fail(fmt::format("--{} expects integers, got '{}'", key, raw));
        a.push_back(static_cast<std::int64_t>(d));
      }
      return a;
    }
    case Type::Win:
      return io::to_json(io::parse_window(raw));
    case Type::Bool:
      return raw == "true" || raw == "1";
    case Type::Str:
      return raw;
  }
  return raw;
}

void check_type(const std::string& key, const json& v) {
  auto fail = [&](const char* what) { config_fail(fmt::format("config key \"{}\" must be {}", key, what)); };
  switch (kTypes.at(key)) {
    case Type::Int:
      if (!v.is_number_integer()) fail("an integer");
      break;
    case Type::UInt:
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        fail("a nonnegative integer");
      break;
    case Type::Real:
      if (!v.is_number()) fail("a number");
      break;
    case Type::Reals:
      if (!v.is_array() || v.empty() || !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); }))
        fail("a non-empty list of numbers");
      break;
    case Type::Ints:
      if (!v.is_array() || v.empty() ||
          !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number_integer(); }))
        fail("a non-empty list of integers");
      break;
    case Type::Win:
      (void)io::window_from_json(v);
      break;
    case Type::Str:
      if (!v.is_string()) fail("a string");
      break;
    case Type::Bool:
      if (!v.is_boolean()) fail("a boolean");
      break;
  }
}

std::vector<double> reals(const json& v) { return v.get<std::vector<double>>(); }

MultiIndex ints(const json& v) {
  const auto c = v.get<std::vector<std::int64_t>>();
  if (c.size() > static_cast<std::size_t>(kMaxDim)) config_fail("index has too many coordinates");
  return MultiIndex(std::span<const std::int64_t>(c));
}

std::vector<double> filled(int n, double v) { return std::vector<double>(static_cast<std::size_t>(n), v); }

/// Canonical config: every applicable key present, in a fixed order, defaults filled.
json resolve(const json& raw) {
  if (!raw.is_object()) config_fail("config must be a JSON object");
  if (!raw.contains("command") || !raw["command"].is_string()) config_fail("no command given");
  const std::string command = raw["command"].get<std::string>();
  const std::string kind = raw.contains("kind") && raw["kind"].is_string() ? raw["kind"].get<std::string>() : "";
  const auto keys = allowed_keys(command, kind);

  for (const auto& [k, v] : raw.items()) {
    if (k == "command" || k == "kind") continue;
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      config_fail(fmt::format("option \"{}\" does not apply to {}{}{}", k, command, kind.empty() ? "" : " ", kind));
    check_type(k, v);
  }

  json cfg;
  cfg["command"] = command;
  if (command != "export") cfg["kind"] = kind;
  auto has = [&](const char* k) { return raw.contains(k); };
  auto wants = [&](const char* k) { return std::find(keys.begin(), keys.end(), k) != keys.end(); };

  int n = 2;
  if (has("n")) {
    n = static_cast<int>(raw["n"].get<std::int64_t>());
  } else if (has("theta")) {
    n = static_cast<int>(raw["theta"].size());
  } else if (has("hurst")) {
    n = static_cast<int>(raw["hurst"].size());
  } else if (has("window")) {
    n = io::window_from_json(raw["window"]).dim();
  } else if (command == "verify" && kind == "recursion" && has("noise")) {
    n = 0;  // taken from the files
  }
  if (n != 0) check_dimension(n);

  const bool file_recursion = command == "verify" && kind == "recursion" && (has("field") || has("noise"));
  if (file_recursion) {
    if (!has("field") || !has("noise")) config_fail("verify recursion needs both --field and --noise");
    cfg["field"] = raw["field"];
    cfg["noise"] = raw["noise"];
    return cfg;
  }

  for (const auto& key : keys) {
    const char* k = key.c_str();
    if (key == "n") {
      cfg["n"] = n;
    } else if (key == "theta") {
      if (has(k)) {
        cfg[k] = raw[k];
      } else if (command == "simulate") {
        config_fail(fmt::format("simulate {} needs --theta", kind));
      } else if (kind == "recursion") {
        std::vector<double> t;
        for (int l = 0; l < n; ++l) t.push_back(0.25 + 0.15 * l);
        cfg[k] = t;
      } else {
        cfg[k] = filled(n, 1.0);
      }
      const ThetaVector th(reals(cfg[k]));
      require_same_dim(n, th.size(), "theta vs n");
    } else if (key == "hurst") {
      cfg[k] = has(k) ? raw[k] : json(filled(n, 0.5));
      require_same_dim(n, static_cast<int>(cfg[k].size()), "hurst vs n");
      GaussianSpec{reals(cfg[k]), 1.0}.validate();
    } else if (key == "variance_at_one") {
      cfg[k] = has(k) ? raw[k].get<double>() : 1.0;
      if (!(cfg[k].get<double>() > 0.0)) config_fail("variance_at_one must be positive");
    } else if (key == "window") {
      Window w;
      if (has(k)) {
        w = io::window_from_json(raw[k]);
      } else if (command == "simulate") {
        config_fail(fmt::format("simulate {} needs --window", kind));
      } else if (kind == "lamperti") {
        w = Window(MultiIndex::filled(n, -5), MultiIndex::filled(n, 10));
      } else {
        w = Window(MultiIndex::filled(n, 0), MultiIndex::filled(n, 8));
      }
      require_same_dim(n, w.dim(), "window vs n");
      for (int l = 0; l < n; ++l)
        if (w.extents[l] < 1) config_fail(fmt::format("window axis {} is empty", l + 1));
      cfg[k] = io::to_json(w);
    } else if (key == "depth") {
      std::int64_t d;
      if (has(k)) {
        d = raw[k].get<std::int64_t>();
      } else if (kind == "recursion") {
        d = 20;
      } else if (kind == "membership") {
        d = 40;
      } else {
        d = default_depth(ThetaVector(reals(cfg["theta"])));
      }
      if (d < 1) throw LatticeError(ErrorKind::NonPositiveDepth, fmt::format("depth must be >= 1, got {}", d));
      if (kind == "membership" && d < 3) config_fail("membership needs depth >= 3");
      cfg[k] = d;
    } else if (key == "seed") {
      cfg[k] = has(k) ? raw[k].get<std::uint64_t>() : std::uint64_t{0};
    } else if (key == "replicates") {
      std::int64_t r = has(k) ? raw[k].get<std::int64_t>() : (command == "simulate" ? 1 : kind == "lamperti" ? 10000 : 1000);
      if (r < 1) config_fail("replicates must be >= 1");
      cfg[k] = r;
    } else if (key == "format") {
      const std::string f = has(k) ? raw[k].get<std::string>() : "json";
      if (f != "json" && f != "csv") config_fail(fmt::format("format must be json or csv, got '{}'", f));
      cfg[k] = f;
    } else if (key == "trials") {
      const auto t = has(k) ? raw[k].get<std::int64_t>() : 20;
      if (t < 1) config_fail("trials must be >= 1");
      cfg[k] = t;
    } else if (key == "max_extent") {
      const auto e = has(k) ? raw[k].get<std::int64_t>() : 9;
      if (e < 1 || e > 12) config_fail("max_extent must lie in 1..12");
      cfg[k] = e;
    } else if (key == "max_m") {
      cfg[k] = has(k) ? raw[k].get<std::int64_t>() : 60;
      const auto m = cfg[k].get<std::int64_t>();
      if (m < 1 || m > 60)
        throw LatticeError(ErrorKind::OutOfRange, fmt::format("max_m must lie in 1..60 for exact checks, got {}", m));
    } else if (key == "source") {
      const std::string s = has(k) ? raw[k].get<std::string>() : "fou-first";
      if (s != "fou-first" && s != "fou-second" && s != "noise" && s != "sheet")
        config_fail(fmt::format("unknown source '{}'", s));
      cfg[k] = s;
    } else if (key == "shift") {
      if (has(k)) {
        cfg[k] = raw[k];
      } else {
        std::vector<std::int64_t> s(static_cast<std::size_t>(n), 0);
        s[0] = 1;
        cfg[k] = s;
      }
      require_same_dim(n, static_cast<int>(cfg[k].size()), "shift vs n");
    } else if (key == "threshold") {
      cfg[k] = has(k) ? raw[k].get<double>() : kDefaultThresholdZ;
      if (!(cfg[k].get<double>() > 0.0)) config_fail("threshold must be positive");
    } else if (key == "trend") {
      cfg[k] = has(k) ? raw[k].get<double>() : 0.0;
    } else if (key == "input") {
      if (!has(k)) config_fail("export needs --input");
      cfg[k] = raw[k];
    } else if (key == "slice_axis" || key == "slice_at") {
      if (has(k)) cfg[k] = raw[k];
    } else if (key == "summary") {
      cfg[k] = has(k) ? raw[k].get<bool>() : false;
    } else if (key == "field" || key == "noise") {
      // generated mode
    }
  }
  if (wants("slice_axis") && (cfg.contains("slice_axis") != cfg.contains("slice_at")))
    config_fail("slicing needs both --slice-axis and --slice-at");
  return cfg;
}

json metadata(const json& cfg) {
  return json{{"config", cfg}, {"generator", std::string(kGeneratorTag)}, {"version", kVersion}};
}

struct Runtime {
  std::optional<std::string> out;
  std::optional<std::string> emit_noise;
};

void emit(const Runtime& rt, std::ostream& out, const std::string& content) {
  if (rt.out) {
    io::write_file(*rt.out, content);
  } else {
    out << content;
  }
}

GaussianSpec spec_of(const json& cfg) {
  GaussianSpec s{reals(cfg["hurst"]), cfg.contains("variance_at_one") ? cfg["variance_at_one"].get<double>() : 1.0};
  s.validate();
  return s;
}

ThetaVector theta_of(const json& cfg) { return ThetaVector(reals(cfg["theta"])); }
Window window_of(const json& cfg) { return io::window_from_json(cfg["window"]); }

void require_dense_cap(const Window& w) {
  if (w.volume() > kDenseCap)
    config_fail(fmt::format("window {} has {} points; dense sampling is capped at {}", w.to_string(), w.volume(),
                            kDenseCap));
}

std::string ensemble_csv(const std::vector<LatticeField>& fields, const std::string& comment) {
  std::string s;
  for (const auto& line : {comment}) s += fmt::format("# {}\n", line);
  const int n = fields.front().dim();
  s += "replicate,";
  for (int l = 0; l < n; ++l) s += fmt::format("t{},", l + 1);
  s += "value\n";
  for (std::size_t r = 0; r < fields.size(); ++r) {
    const auto vals = fields[r].values();
    std::size_t k = 0;
    for_each_point(fields[r].window(), [&](const MultiIndex& t) {
      s += fmt::format("{},", r);
      for (int l = 0; l < n; ++l) s += fmt::format("{},", t[l]);
      s += io::format_real(vals[k++]);
      s += '\n';
    });
  }
  return s;
}

std::string render(const std::vector<json>& docs, const std::vector<LatticeField>& fields, const json& cfg,
                   const std::vector<std::string>& extra_comments = {}) {
  const json meta = metadata(cfg);
  if (cfg["format"] == "csv") {
    std::string comment = "metadata: " + meta.dump();
    for (const auto& c : extra_comments) comment += "\n" + c;
    if (fields.size() == 1) return io::to_csv(fields.front(), comment);
    return ensemble_csv(fields, comment);
  }
  json doc;
  if (docs.size() == 1) {
    doc = docs.front();
  } else {
    doc["replicates"] = docs;
  }
  doc["metadata"] = meta;
  return doc.dump() + "\n";
}

int cmd_simulate(const json& cfg, const Runtime& rt, std::ostream& out) {
  const std::string kind = cfg["kind"];
  const GaussianSpec spec = spec_of(cfg);
  const Window window = window_of(cfg);
  const std::uint64_t seed = cfg["seed"].get<std::uint64_t>();
  const auto reps = static_cast<std::size_t>(cfg["replicates"].get<std::int64_t>());
  std::vector<json> docs(reps);
  std::vector<LatticeField> fields(reps);
  std::vector<std::string> comments;

  if (kind == "fou-first") {
    const FirstKindGenerator gen(spec, theta_of(cfg), window, static_cast<int>(cfg["depth"].get<std::int64_t>()));
    std::vector<json> noise_docs(reps);
    parallel_for(reps, [&](std::size_t r) {
      auto sample = gen.draw(seed, r);
      docs[r] = io::to_json(sample.solution);
      if (rt.emit_noise) noise_docs[r] = io::to_json(sample.noise);
      fields[r] = std::move(sample.solution.field);
    });
    comments.push_back(fmt::format("depth: {}", gen.depth()));
    for (std::size_t r = 0; r < reps; ++r)
      comments.push_back(fmt::format("tail_bound[{}]: {}", r, io::format_real(docs[r]["tail_bound"].get<double>())));
    if (rt.emit_noise) {
      json nd;
      if (reps == 1) {
        nd = noise_docs.front();
      } else {
        nd["replicates"] = noise_docs;
      }
      nd["metadata"] = metadata(cfg);
      io::write_file(*rt.emit_noise, nd.dump() + "\n");
    }
  } else if (kind == "noise") {
    const NoiseGenerator gen(spec, theta_of(cfg), window);
    parallel_for(reps, [&](std::size_t r) {
      auto g = gen.draw(seed, r);
      docs[r] = io::to_json(g);
      fields[r] = std::move(g.inner);
    });
  } else if (kind == "fou-second") {
    require_dense_cap(window);
    const SecondKindGenerator gen(spec, theta_of(cfg), window);
    parallel_for(reps, [&](std::size_t r) {
      fields[r] = gen.draw(seed, r);
      docs[r] = io::to_json(fields[r]);
    });
  } else {
    require_dense_cap(window);
    const SheetGenerator gen(spec, window);
    parallel_for(reps, [&](std::size_t r) {
      fields[r] = gen.draw(seed, r);
      docs[r] = io::to_json(fields[r]);
    });
  }
  emit(rt, out, render(docs, fields, cfg, comments));
  return kExitPass;
}

// ---------------------------------------------------------------- verify

struct Property {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = true;
};

struct SuiteResult {
  std::vector<Property> properties;
  std::vector<json> reports;

  void check(std::string name, double value, double threshold) {
    properties.push_back({std::move(name), value, threshold, value <= threshold});
  }
  bool pass() const {
    return std::all_of(properties.begin(), properties.end(), [](const Property& p) { return p.pass; });
  }
};

class TrialRng {
 public:
  TrialRng(std::uint64_t seed, std::uint64_t trial) : gen_(make_stream(seed, trial, 100)) {}
  double uniform(double a, double b) { return a + (b - a) * StandardNormal::uniform(gen_); }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  double normal() { return normal_(gen_); }

 private:
  std::mt19937_64 gen_;
  StandardNormal normal_;
};

struct RandomCase {
  ThetaVector theta;
  Window window;
};

RandomCase random_case(TrialRng& rng, int n, std::int64_t max_extent) {
  std::vector<double> th;
  MultiIndex o(n), e(n);
  for (int l = 0; l < n; ++l) {
    th.push_back(rng.uniform(0.2, 2.0));
    e[l] = rng.integer(1, max_extent);
    o[l] = rng.integer(-e[l], 2);
  }
  return {ThetaVector(std::move(th)), Window(o, e)};
}

SelfSimilarField random_source(TrialRng& rng, const ThetaVector& theta, const Window& w) {
  LatticeField x = LatticeField::generate(w, [&](const MultiIndex&) { return rng.normal(); });
  return lamperti_forward(x, theta);
}

Window with_low_margin(const Window& w) {
  return Window(w.origin - MultiIndex::filled(w.dim(), 1), w.extents + MultiIndex::filled(w.dim(), 1));
}

SuiteResult suite_explicit_g(const json& cfg) {
  const int n = static_cast<int>(cfg["n"].get<std::int64_t>());
  const auto trials = cfg["trials"].get<std::int64_t>();
  const auto max_extent = cfg["max_extent"].get<std::int64_t>();
  const auto seed = cfg["seed"].get<std::uint64_t>();
  std::vector<double> identity(static_cast<std::size_t>(trials)), oracle(identity.size()), zeros(identity.size());
  parallel_for(identity.size(), [&](std::size_t k) {
    TrialRng rng(seed, k);
    const auto [theta, w] = random_case(rng, n, max_extent);
    const auto src = required_source_window(w);
    const Window ywin = src ? src->hull(with_low_margin(w)) : with_low_margin(w);
    const SelfSimilarField y = random_source(rng, theta, ywin);
    const NoiseField g = construct_g(y, w);
    double scale = std::max(1.0, g.inner.max_abs()), dev = 0.0, odev = 0.0, nz = 0.0;
    for_each_point(w, [&](const MultiIndex& t) {
      if (on_zero_plane(t) && g.inner(t) != 0.0) nz += 1.0;
      scale = std::max(scale, std::fabs(std::exp(-theta.dot(t)) * square_increment(y.inner, t)));
    });
    for_each_point(w, [&](const MultiIndex& t) {
      odev = std::max(odev, std::fabs(g.inner(t) - construct_g_oracle(y, t)) / scale);
      if (!w.contains(t - MultiIndex::filled(n, 1))) return;
      const double lhs = square_increment(g.inner, t);
      const double rhs = std::exp(-theta.dot(t)) * square_increment(y.inner, t);
      dev = std::max(dev, std::fabs(lhs - rhs) / scale);
    });
    identity[k] = dev;
    oracle[k] = odev;
    zeros[k] = nz;
  });
  SuiteResult res;
  res.check("increment_identity", *std::max_element(identity.begin(), identity.end()), 1e-10);
  res.check("zero_planes_nonzero_count", *std::max_element(zeros.begin(), zeros.end()), 0.0);
  res.check("oracle_equivalence", *std::max_element(oracle.begin(), oracle.end()), 1e-12);
  return res;
}

SuiteResult suite_uniqueness(const json& cfg) {
  const int n = static_cast<int>(cfg["n"].get<std::int64_t>());
  const auto trials = cfg["trials"].get<std::int64_t>();
  const auto max_extent = cfg["max_extent"].get<std::int64_t>();
  const auto seed = cfg["seed"].get<std::uint64_t>();
  std::vector<double> dev(static_cast<std::size_t>(trials));
  parallel_for(dev.size(), [&](std::size_t k) {
    TrialRng rng(seed, k);
    const auto [theta, w] = random_case(rng, n, max_extent);
    const auto cells = required_increment_window(w);
    if (!cells) return;  // G vanishes on w; nothing to rebuild
    const Window gwin = w.hull(with_low_margin(*cells));
    const SelfSimilarField y = random_source(rng, theta, *required_source_window(gwin));
    const NoiseField g = construct_g(y, gwin);
    const NoiseField rec = integrate_increments(increment_field(g.inner), theta, w);
    const double scale = std::max(1.0, g.inner.max_abs());
    double d = 0.0;
    for_each_point(w, [&](const MultiIndex& t) { d = std::max(d, std::fabs(rec.inner(t) - g.inner(t)) / scale); });
    dev[k] = d;
  });
  SuiteResult res;
  res.check("reconstruction", *std::max_element(dev.begin(), dev.end()), 1e-10);
  return res;
}

SuiteResult suite_recursion(const json& cfg) {
  SuiteResult res;
  if (cfg.contains("field")) {
    const json fdoc = json::parse(io::read_file(cfg["field"].get<std::string>()));
    const json ndoc = json::parse(io::read_file(cfg["noise"].get<std::string>()));
    const LatticeField x = io::field_from_json(fdoc);
    const NoiseField g = io::noise_from_json(ndoc);
    const double r = recursion_residual(x, g);
    const double bound = fdoc.contains("tail_bound") ? 3.0 * fdoc["tail_bound"].get<double>()
                                                     : 1e-9 * std::max(1.0, x.max_abs());
    res.check("recursion_residual", r, bound);
    return res;
  }
  const GaussianSpec spec = spec_of(cfg);
  const ThetaVector theta = theta_of(cfg);
  const Window w = window_of(cfg);
  const int m = static_cast<int>(cfg["depth"].get<std::int64_t>());
  const NoiseField g =
      NoiseGenerator(spec, theta, series_source_window(w, 2 * m)).draw(cfg["seed"].get<std::uint64_t>(), 0);
  const SeriesSolution x1 = series_solve(g, w, m);
  const SeriesSolution x2 = series_solve(g, w, 2 * m);
  const double r1 = recursion_residual(x1.field, g);
  const double r2 = recursion_residual(x2.field, g);
  res.check("recursion_residual_depth_M", r1, 3.0 * x1.tail_bound);
  res.check("recursion_residual_depth_2M", r2, 3.0 * x2.tail_bound);
  // Below the rounding floor the residual cannot shrink further.
  const double floor = 1e-12 * std::max(1.0, x2.field.max_abs());
  res.check("depth_doubling", r2, std::max(2.0 * std::exp(-m * theta.min_theta()) * r1, floor));
  return res;
}

SuiteResult suite_lamperti(const json& cfg) {
  const int n = static_cast<int>(cfg["n"].get<std::int64_t>());
  const ThetaVector theta = theta_of(cfg);
  const Window w = window_of(cfg);
  const auto seed = cfg["seed"].get<std::uint64_t>();
  TrialRng rng(seed, 0);
  const LatticeField x = LatticeField::generate(w, [&](const MultiIndex&) { return rng.normal(); });
  const SelfSimilarField y = lamperti_forward(x, theta);
  const LatticeField back = lamperti_inverse(y);
  double dev = 0.0, fdev = 0.0;
  const SelfSimilarField again = lamperti_forward(back, theta);
  for_each_point(w, [&](const MultiIndex& t) {
    dev = std::max(dev, std::fabs(back(t) - x(t)) / std::max(std::fabs(x(t)), 1e-300));
    fdev = std::max(fdev, std::fabs(again.inner(t) - y.inner(t)) / std::max(std::fabs(y.inner(t)), 1e-300));
  });
  SuiteResult res;
  res.check("round_trip_inverse_forward", dev, 1e-12);
  res.check("round_trip_forward_inverse", fdev, 1e-12);

  GaussianSpec spec = spec_of(cfg);
  const Window mc(MultiIndex::filled(n, -1), MultiIndex::filled(n, 3));
  const SelfSimilarSheetGenerator gen(spec, ThetaVector(filled(n, 1.0)), mc);
  std::vector<SelfSimilarField> samples(static_cast<std::size_t>(cfg["replicates"].get<std::int64_t>()));
  parallel_for(samples.size(), [&](std::size_t r) { samples[r] = gen.draw(seed, r); });
  const TestReport rep = selfsimilar_scaling_check(samples, ints(cfg["shift"]), cfg["threshold"].get<double>());
  res.check("selfsimilar_scaling_max_abs_z", rep.max_abs_z, rep.threshold);
  res.reports.push_back(io::to_json(rep));
  return res;
}

SuiteResult suite_stationarity(const json& cfg) {
  const std::string source = cfg["source"];
  const GaussianSpec spec = spec_of(cfg);
  const Window w = window_of(cfg);
  const auto seed = cfg["seed"].get<std::uint64_t>();
  const auto reps = static_cast<std::size_t>(cfg["replicates"].get<std::int64_t>());
  const double trend = cfg["trend"].get<double>();
  Ensemble e;
  if (source == "fou-first") {
    const FirstKindGenerator gen(spec, theta_of(cfg), w, static_cast<int>(cfg["depth"].get<std::int64_t>()));
    e = make_ensemble(seed, reps, [&](std::uint64_t s, std::uint64_t r) { return gen.draw(s, r).solution.field; });
  } else if (source == "fou-second") {
    require_dense_cap(w);
    const SecondKindGenerator gen(spec, theta_of(cfg), w);
    e = make_ensemble(seed, reps, [&](std::uint64_t s, std::uint64_t r) { return gen.draw(s, r); });
  } else if (source == "noise") {
    const NoiseGenerator gen(spec, theta_of(cfg), w);
    e = make_ensemble(seed, reps, [&](std::uint64_t s, std::uint64_t r) { return gen.draw(s, r).inner; });
  } else {
    require_dense_cap(w);
    const SheetGenerator gen(spec, w);
    e = make_ensemble(seed, reps, [&](std::uint64_t s, std::uint64_t r) { return gen.draw(s, r); });
  }
  if (trend != 0.0)
    for (auto& f : e.replicates)
      f = LatticeField::generate(f.window(), [&](const MultiIndex& t) { return f(t) + trend * static_cast<double>(t[0]); });
  const int n = w.dim();
  const auto shifts = default_shifts(n);
  const auto lags = default_lags(n);
  const double thr = cfg["threshold"].get<double>();
  const TestReport rep = source == "noise" ? increment_stationarity_test(e, shifts, lags, thr)
                                           : shift_invariance_test(e, shifts, lags, thr);
  SuiteResult res;
  res.check(source == "noise" ? "increment_stationarity_max_abs_z" : "shift_invariance_max_abs_z", rep.max_abs_z,
            rep.threshold);
  res.reports.push_back(io::to_json(rep));
  return res;
}

SuiteResult suite_binomial(const json& cfg) {
  const auto max_m = cfg["max_m"].get<std::int64_t>();
  double failures = 0.0;
  for (int m = 1; m <= max_m; ++m)
    if (!binomial_identity_check(m)) failures += 1.0;
  SuiteResult res;
  res.check("binomial_identity_failures", failures, 0.0);
  return res;
}

SuiteResult suite_membership(const json& cfg) {
  const int n = static_cast<int>(cfg["n"].get<std::int64_t>());
  const int m = static_cast<int>(cfg["depth"].get<std::int64_t>());
  const ThetaVector theta = theta_of(cfg);
  const Window w(MultiIndex::filled(n, -m - 1), MultiIndex::filled(n, m + 2));
  const NoiseField g = NoiseGenerator(spec_of(cfg), theta, w).draw(cfg["seed"].get<std::uint64_t>(), 0);
  std::vector<int> depths;
  for (int k = 1; k <= 8; ++k) {
    const int d = std::max(1, k * m / 8);
    if (depths.empty() || d > depths.back()) depths.push_back(d);
  }
  if (depths.size() < 3) depths = {std::max(1, m - 2), m - 1, m};
  const MembershipReport rep = class_membership_check(g, MultiIndex(n), depths);
  SuiteResult res;
  res.properties.push_back({"membership_envelope_growth", rep.envelope_growth, 10.0, rep.pass});
  json r;
  r["point"] = json(std::vector<std::int64_t>(rep.point.coords().begin(), rep.point.coords().end()));
  r["depths"] = rep.depths;
  r["partial_sums"] = rep.partial_sums;
  r["differences"] = rep.differences;
  r["fitted_rate"] = rep.fitted_rate;
  r["expected_rate"] = rep.expected_rate;
  r["envelope_growth"] = rep.envelope_growth;
  r["pass"] = rep.pass;
  res.reports.push_back(std::move(r));
  return res;
}

json safe_number(double v) { return std::isfinite(v) ? json(v) : json(v > 0 ? "inf" : "-inf"); }

int cmd_verify(const json& cfg, const Runtime& rt, std::ostream& out, std::ostream& err) {
  const std::string kind = cfg["kind"];
  SuiteResult res;
  if (kind == "lemma-gg") {
    res = suite_explicit_g(cfg);
  } else if (kind == "uniqueness") {
    res = suite_uniqueness(cfg);
  } else if (kind == "recursion") {
    res = suite_recursion(cfg);
  } else if (kind == "lamperti") {
    res = suite_lamperti(cfg);
  } else if (kind == "stationarity") {
    res = suite_stationarity(cfg);
  } else if (kind == "binomial") {
    res = suite_binomial(cfg);
  } else {
    res = suite_membership(cfg);
  }
  json doc;
  doc["suite"] = kind;
  doc["pass"] = res.pass();
  json props = json::array();
  for (const auto& p : res.properties)
    props.push_back(json{{"name", p.name}, {"value", safe_number(p.value)}, {"threshold", p.threshold}, {"pass", p.pass}});
  doc["properties"] = std::move(props);
  doc["reports"] = res.reports;
  doc["metadata"] = metadata(cfg);
  emit(rt, out, doc.dump() + "\n");
  if (rt.out) {
    out << fmt::format("verify {}: {}\n", kind, res.pass() ? "PASS" : "FAIL");
    out << fmt::format("  {:<36} {:>24} {:>24}  {}\n", "property", "value", "threshold", "result");
    for (const auto& p : res.properties)
      out << fmt::format("  {:<36} {:>24.17g} {:>24.17g}  {}\n", p.name, p.value, p.threshold,
                         p.pass ? "pass" : "FAIL");
  }
  if (res.pass()) return kExitPass;
  json failed = json::array();
  for (const auto& p : res.properties)
    if (!p.pass) failed.push_back(p.name);
  err << json{{"error", "PropertyFailure"},
              {"message", fmt::format("verify {} failed", kind)},
              {"failed", failed},
              {"exit_code", kExitPropertyFailure}}
             .dump()
      << "\n";
  return kExitPropertyFailure;
}

// ---------------------------------------------------------------- export

bool looks_like_json(const std::string& text) {
  const auto p = text.find_first_not_of(" \t\r\n");
  return p != std::string::npos && text[p] == '{';
}

int cmd_export(const json& cfg, const Runtime& rt, std::ostream& out) {
  const std::string path = cfg["input"];
  const std::string text = io::read_file(path);
  LatticeField f;
  if (looks_like_json(text)) {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::exception& e) {
      throw LatticeError(ErrorKind::ParseError, fmt::format("'{}' is not valid JSON: {}", path, e.what()));
    }
    if (doc.contains("replicates")) throw LatticeError(ErrorKind::ParseError, "export handles single fields only");
    f = io::field_from_json(doc);
  } else {
    f = io::field_from_csv(text);
  }
  if (cfg.contains("slice_axis")) {
    const auto axis = cfg["slice_axis"].get<std::int64_t>();
    if (axis < 1 || axis > f.dim())
      config_fail(fmt::format("slice axis {} outside 1..{}", axis, f.dim()));
    f = io::slice(f, static_cast<int>(axis - 1), cfg["slice_at"].get<std::int64_t>());
  }
  const bool summary = cfg["summary"].get<bool>();
  if (rt.out || !summary) {
    const json meta = metadata(cfg);
    std::string content;
    if (cfg["format"] == "csv") {
      content = io::to_csv(f, "metadata: " + meta.dump());
    } else {
      json doc = io::to_json(f);
      doc["metadata"] = meta;
      content = doc.dump() + "\n";
    }
    emit(rt, out, content);
  }
  if (summary) out << io::summary(f).dump() << "\n";
  return kExitPass;
}

// ---------------------------------------------------------------- driver

json load_config(const std::string& path) {
  const std::string text = io::read_file(path);
  if (looks_like_json(text)) {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::exception& e) {
      throw LatticeError(ErrorKind::ParseError, fmt::format("config '{}' is not valid JSON: {}", path, e.what()));
    }
    if (doc.contains("metadata") && doc["metadata"].is_object() && doc["metadata"].contains("config"))
      return doc["metadata"]["config"];
    return doc;
  }
  constexpr std::string_view tag = "# metadata: ";
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    const std::string_view line(text.data() + start, (end == std::string::npos ? text.size() : end) - start);
    if (line.substr(0, tag.size()) == tag) {
      const json meta = json::parse(line.substr(tag.size()));
      return meta.at("config");
    }
    if (end == std::string::npos) break;
    start = end + 1;
  }
  throw LatticeError(ErrorKind::ParseError, fmt::format("config '{}' has no JSON object or metadata line", path));
}

void write_error(std::ostream& err, std::string_view kind, std::string_view message, int code) {
  err << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << "\n";
}

bool is_value_flag(const std::string& s) {
  return std::any_of(kOptions.begin(), kOptions.end(), [&](const OptionSpec& o) { return s == o.flag; });
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  // Glue "--window -10:10" into "--window=-10:10" so negative values are never read as flags.
  std::vector<std::string> argv;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (is_value_flag(args[i]) && i + 1 < args.size()) {
      argv.push_back(args[i] + "=" + args[i + 1]);
      ++i;
    } else {
      argv.push_back(args[i]);
    }
  }

  CLI::App app{"Stationary, self-similar and stationary-increment random fields on Z^N", "latfield"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(0, 1);
  std::map<std::string, std::string> flags;
  bool summary = false;
  auto add_options = [&](CLI::App* sub, bool all) {
    for (const auto& o : kOptions) {
      const std::string key = o.key;
      if (!all && !kRuntimeKeys.count(key)) continue;
      sub->add_option_function<std::string>(o.flag, [&flags, key](const std::string& v) { flags[key] = v; }, o.help);
    }
    if (all) sub->add_flag_callback("--summary", [&summary] { summary = true; }, "print summary statistics");
  };
  add_options(&app, false);

  std::vector<std::pair<CLI::App*, std::string>> leaves;
  auto* sim = app.add_subcommand("simulate", "generate fields");
  sim->require_subcommand(1);
  for (const char* k : {"fou-first", "fou-second", "noise", "sheet"}) {
    auto* leaf = sim->add_subcommand(k, fmt::format("simulate {}", k));
    add_options(leaf, true);
    leaves.emplace_back(leaf, k);
  }
  auto* ver = app.add_subcommand("verify", "run a property suite");
  ver->require_subcommand(1);
  for (const char* k : {"lemma-gg", "uniqueness", "recursion", "lamperti", "stationarity", "binomial", "membership"}) {
    auto* leaf = ver->add_subcommand(k, fmt::format("verify {}", k));
    add_options(leaf, true);
    leaves.emplace_back(leaf, k);
  }
  auto* exp = app.add_subcommand("export", "convert JSON and CSV fields, slice, summarise");
  add_options(exp, true);

  try {
    std::vector<std::string> rev(argv.rbegin(), argv.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    write_error(err, "ParseError", e.what(), kExitConfig);
    return kExitConfig;
  }

  json raw = flags.count("config") ? load_config(flags.at("config")) : json::object();
  if (!raw.is_object()) config_fail("config must be a JSON object");
  std::string command, kind;
  if (exp->parsed()) {
    command = "export";
  } else {
    for (const auto& [leaf, name] : leaves)
      if (leaf->parsed()) {
        command = leaf->get_parent()->get_name();
        kind = name;
      }
  }
  if (!command.empty()) {
    raw["command"] = command;
    if (!kind.empty()) {
      raw["kind"] = kind;
    } else {
      raw.erase("kind");
    }
  } else if (!raw.contains("command")) {
    out << app.help();
    return kExitConfig;
  }
  for (const auto& [key, value] : flags) {
    if (kRuntimeKeys.count(key)) continue;
    raw[key] = flag_value(key, value);
  }
  if (summary) raw["summary"] = true;
  if (!raw.contains("format") && flags.count("out")) {
    const std::string& o = flags.at("out");
    if (o.size() >= 4 && o.compare(o.size() - 4, 4, ".csv") == 0) raw["format"] = "csv";
  }

  Runtime rt;
  if (flags.count("out")) rt.out = flags.at("out");
  if (flags.count("emit_noise")) rt.emit_noise = flags.at("emit_noise");
  if (flags.count("threads")) {
    const json t = flag_value("n", flags.at("threads"));
    if (t.get<std::int64_t>() < 0) config_fail("threads must be >= 0");
    set_thread_count(static_cast<unsigned>(t.get<std::int64_t>()));
  }

  const json cfg = resolve(raw);
  const std::string cmd = cfg["command"];
  if (rt.emit_noise && !(cmd == "simulate" && cfg["kind"] == "fou-first"))
    config_fail("--emit-noise applies to simulate fou-first only");
  if (cmd == "simulate") return cmd_simulate(cfg, rt, out);
  if (cmd == "verify") return cmd_verify(cfg, rt, out, err);
  return cmd_export(cfg, rt, out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const LatticeError& e) {
    const int code = is_config_error(e.kind()) ? kExitConfig : kExitNumerical;
    write_error(err, to_string(e.kind()), e.detail(), code);
    return code;
  } catch (const json::exception& e) {
    write_error(err, "ParseError", e.what(), kExitConfig);
    return kExitConfig;
  } catch (const std::exception& e) {
    write_error(err, "InternalError", e.what(), kExitNumerical);
    return kExitNumerical;
  }
}

}  // namespace latfield::cli
