#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "latfield/cli.hpp"
#include "latfield/gaussian.hpp"
#include "latfield/io.hpp"
#include "latfield/lamperti.hpp"
#include "latfield/noise.hpp"
#include "latfield/operators.hpp"
#include "latfield/solver.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace latfield;

namespace {

using Coords = std::vector<std::int64_t>;

MultiIndex idx(const Coords& c) { return MultiIndex(std::span<const std::int64_t>(c)); }

Coords coords(const MultiIndex& t) { return Coords(t.coords().begin(), t.coords().end()); }

Window win(const Coords& origin, const Coords& extents) { return Window(idx(origin), idx(extents)); }

py::tuple win_tuple(const Window& w) { return py::make_tuple(coords(w.origin), coords(w.extents)); }

LatticeField from_array(const Coords& origin, py::array_t<double, py::array::c_style | py::array::forcecast> a) {
  if (static_cast<std::size_t>(a.ndim()) != origin.size())
    throw LatticeError(ErrorKind::DimensionMismatch, "array rank differs from the origin length");
  Coords ext(origin.size());
  for (std::size_t l = 0; l < ext.size(); ++l) ext[l] = a.shape(static_cast<py::ssize_t>(l));
  return LatticeField(win(origin, ext), std::vector<double>(a.data(), a.data() + a.size()));
}

py::array_t<double> to_array(const LatticeField& f) {
  std::vector<py::ssize_t> shape;
  for (auto e : f.window().extents.coords()) shape.push_back(e);
  py::array_t<double> a(shape);
  std::copy(f.values().begin(), f.values().end(), a.mutable_data());
  return a;
}

}  // namespace

PYBIND11_MODULE(_latfield, m) {
  m.doc() = "Stationary lattice fields driven by fractional Brownian sheets";
  m.attr("__version__") = LATFIELD_VERSION;

  // Messages start with the error kind, e.g. "OutOfWindow: ...".
  py::register_exception<LatticeError>(m, "LatticeError", PyExc_ValueError);

  py::class_<LatticeField>(m, "LatticeField")
      .def(py::init(&from_array), "origin"_a, "values"_a)
      .def_property_readonly("origin", [](const LatticeField& f) { return coords(f.window().origin); })
      .def_property_readonly("shape", [](const LatticeField& f) { return coords(f.window().extents); })
      .def_property_readonly("values", &to_array)
      .def("get", [](const LatticeField& f, const Coords& t) { return f.get(idx(t)); })
      .def("__eq__", [](const LatticeField& a, const LatticeField& b) { return a == b; })
      .def("to_json", [](const LatticeField& f) { return io::to_json(f).dump(); })
      .def_static("from_json", [](const std::string& s) { return io::field_from_json(io::json::parse(s)); })
      .def("to_csv", [](const LatticeField& f) { return io::to_csv(f); })
      .def_static("from_csv", [](const std::string& s) { return io::field_from_csv(s); });

  py::class_<SelfSimilarField>(m, "SelfSimilarField")
      .def(py::init([](LatticeField f, std::vector<double> th) { return SelfSimilarField{std::move(f), ThetaVector(th)}; }),
           "field"_a, "theta"_a)
      .def_readonly("field", &SelfSimilarField::inner)
      .def_property_readonly("theta", [](const SelfSimilarField& y) { return y.theta.values(); });

  py::class_<NoiseField>(m, "NoiseField")
      .def(py::init([](LatticeField f, std::vector<double> th) { return NoiseField::checked(std::move(f), ThetaVector(th)); }),
           "field"_a, "theta"_a)
      .def_readonly("field", &NoiseField::inner)
      .def_property_readonly("theta", [](const NoiseField& g) { return g.theta.values(); });

  py::class_<SeriesSolution>(m, "SeriesSolution")
      .def_readonly("field", &SeriesSolution::field)
      .def_readonly("depth", &SeriesSolution::truncation_depth)
      .def_readonly("tail_bound", &SeriesSolution::tail_bound);

  m.def("translate", [](const LatticeField& f, const Coords& s) { return translate(f, idx(s)); });
  m.def("corner_signs", [](int n) {
    std::vector<std::pair<Coords, int>> out;
    for (const auto& c : corner_signs(n)) out.emplace_back(coords(c.offset), c.sign);
    return out;
  });
  m.def("square_increment", [](const LatticeField& f, const Coords& t) { return square_increment(f, idx(t)); });
  m.def("increment_field", [](const LatticeField& f) { return increment_field(f).inner; });
  m.def("previous_value", [](const LatticeField& f, const Coords& t) { return previous_value(f, idx(t)); });
  m.def("theta_inner_product", [](const std::vector<double>& th, const LatticeField& f, const Coords& t) {
    return theta_inner_product(ThetaVector(th), f, idx(t));
  });
  m.def("rectangular_increment", [](const LatticeField& f, const Coords& a, const Coords& b) {
    return rectangular_increment(f, idx(a), idx(b));
  });

  m.def("lamperti_forward", [](const LatticeField& x, const std::vector<double>& th) { return lamperti_forward(x, ThetaVector(th)); });
  m.def("lamperti_inverse", &lamperti_inverse);

  m.def("on_zero_plane", [](const Coords& t) { return on_zero_plane(idx(t)); });
  m.def("term_membership", [](const Coords& t, const Coords& j) {
    switch (term_membership(idx(t), idx(j))) {
      case Membership::PositiveBranch: return "positive";
      case Membership::NegativeBranch: return "negative";
      default: return "excluded";
    }
  });
  m.def("required_source_window", [](const Coords& origin, const Coords& extents) -> py::object {
    const auto w = required_source_window(win(origin, extents));
    return w ? py::object(win_tuple(*w)) : py::none();
  });
  m.def("construct_g", [](const SelfSimilarField& y, const Coords& origin, const Coords& extents) {
    return construct_g(y, win(origin, extents));
  });
  m.def("construct_g_oracle", [](const SelfSimilarField& y, const Coords& t) { return construct_g_oracle(y, idx(t)); });
  m.def("binomial_identity_check", &binomial_identity_check, "m"_a);
  m.def("integrate_increments", [](const LatticeField& delta, const std::vector<double>& th, const Coords& origin,
                                   const Coords& extents) {
    return integrate_increments(IncrementField{delta}, ThetaVector(th), win(origin, extents));
  });
  m.def("truncated_weighted_sum", [](const NoiseField& g, const Coords& t, int depth, const std::vector<int>& order) {
    return truncated_weighted_sum(g, idx(t), depth, order);
  }, "g"_a, "t"_a, "depth"_a, "axis_order"_a = std::vector<int>{});

  m.def("series_source_window", [](const Coords& origin, const Coords& extents, int depth) {
    return win_tuple(series_source_window(win(origin, extents), depth));
  });
  m.def("series_solve", [](const NoiseField& g, const Coords& origin, const Coords& extents, int depth) {
    return series_solve(g, win(origin, extents), depth);
  });
  m.def("recursion_residual", &recursion_residual);
  m.def("series_tail_bound", [](const std::vector<double>& th, int depth, double max_inc) {
    return series_tail_bound(ThetaVector(th), depth, max_inc);
  });
  m.def("default_depth", [](const std::vector<double>& th, double tol) { return default_depth(ThetaVector(th), tol); },
        "theta"_a, "rel_tol"_a = 1e-10);

  m.def("fbs_covariance", [](const std::vector<double>& hurst, const std::vector<double>& s, const std::vector<double>& t,
                             double v) { return fbs_covariance(GaussianSpec{hurst, v}, s, t); },
        "hurst"_a, "s"_a, "t"_a, "variance_at_one"_a = 1.0);
  m.def("extend_to_lattice", [](const std::vector<double>& hurst, const std::vector<double>& th, const Coords& origin,
                                const Coords& extents, std::uint64_t seed, std::uint64_t rep) {
    return extend_to_lattice(GaussianSpec{hurst, 1.0}, ThetaVector(th), win(origin, extents), seed, rep);
  }, "hurst"_a, "theta"_a, "origin"_a, "extents"_a, "seed"_a, "replicate"_a = 0);
  m.def("fou_first_kind", [](const std::vector<double>& hurst, const std::vector<double>& th, const Coords& origin,
                             const Coords& extents, int depth, std::uint64_t seed, std::uint64_t rep) {
    return fou_first_kind(GaussianSpec{hurst, 1.0}, ThetaVector(th), win(origin, extents), depth, seed, rep);
  }, "hurst"_a, "theta"_a, "origin"_a, "extents"_a, "depth"_a, "seed"_a, "replicate"_a = 0);
  m.def("fou_second_kind", [](const std::vector<double>& hurst, const std::vector<double>& th, const Coords& origin,
                              const Coords& extents, std::uint64_t seed, std::uint64_t rep) {
    return fou_second_kind(GaussianSpec{hurst, 1.0}, ThetaVector(th), win(origin, extents), seed, rep);
  }, "hurst"_a, "theta"_a, "origin"_a, "extents"_a, "seed"_a, "replicate"_a = 0);

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, "args"_a, "Runs the command line in-process; returns (exit_code, stdout, stderr).");
}
