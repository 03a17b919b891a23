// Python module over the core library. Results that are large records come
// back as plain dicts through their JSON form.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "stlsynth/error.hpp"
#include "stlsynth/render.hpp"
#include "stlsynth/scenario.hpp"

namespace py = pybind11;
using namespace stlsynth;

namespace {

py::object to_python(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json from_python(const py::object& o) {
  return Json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

py::list polygon_list(const Polygon& poly) {
  py::list out;
  for (const auto& p : poly) out.append(py::make_tuple(p.x(), p.y()));
  return out;
}

stl::SampledTrajectory sampled(const std::vector<double>& times, const MatrixXd& states) {
  if (static_cast<Eigen::Index>(times.size()) != states.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "one state row per time sample expected");
  }
  stl::SampledTrajectory tr;
  tr.times = times;
  for (Eigen::Index i = 0; i < states.rows(); ++i) tr.states.push_back(states.row(i).transpose());
  return tr;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Reach-tube control synthesis from signal temporal logic specifications";

  static py::exception<Error> error_type(m, "StlsynthError");
  // args are (message, kind, stage)
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::tuple args = py::make_tuple(e.what(), std::string(to_string(e.kind())), e.stage());
      PyErr_SetObject(error_type.ptr(), args.ptr());
    }
  });

  py::class_<Box>(m, "Box")
      .def(py::init<VectorXd, VectorXd>(), py::arg("lower"), py::arg("upper"))
      .def_readwrite("lower", &Box::lower)
      .def_readwrite("upper", &Box::upper)
      .def("contains", &Box::contains, py::arg("point"), py::arg("tol") = 0.0)
      .def("__repr__", [](const Box& b) { return "Box(" + box_to_json(b).dump() + ")"; });

  py::class_<Zonotope>(m, "Zonotope")
      .def(py::init<VectorXd, MatrixXd>(), py::arg("center"), py::arg("generators"))
      .def_readwrite("center", &Zonotope::center)
      .def_readwrite("generators", &Zonotope::generators);

  py::class_<CZ>(m, "ConstrainedZonotope")
      .def(py::init<VectorXd, MatrixXd>(), py::arg("center"), py::arg("generators"))
      .def(py::init<VectorXd, MatrixXd, MatrixXd, VectorXd>(), py::arg("center"),
           py::arg("generators"), py::arg("A"), py::arg("b"))
      .def(py::init<const Zonotope&>())
      .def(py::init<const Box&>())
      .def_readwrite("center", &CZ::center)
      .def_readwrite("generators", &CZ::generators)
      .def_readwrite("A", &CZ::A)
      .def_readwrite("b", &CZ::b)
      .def("to_dict", [](const CZ& y) { return to_python(cz_to_json(y)); });
  py::implicitly_convertible<Zonotope, CZ>();
  py::implicitly_convertible<Box, CZ>();

  m.def("is_empty", [](const CZ& y) { return is_empty(y); }, py::arg("set"));
  m.def("contains_point", [](const CZ& y, const VectorXd& z, double tol) { return contains_point(y, z, tol); },
        py::arg("set"), py::arg("point"), py::arg("tol") = kSetTol);
  m.def("volume", [](const CZ& y) { return volume(y); }, py::arg("set"));
  m.def("expand", [](const CZ& y, double eps) { return expand(y, eps); }, py::arg("set"), py::arg("eps"));
  m.def("intersect", &intersect, py::arg("a"), py::arg("b"));
  m.def("interval_hull", [](const CZ& y) { return interval_hull(y); }, py::arg("set"));
  m.def("vertices_2d", [](const CZ& y) { return polygon_list(vertices_2d(y)); }, py::arg("set"),
        "Counter-clockwise vertices of a planar set as (x, y) tuples.");

  m.def(
      "discretize",
      [](const MatrixXd& a, const MatrixXd& b, const MatrixXd& c, double dt) {
        LinearSystem sys;
        sys.A = a;
        sys.B = b;
        sys.C = c;
        const DiscreteModel d = discretize(sys, dt);
        return py::make_tuple(d.Ad, d.Bd, d.Ed);
      },
      py::arg("A"), py::arg("B"), py::arg("C"), py::arg("dt"),
      "Zero-order-hold matrices (Ad, Bd, Ed).");
  m.def(
      "dare",
      [](const MatrixXd& ad, const MatrixXd& bd, const VectorXd& q, const VectorXd& r) {
        const auto d = optim::dare(ad, bd, optim::LqrWeights{q, r});
        return py::make_tuple(d.P, d.K);
      },
      py::arg("Ad"), py::arg("Bd"), py::arg("q"), py::arg("r"),
      "Stabilizing solution (P, K) for diagonal weights q and r; u = -K x.");

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("name", &Scenario::name)
      .def_readwrite("formula", &Scenario::formula)
      .def_readwrite("seed", &Scenario::seed)
      .def_readwrite("realizations", &Scenario::realizations)
      .def_property_readonly("workspace", &Scenario::workspace)
      .def_readonly("obstacles", &Scenario::obstacles)
      .def("to_dict", [](const Scenario& s) { return to_python(scenario_to_json(s)); });

  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def(
      "scenario_from_dict", [](const py::object& o) { return scenario_from_json(from_python(o)); },
      py::arg("data"));

  m.def(
      "partition",
      [](const Scenario& s) {
        const Partition p = build_partition(s.partition);
        py::list out;
        for (std::size_t i = 0; i < p.cells.size(); ++i) out.append(py::make_tuple(p.labels[i], p.cells[i]));
        return out;
      },
      py::arg("scenario"), "Cells as (label, set) pairs; filled gaps come last.");

  m.def(
      "run",
      [](const Scenario& s, int threads, const std::optional<std::filesystem::path>& out) {
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_pipeline(s, threads);
          if (out) write_artifacts(*out, s, r);
        }
        return to_python(result_to_json(s, r));
      },
      py::arg("scenario"), py::arg("threads") = 1, py::arg("out") = py::none(),
      "Full pipeline; returns the result record and optionally writes the artifacts.");

  m.def(
      "monitor",
      [](const Scenario& s, const std::vector<double>& times, const MatrixXd& states,
         const std::optional<std::string>& formula) {
        stl::RegionTable regions = s.region_table();
        const auto f = stl::parse(formula.value_or(s.formula), &regions);
        const auto res = stl::monitor(f, sampled(times, states), regions);
        return py::make_tuple(res.satisfied, res.witness);
      },
      py::arg("scenario"), py::arg("times"), py::arg("states"), py::arg("formula") = py::none(),
      "Verdict and witness time on samples; states has one row per time.");

  m.def(
      "render_svg", [](const py::object& scene, int width) { return render_svg(scene_from_json(from_python(scene)), width); },
      py::arg("scene"), py::arg("width") = 640, "SVG document for the 'scene' entry of a result record.");
}
