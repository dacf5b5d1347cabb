#include "manidel/atlas.hpp"
#include "manidel/complex.hpp"
#include "manidel/perturbation.hpp"
#include "manidel/report.hpp"
#include "manidel/simplex.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>

namespace py = pybind11;
using namespace manidel;

namespace {

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Simplex rows_to_simplex(const Eigen::MatrixXd& rows) {
  std::vector<Point> pts;
  for (Eigen::Index r = 0; r < rows.rows(); ++r) pts.push_back(rows.row(r).transpose());
  return Simplex::from_points(std::move(pts));
}

py::dict certify(const Atlas& a, const AlgorithmParams& params) {
  py::dict out;
  const StarMap stars = build_stars(a);
  const ConsistencyReport cons = check_star_consistency(stars, a.m);
  out["star_consistency"] = to_py(consistency_json(cons));
  out["protection"] = to_py(protection_json(protection_sweep(a, stars, params)));
  if (!cons.ok()) return out;
  const AbstractComplex c = assemble(stars, a.m);
  out["manifold"] = to_py(manifold_json(manifold_check(c)));
  out["triangles"] = c.of_dim(a.m).size();
  out["euler_characteristic"] = c.euler_characteristic();
  if (a.fixture && a.fixture->kind == "torus" && a.m == 2)
    out["torus_oracle"] = to_py(oracle_json(oracle_compare(c, torus_delaunay_oracle(a))));
  return out;
}

}  // namespace

PYBIND11_MODULE(_manidel, mod) {
  mod.doc() = "Delaunay triangulation of manifolds from coordinate patches";

  py::register_exception<Error>(mod, "ManidelError");

  mod.def("thickness", [](const Eigen::MatrixXd& rows) { return thickness(rows_to_simplex(rows)); },
          py::arg("points"));
  mod.def(
      "circumball",
      [](const Eigen::MatrixXd& rows) {
        const CircumBall b = circumcenter_radius(rows_to_simplex(rows));
        return py::make_tuple(Eigen::VectorXd(b.center), b.radius);
      },
      py::arg("points"));
  mod.def("is_gamma_good",
          [](const Eigen::MatrixXd& rows, double g) { return is_gamma_good(rows_to_simplex(rows), g); },
          py::arg("points"), py::arg("gamma0"));
  mod.def("is_flake", [](const Eigen::MatrixXd& rows, double g) { return is_flake(rows_to_simplex(rows), g); },
          py::arg("points"), py::arg("gamma0"));
  mod.def(
      "gram_min_eigenvalue",
      [](const Eigen::MatrixXd& lengths) {
        const int k = static_cast<int>(lengths.rows()) - 1;
        EdgeLengths e(k);
        for (int a = 0; a <= k; ++a)
          for (int b = a + 1; b <= k; ++b) e.set(a, b, lengths(a, b));
        const GramResult g = gram_from_edge_lengths(e);
        return py::make_tuple(g.positive_definite, g.min_eigenvalue);
      },
      py::arg("lengths"));

  py::class_<AlgorithmParams>(mod, "Params")
      .def_readonly("m", &AlgorithmParams::m)
      .def_readonly("mu0", &AlgorithmParams::mu0)
      .def_readonly("rho0", &AlgorithmParams::rho0)
      .def_readonly("rho_tilde0", &AlgorithmParams::rho_tilde0)
      .def_readonly("gamma0", &AlgorithmParams::gamma0)
      .def_readonly("delta0", &AlgorithmParams::delta0)
      .def_readonly("alpha0", &AlgorithmParams::alpha0)
      .def_readonly("alpha_tilde0", &AlgorithmParams::alpha_tilde0)
      .def_readonly("C", &AlgorithmParams::C)
      .def_readwrite("seed", &AlgorithmParams::seed)
      .def_readwrite("max_attempts", &AlgorithmParams::max_attempts)
      .def_property_readonly("certified", &AlgorithmParams::certified)
      .def("delta", &AlgorithmParams::delta, py::arg("eps"))
      .def("to_dict", [](const AlgorithmParams& p) { return to_py(params_json(p)); });

  mod.def("derive_params", [](int m, double mu0, double rho0, double xi0, double nu0) {
    return derive_params(m, mu0, rho0, xi0, nu0);
  }, py::arg("m"), py::arg("mu0"), py::arg("rho0"), py::arg("xi0") = 0.0, py::arg("nu0") = 0.0);
  mod.def("practical_params", [](int m, double mu0, double xi0, double nu0) {
    return practical_params(m, mu0, xi0, nu0);
  }, py::arg("m"), py::arg("mu0"), py::arg("xi0") = 0.0, py::arg("nu0") = 0.0);
  mod.def("derivation_constant", &derivation_constant, py::arg("m"), py::arg("mu0"));

  py::class_<Atlas>(mod, "Atlas")
      .def_static("flat_torus", &build_flat_torus, py::arg("n"), py::arg("mu0") = 0.5, py::arg("seed") = 1)
      .def_static("sphere", &build_sphere_exp, py::arg("n"), py::arg("radius") = 1.0, py::arg("mu0") = 0.5,
                  py::arg("seed") = 1)
      .def_static("from_json", &atlas_from_json, py::arg("text"))
      .def("to_json", &atlas_to_json)
      .def_readonly("m", &Atlas::m)
      .def_readonly("mu0", &Atlas::mu0)
      .def_readonly("xi0", &Atlas::xi0_declared)
      .def_property_readonly("n", &Atlas::n)
      .def("labels", &Atlas::labels)
      .def("eps", [](const Atlas& a, Label i) { return a.patch(i).eps; }, py::arg("label"))
      .def("position", [](const Atlas& a, Label i) { return Eigen::VectorXd(a.own(i)); }, py::arg("label"))
      .def(
          "validate",
          [](const Atlas& a, int jobs) {
            ValidationOptions o;
            o.jobs = jobs;
            return to_py(validation_json(validate_input(a, o)));
          },
          py::arg("jobs") = 1);

  mod.def(
      "run",
      [](Atlas& a, const AlgorithmParams& p, bool scan, int jobs) {
        RunOptions o;
        o.scan_after = scan;
        o.jobs = jobs;
        return to_py(run_report_json(run_extended(a, p, o)));
      },
      py::arg("atlas"), py::arg("params"), py::arg("scan") = true, py::arg("jobs") = 1);
  mod.def("certify", &certify, py::arg("atlas"), py::arg("params"));

  mod.def(
      "forbidden_scan",
      [](const Eigen::MatrixXd& rows, double eps_prime, double delta, double gamma0) {
        Patch p;
        p.id = 0;
        p.eps = eps_prime;
        p.origin = Point::Zero(rows.cols());
        for (Eigen::Index r = 0; r < rows.rows(); ++r) p.points[static_cast<Label>(r)] = rows.row(r).transpose();
        const Ball everything{p.origin, std::numeric_limits<double>::infinity()};
        return to_py(forbidden_json(forbidden_scan(p, everything, eps_prime, delta, gamma0)));
      },
      py::arg("points"), py::arg("eps_prime"), py::arg("delta"), py::arg("gamma0"));

  mod.def(
      "lemma_check",
      [](int k, std::int64_t trials, double xi0, std::uint64_t seed) {
        LemmaOptions o;
        o.k = k;
        o.trials = trials;
        o.xi0 = xi0;
        o.seed = seed;
        return to_py(lemma_json(check_distortion_lemmas(o)));
      },
      py::arg("k"), py::arg("trials") = 1000, py::arg("xi0") = 1e-6, py::arg("seed") = 1);
}
