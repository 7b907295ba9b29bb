// pybind11 bindings for the core toolkit: phase-space primitives, the
// potential algebra, model construction, the BEN solvers and the
// verification oracles.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sben/ben.hpp"
#include "sben/models.hpp"
#include "sben/verify.hpp"

namespace py = pybind11;
using namespace sben;

namespace {

double extreal_to_py(const ExtReal& e) { return e.as_double(); }

py::dict report_to_dict(const BenReport& rep) {
  py::dict d;
  py::list gaps, diss;
  for (const auto& g : rep.step_gap) gaps.append(g.as_double());
  for (const auto& r : rep.dissipation_rate) diss.append(r.as_double());
  d["step_gap"] = gaps;
  d["dissipation_rate"] = diss;
  d["action"] = rep.action.as_double();
  d["hamiltonian_initial"] = rep.hamiltonian_initial;
  d["step_tol"] = rep.step_tol;
  d["certificate_tol"] = rep.certificate_tol;
  d["converged"] = rep.converged;
  d["certified"] = rep.certified;
  d["certificate_gap"] = rep.certificate_gap.as_double();
  d["max_step_gap"] = rep.max_step_gap();
  return d;
}

ModelSpec spec_from_kwargs(const std::string& kind, py::kwargs kw) {
  ModelSpec spec;
  static const std::map<std::string, ModelSpec::Kind> kinds = {
      {"harmonic_oscillator", ModelSpec::Kind::HarmonicOscillator},
      {"maxwell", ModelSpec::Kind::MaxwellElement},
      {"elastoplastic_oscillator", ModelSpec::Kind::ElastoplasticOscillator},
      {"bar_chain", ModelSpec::Kind::BarChain},
      {"quasistatic_bar", ModelSpec::Kind::QuasiStaticBar}};
  const auto it = kinds.find(kind);
  if (it == kinds.end()) throw std::invalid_argument("unknown model kind: " + kind);
  spec.kind = it->second;
  for (auto item : kw) {
    const std::string key = py::cast<std::string>(item.first);
    if (key == "mass") spec.mass = py::cast<double>(item.second);
    else if (key == "stiffness") spec.stiffness = py::cast<double>(item.second);
    else if (key == "viscosity") spec.viscosity = py::cast<double>(item.second);
    else if (key == "yield_stress") spec.yield_stress = py::cast<double>(item.second);
    else if (key == "density") spec.density = py::cast<double>(item.second);
    else if (key == "length") spec.length = py::cast<double>(item.second);
    else if (key == "elements") spec.elements = py::cast<int>(item.second);
    else if (key == "dof") spec.dof = py::cast<int>(item.second);
    else if (key == "load") spec.load = py::cast<LoadCurve>(item.second);
    else if (key == "displacement") spec.displacement = py::cast<LoadCurve>(item.second);
    else if (key == "initial_position") spec.initial_position = py::cast<Vector>(item.second);
    else if (key == "initial_momentum") spec.initial_momentum = py::cast<Vector>(item.second);
    else throw std::invalid_argument("unknown model option: " + key);
  }
  spec.validate();
  return spec;
}

}  // namespace

PYBIND11_MODULE(_sben, m) {
  m.doc() = "Variational solvers for dissipative Hamiltonian systems";

  py::class_<PhaseVector>(m, "PhaseVector")
      .def(py::init<Vector, Vector>(), py::arg("x"), py::arg("y"))
      .def_static("zero", &PhaseVector::zero)
      .def_static("from_flat", &PhaseVector::from_flat)
      .def_property_readonly("x", &PhaseVector::x)
      .def_property_readonly("y", &PhaseVector::y)
      .def("flat", &PhaseVector::flat)
      .def("dim", &PhaseVector::dim)
      .def("norm", &PhaseVector::norm)
      .def("__add__", [](const PhaseVector& a, const PhaseVector& b) { return a + b; })
      .def("__sub__", [](const PhaseVector& a, const PhaseVector& b) { return a - b; })
      .def("__rmul__", [](const PhaseVector& a, double s) { return s * a; })
      .def("__neg__", [](const PhaseVector& a) { return -a; });

  m.def("pairing", &pairing);
  m.def("omega", &omega);
  m.def("jmap", &jmap);
  m.def("jinv", &jinv);

  py::class_<Potential>(m, "Potential")
      .def_static("zero", &Potential::zero)
      .def_static("quadratic", &Potential::quadratic, py::arg("a"),
                  py::arg("restricted") = false)
      .def_static("quadratic_scalar", &Potential::quadratic_scalar)
      .def_static("scaled_norm", &Potential::scaled_norm)
      .def_static("indicator_ball", &Potential::indicator_ball)
      .def_static("indicator_box",
                  py::overload_cast<double, double, Eigen::Index>(
                      &Potential::indicator_box))
      .def_static("support_box", &Potential::support_box)
      .def_static("indicator_point", &Potential::indicator_point)
      .def_static("linear", &Potential::linear)
      .def_static("on_y_block", &Potential::on_y_block)
      .def("dim", &Potential::dim)
      .def("evaluate",
           [](const Potential& p, const Vector& v) {
             return extreal_to_py(p.evaluate(v));
           })
      .def("conjugate",
           [](const Potential& p, const Vector& w) {
             return extreal_to_py(p.conjugate(w));
           })
      .def("conjugate_potential", &Potential::conjugate_potential)
      .def("prox", py::overload_cast<const Vector&, double>(&Potential::prox,
                                                            py::const_));

  m.def("symplectic_polar", [](const Potential& p, const PhaseVector& z2) {
    return extreal_to_py(symplectic_polar(p, z2));
  });
  m.def("ben_gap",
        [](const Potential& p, const PhaseVector& zdot, const PhaseVector& zi) {
          return extreal_to_py(ben_gap(p, zdot, zi));
        });
  m.def("subdiff_contains", &subdiff_contains);
  m.def("symp_subdiff_contains", &symp_subdiff_contains);

  py::class_<LoadCurve>(m, "LoadCurve")
      .def_static("constant", &LoadCurve::constant)
      .def_static("piecewise_linear", &LoadCurve::piecewise_linear)
      .def_static("sinusoidal", &LoadCurve::sinusoidal, py::arg("amplitude"),
                  py::arg("angular_frequency"), py::arg("phase") = 0.0,
                  py::arg("offset") = 0.0)
      .def("value", &LoadCurve::value)
      .def("derivative", &LoadCurve::derivative);

  py::class_<HamiltonianModel>(m, "HamiltonianModel")
      .def_property_readonly("dimension",
                             [](const HamiltonianModel& h) { return h.dimension; })
      .def("evaluate",
           [](const HamiltonianModel& h, double t, const PhaseVector& z) {
             return h.evaluate(t, z);
           })
      .def("gradient",
           [](const HamiltonianModel& h, double t, const PhaseVector& z) {
             return h.gradient(t, z);
           })
      .def("symp_grad",
           [](const HamiltonianModel& h, double t, const PhaseVector& z) {
             return symp_grad_H(h, t, z);
           });

  py::class_<TimeGrid>(m, "TimeGrid")
      .def(py::init<std::vector<double>>())
      .def_static("uniform", &TimeGrid::uniform)
      .def("steps", &TimeGrid::steps)
      .def("t", &TimeGrid::t)
      .def_property_readonly("nodes", &TimeGrid::nodes);

  py::class_<Trajectory>(m, "Trajectory")
      .def(py::init<TimeGrid, std::vector<PhaseVector>>())
      .def_property_readonly("grid", &Trajectory::grid)
      .def_property_readonly("states", &Trajectory::states)
      .def("state", &Trajectory::state)
      .def("steps", &Trajectory::steps)
      .def("rate", &Trajectory::rate);

  py::class_<BuiltModel>(m, "BuiltModel")
      .def_readonly("hamiltonian", &BuiltModel::hamiltonian)
      .def_readonly("potential", &BuiltModel::potential)
      .def_readonly("initial_state", &BuiltModel::initial_state);

  py::class_<SolverOptions>(m, "SolverOptions")
      .def(py::init<>())
      .def_readwrite("step_tol_rel", &SolverOptions::step_tol_rel)
      .def_readwrite("certificate_tol_rel", &SolverOptions::certificate_tol_rel)
      .def_readwrite("max_iter", &SolverOptions::max_iter)
      .def_readwrite("max_sweeps", &SolverOptions::max_sweeps);

  m.def("build_model", &spec_from_kwargs);
  m.def("build", [](const ModelSpec& spec) { return build(spec); });
  py::class_<ModelSpec>(m, "ModelSpec");

  m.def(
      "incremental_solve",
      [](const BuiltModel& bm, const TimeGrid& grid, const SolverOptions& opts) {
        auto [traj, rep] =
            incremental_solve(bm.hamiltonian, bm.potential, bm.initial_state,
                              grid, opts);
        return py::make_tuple(traj, report_to_dict(rep));
      },
      py::arg("model"), py::arg("grid"), py::arg("options") = SolverOptions());
  m.def(
      "global_solve",
      [](const BuiltModel& bm, const TimeGrid& grid, const SolverOptions& opts) {
        auto [traj, rep] = global_solve(bm.hamiltonian, bm.potential,
                                        bm.initial_state, grid, opts);
        return py::make_tuple(traj, report_to_dict(rep));
      },
      py::arg("model"), py::arg("grid"), py::arg("options") = SolverOptions());
  m.def("make_report",
        [](const BuiltModel& bm, const Trajectory& traj, const SolverOptions& opts) {
          return report_to_dict(make_report(bm.hamiltonian, bm.potential, traj, opts));
        },
        py::arg("model"), py::arg("trajectory"),
        py::arg("options") = SolverOptions());
  m.def("conservative_flow",
        [](const BuiltModel& bm, const TimeGrid& grid) {
          return conservative_flow(bm.hamiltonian, bm.initial_state, grid);
        });
  m.def("energy_balance", [](const BuiltModel& bm, const Trajectory& traj) {
    std::vector<double> out;
    for (const ExtReal& e : energy_balance(bm.hamiltonian, bm.potential, traj))
      out.push_back(e.as_double());
    return out;
  });

  m.def("element_stresses",
        [](const ModelSpec& spec, double t, const PhaseVector& z) {
          return element_stresses(spec, t, z);
        });
  m.def("return_mapping_oracle", &return_mapping_oracle);
  m.def("brute_force_conjugate",
        [](const Potential& p, const Vector& w, double half_width, int points) {
          return brute_force_conjugate(
              p, w, GridOracle::cube(half_width, p.dim(), points));
        },
        py::arg("potential"), py::arg("w"), py::arg("half_width") = 5.0,
        py::arg("points") = 101);
  m.def("invariance_harness",
        [](const BuiltModel& bm, const TimeGrid& grid, double theta) {
          const InvarianceReport r = invariance_harness(
              bm.hamiltonian, bm.potential, bm.initial_state, grid, theta);
          py::dict d;
          d["max_deviation"] = r.max_deviation;
          d["tol"] = r.tol;
          d["pass"] = r.pass;
          return d;
        });
  m.def("quasistatic_ben_solve",
        [](const ModelSpec& spec, const TimeGrid& grid) {
          const QuasiStaticResult r = quasistatic_ben_solve(spec, grid);
          py::dict d;
          d["sigma"] = r.sigma;
          d["objective"] = r.objective;
          d["lower_bound"] = r.lower_bound;
          d["certificate"] = r.certificate;
          d["iterations"] = r.iterations;
          return d;
        });
}
