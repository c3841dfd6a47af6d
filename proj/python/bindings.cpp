// Copyright 2026 The ethsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ethsim/cli.hpp"
#include "ethsim/config.hpp"
#include "ethsim/error.hpp"
#include "ethsim/histories.hpp"
#include "ethsim/mesoscopic.hpp"
#include "ethsim/serialize.hpp"
#include "ethsim/state_analysis.hpp"

namespace py = pybind11;
using namespace ethsim;

namespace {

// Python sees operators as complex numpy arrays.
Operator op(const Matrix& m) { return Operator(m); }

std::vector<Matrix> matrices(const std::vector<Operator>& ops) {
  std::vector<Matrix> out;
  out.reserve(ops.size());
  for (const auto& o : ops) out.push_back(o.matrix());
  return out;
}

std::vector<Operator> operators(const std::vector<Matrix>& ms) {
  std::vector<Operator> out;
  out.reserve(ms.size());
  for (const auto& m : ms) out.emplace_back(m);
  return out;
}

DensityState state(const Matrix& m) { return DensityState(Operator(m)); }

PartitionOfUnity partition(const std::vector<Matrix>& projections,
                           std::optional<std::vector<std::string>> labels) {
  std::vector<std::string> l;
  if (labels) {
    l = *labels;
  } else {
    for (std::size_t i = 0; i < projections.size(); ++i) l.push_back(std::to_string(i));
  }
  return PartitionOfUnity(std::move(l), operators(projections));
}

py::dict verdict_dict(const DetectionVerdict& v) {
  py::dict d;
  d["happened"] = v.happened;
  d["admissible"] = v.admissible;
  d["time"] = v.time;
  d["step"] = v.step;
  d["family"] = v.family;
  d["distance"] = v.distance;
  d["threshold"] = v.threshold;
  d["gap"] = v.gap;
  return d;
}

struct PyFrame {
  HeisenbergFrame frame;
  std::optional<DensityState> initial;
};

// steps: [{"time": t, "propagator": U, "partitions": [{"projections": [...],
// "labels": [...]}, ...]}, ...]
PyFrame frame_from_steps(std::size_t dim, const py::list& steps) {
  std::vector<FrameStep> out;
  for (const auto& item : steps) {
    const auto s = item.cast<py::dict>();
    FrameStep f;
    f.time = s["time"].cast<double>();
    f.propagator = s.contains("propagator") ? Operator(s["propagator"].cast<Matrix>())
                                            : Operator::identity(dim);
    if (s.contains("partitions")) {
      for (const auto& p : s["partitions"].cast<py::list>()) {
        const auto pd = p.cast<py::dict>();
        std::optional<std::vector<std::string>> labels;
        if (pd.contains("labels")) labels = pd["labels"].cast<std::vector<std::string>>();
        f.partitions.push_back(partition(pd["projections"].cast<std::vector<Matrix>>(), labels));
      }
    }
    if (s.contains("restriction")) {
      f.restriction = generate_algebra(operators(s["restriction"].cast<std::vector<Matrix>>()));
    }
    out.push_back(std::move(f));
  }
  return PyFrame{HeisenbergFrame(dim, std::move(out)), std::nullopt};
}

const DensityState& initial_or(const PyFrame& f, const std::optional<Matrix>& rho) {
  if (rho) {
    static thread_local std::optional<DensityState> tmp;
    tmp.emplace(state(*rho));
    return *tmp;
  }
  if (!f.initial) throw InvalidArgument("no initial state: pass rho explicitly");
  return *f.initial;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Event detection, history measures and indirect-measurement statistics";

  // Translators run newest first, so the specific types are registered last.
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InvalidArgument& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const NumericalError& e) {
      PyErr_SetString(PyExc_ArithmeticError, e.what());
    }
  });
  py::register_exception<OutsideAlgebra>(m, "OutsideAlgebraError", PyExc_ValueError);
  py::register_exception<ZeroProbabilityBranch>(m, "ZeroProbabilityBranchError",
                                                PyExc_ArithmeticError);
  py::register_exception<InadmissibleThreshold>(m, "InadmissibleThresholdError",
                                                PyExc_ArithmeticError);

  // Operators.
  m.def("spectral_decompose", [](const Matrix& x) {
    const auto sd = spectral_decompose(op(x));
    return py::make_tuple(sd.eigenvalues, matrices(sd.projections));
  }, py::arg("x"));
  m.def("operator_norm", [](const Matrix& x) { return operator_norm(op(x)); }, py::arg("x"));
  m.def("conjugate", [](const Matrix& a, const Matrix& u) { return conjugate(op(a), op(u)).matrix(); },
        py::arg("a"), py::arg("u"));

  // Algebras.
  py::class_<FiniteAlgebra>(m, "Algebra")
      .def_static("full", &FiniteAlgebra::full, py::arg("dim"))
      .def_static("scalars", &FiniteAlgebra::scalars, py::arg("dim"))
      .def_property_readonly("dim", &FiniteAlgebra::dim)
      .def_property_readonly("basis", [](const FiniteAlgebra& a) { return matrices(a.basis()); })
      .def("__len__", &FiniteAlgebra::size)
      .def("is_abelian", [](const FiniteAlgebra& a) { return a.is_abelian(); })
      .def("residual", [](const FiniteAlgebra& a, const Matrix& x) { return a.residual(op(x)); })
      .def("project", [](const FiniteAlgebra& a, const Matrix& x) { return a.project(op(x)).matrix(); })
      .def("contains", [](const FiniteAlgebra& a, const Matrix& x) {
        const auto r = contains(a, op(x));
        return py::make_tuple(r.member, r.residual);
      });
  m.def("generate_algebra", [](const std::vector<Matrix>& gens) {
    return generate_algebra(operators(gens));
  }, py::arg("generators"));
  m.def("commutant", &commutant, py::arg("a"));
  m.def("center", &center, py::arg("a"));
  m.def("intersection", &intersection, py::arg("a"), py::arg("b"));
  m.def("is_maximal_abelian", [](const FiniteAlgebra& a, const FiniteAlgebra& ambient) {
    return is_maximal_abelian(a, ambient);
  }, py::arg("a"), py::arg("ambient"));
  m.def("minimal_projections", [](const FiniteAlgebra& z) { return matrices(minimal_projections(z)); },
        py::arg("z"));

  // State analysis.
  m.def("centralizer", [](const FiniteAlgebra& ambient, const Matrix& rho) {
    auto r = centralizer(ambient, state(rho));
    return py::make_tuple(std::move(r.centralizer), std::move(r.center));
  }, py::arg("ambient"), py::arg("rho"));
  m.def("expect_onto_centralizer", [](const FiniteAlgebra& ambient, const Matrix& rho, const Matrix& a) {
    return expect_onto_centralizer(ambient, state(rho), op(a)).matrix();
  }, py::arg("ambient"), py::arg("rho"), py::arg("a"));
  m.def("expect_onto_center", [](const FiniteAlgebra& ambient, const Matrix& rho, const Matrix& a) {
    return expect_onto_center(ambient, state(rho), op(a)).value.matrix();
  }, py::arg("ambient"), py::arg("rho"), py::arg("a"));
  m.def("incoherence_defect", [](const FiniteAlgebra& ambient, const Matrix& rho,
                                 const std::vector<Matrix>& projections, const Matrix& a,
                                 const std::string& route) {
    if (route != "center" && route != "centralizer") {
      throw InvalidArgument("route must be 'center' or 'centralizer'");
    }
    const auto r = incoherence_defect(ambient, state(rho), partition(projections, std::nullopt), op(a),
                                      route == "center" ? DefectRoute::kCenter : DefectRoute::kCentralizer);
    py::dict d;
    d["lhs"] = r.lhs;
    d["bound"] = r.bound;
    d["delta_prime"] = r.delta_prime;
    d["holds"] = r.holds;
    return d;
  }, py::arg("ambient"), py::arg("rho"), py::arg("projections"), py::arg("a"),
     py::arg("route") = "center");

  // Events.
  m.def("admissible_threshold", [](const Matrix& rho, const std::vector<Matrix>& projections, double safety) {
    return admissible_threshold(state(rho), partition(projections, std::nullopt), safety);
  }, py::arg("rho"), py::arg("projections"), py::arg("safety") = kDefaultSafety);
  m.def("detect_event", [](const FiniteAlgebra& ambient, const Matrix& rho,
                           const std::vector<Matrix>& projections, double safety) {
    return verdict_dict(detect_event(StateAnalysis(ambient, state(rho)),
                                     partition(projections, std::nullopt), safety));
  }, py::arg("ambient"), py::arg("rho"), py::arg("projections"), py::arg("safety") = kDefaultSafety);
  m.def("born_probabilities", [](const Matrix& rho, const std::vector<Matrix>& projections) {
    std::vector<double> p;
    for (const auto& [label, w] : born_probabilities(state(rho), partition(projections, std::nullopt))) {
      p.push_back(w);
    }
    return p;
  }, py::arg("rho"), py::arg("projections"));
  m.def("collapse", [](const Matrix& rho, const Matrix& projection) {
    return collapse(state(rho), op(projection)).matrix().matrix();
  }, py::arg("rho"), py::arg("projection"));
  m.def("unrecorded_update", [](const Matrix& rho, const std::vector<Matrix>& projections) {
    return unrecorded_update(state(rho), partition(projections, std::nullopt)).matrix().matrix();
  }, py::arg("rho"), py::arg("projections"));

  // Frames and history measures.
  py::class_<PyFrame>(m, "Frame")
      .def(py::init(&frame_from_steps), py::arg("dim"), py::arg("steps"))
      .def_static("from_config", [](const std::string& path) {
        auto cfg = load_config(path);
        auto* fm = std::get_if<FrameModel>(&cfg.model);
        if (!fm) throw InvalidArgument("config does not describe a frame model");
        return PyFrame{std::move(fm->frame), std::move(fm->initial)};
      }, py::arg("path"))
      .def_property_readonly("dim", [](const PyFrame& f) { return f.frame.dim(); })
      .def("__len__", [](const PyFrame& f) { return f.frame.size(); })
      .def_property_readonly("initial_state", [](const PyFrame& f) -> std::optional<Matrix> {
        if (!f.initial) return std::nullopt;
        return f.initial->matrix().matrix();
      })
      .def("earliest_event", [](const PyFrame& f, std::optional<Matrix> rho, double safety) {
        const auto e = earliest_event(f.frame, initial_or(f, rho), safety);
        py::dict d;
        d["t_min"] = e.t_min ? py::cast(f.frame.time(*e.t_min)) : py::none();
        d["t_star"] = e.t_star ? py::cast(f.frame.time(*e.t_star)) : py::none();
        return d;
      }, py::arg("rho") = py::none(), py::arg("safety") = kDefaultSafety)
      .def("lsw", [](const PyFrame& f, const std::vector<std::string>& labels, std::optional<Matrix> rho) {
        const auto& r = initial_or(f, rho);
        return lsw_probability(f.frame, r, MeasurementProtocol::from_labels(f.frame, labels));
      }, py::arg("labels"), py::arg("rho") = py::none())
      .def("consistency", [](const PyFrame& f, std::size_t n, std::optional<Matrix> rho) {
        const auto r = consistency_check(f.frame, initial_or(f, rho), n);
        py::dict d;
        d["leaves"] = r.leaves;
        d["max_prefix_residual"] = r.max_prefix_residual;
        d["normalization_residual"] = r.normalization_residual;
        return d;
      }, py::arg("n"), py::arg("rho") = py::none())
      .def("sampler_vs_measure", [](const PyFrame& f, std::size_t n, std::uint64_t samples,
                                    std::uint64_t seed, std::optional<Matrix> rho) {
        const auto& r = initial_or(f, rho);
        py::gil_scoped_release release;
        return sampler_vs_measure(f.frame, r, n, samples, seed).total_variation;
      }, py::arg("n"), py::arg("samples"), py::arg("seed") = 0, py::arg("rho") = py::none());

  // Mixture models.
  py::class_<DeFinettiModel>(m, "DeFinettiModel")
      .def(py::init<std::vector<double>, std::vector<double>, double>(), py::arg("weights"),
           py::arg("p_plus"), py::arg("tau") = 1.0)
      .def_property_readonly("weights", &DeFinettiModel::weights)
      .def_property_readonly("p_plus", &DeFinettiModel::p_plus)
      .def_property_readonly("tau", &DeFinettiModel::tau)
      .def_property_readonly("kappa", &DeFinettiModel::kappa)
      .def("protocol_probability", [](const DeFinettiModel& md, const std::vector<std::int8_t>& c) {
        return exact_protocol_probability(md, c);
      }, py::arg("clicks"))
      .def("posterior", [](const DeFinettiModel& md, const std::vector<std::int8_t>& c) {
        const auto p = posterior(md, c);
        return py::make_tuple(p.weights, p.entropy_bits);
      }, py::arg("clicks"))
      .def("relative_entropy", [](const DeFinettiModel& md, std::size_t a, std::size_t b) {
        return relative_entropy(md, a, b);
      }, py::arg("nu1"), py::arg("nu2"))
      .def("sample", [](const DeFinettiModel& md, std::size_t n, std::size_t count, std::uint64_t seed) {
        py::list out;
        for (auto& s : sample_protocols(md, n, count, seed)) out.append(py::make_tuple(s.nu, s.clicks));
        return out;
      }, py::arg("n"), py::arg("count"), py::arg("seed") = 0)
      .def("band_mass", [](const DeFinettiModel& md, std::size_t band, std::size_t truth, std::size_t n,
                           double eps) { return band_mass(md, band, truth, n, eps); },
           py::arg("nu_band"), py::arg("nu_true"), py::arg("n"), py::arg("epsilon"))
      .def("born_rule", [](const DeFinettiModel& md, std::size_t n, std::size_t count, std::uint64_t seed,
                           double exponent) {
        BornRuleResult r;
        {
          py::gil_scoped_release release;
          r = born_rule_experiment(md, BandSchedule{exponent, 1.0}, n, count, seed);
        }
        py::dict d;
        d["epsilon"] = r.epsilon;
        d["coverage"] = r.coverage;
        d["exact_coverage"] = r.exact_coverage;
        std::vector<double> emp, ex;
        for (const auto& row : r.rows) {
          emp.push_back(row.empirical);
          ex.push_back(row.exact);
        }
        d["empirical"] = emp;
        d["exact"] = ex;
        return d;
      }, py::arg("n"), py::arg("count"), py::arg("seed") = 0, py::arg("exponent") = 1.0 / 3.0)
      .def("detection_time", [](const DeFinettiModel& md) {
        const auto dt = detection_time(md);
        py::dict d;
        d["sigma_min_bits"] = dt.sigma_min_bits;
        d["time"] = dt.time;
        d["n_star"] = dt.n_star ? py::cast(*dt.n_star) : py::none();
        d["calibration"] = dt.calibration;
        return d;
      })
      .def("sanov", [](const DeFinettiModel& md, std::size_t nu1, std::size_t nu2,
                       const std::vector<std::size_t>& ns, double exponent) {
        const auto r = sanov_check(md, nu1, nu2, BandSchedule{exponent, 1.0}, ns);
        py::dict d;
        d["reference_exponent"] = r.reference_exponent;
        d["prefactor"] = r.prefactor;
        d["holds"] = r.holds;
        py::list rows;
        for (const auto& row : r.rows) {
          py::dict x;
          x["n"] = row.n;
          x["epsilon"] = row.epsilon;
          x["band_mass"] = row.band_mass;
          x["empirical_exponent"] = row.empirical_exponent;
          x["band_kl_exponent"] = row.band_kl_exponent;
          rows.append(x);
        }
        d["rows"] = rows;
        return d;
      }, py::arg("nu1"), py::arg("nu2"), py::arg("n_values"), py::arg("exponent") = 0.45)
      .def("realization", [](const DeFinettiModel& md, std::size_t n) {
        auto r = commuting_realization(md, n);
        return PyFrame{std::move(r.frame), std::move(r.state)};
      }, py::arg("n"));

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release release;
      code = cli::run(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"));
}
