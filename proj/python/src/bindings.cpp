#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rl/datasets.hpp"
#include "rl/demos.hpp"
#include "rl/params.hpp"
#include "rl/parser.hpp"
#include "rl/reasoning.hpp"
#include "rl/training.hpp"

namespace py = pybind11;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

rl::Tensor to_tensor(const Array& a) {
  rl::Shape shape(a.shape(), a.shape() + a.ndim());
  return rl::Tensor(shape, std::vector<double>(a.data(), a.data() + a.size()));
}

py::array_t<double> to_array(const rl::Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  py::array_t<double> out(shape);
  auto v = t.to_vector();
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::dict to_dict(const rl::MetricRecord& r) {
  py::dict d;
  for (const auto& [k, v] : r.fields()) d[py::str(k)] = v;
  return d;
}

py::list to_list(const rl::MetricsLog& log) {
  py::list out;
  for (const auto& r : log.records()) out.append(to_dict(r));
  return out;
}

rl::Settings to_settings(const std::map<std::string, std::string>& m) {
  return rl::Settings(m.begin(), m.end());
}

const char* kind_name(rl::QueryKind k) {
  switch (k) {
    case rl::QueryKind::Truth: return "truth";
    case rl::QueryKind::Value: return "value";
    case rl::QueryKind::GeneralizationTruth: return "generalization_truth";
    case rl::QueryKind::GeneralizationValue: return "generalization_value";
  }
  return "?";
}

}  // namespace

PYBIND11_MODULE(_impl, m) {
  m.doc() = "Differentiable first-order fuzzy logic engine";

  py::register_exception<rl::LogicError>(m, "LogicError", PyExc_ValueError);
  py::register_exception<rl::DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<rl::TrainingError>(m, "TrainingError", PyExc_RuntimeError);

  py::class_<rl::Theory>(m, "Theory")
      .def_static(
          "load",
          [](const std::string& path, const std::string& data_dir, const std::map<std::string, std::string>& overrides,
             std::optional<std::uint64_t> seed) {
            rl::BuildOptions b;
            b.data_dir = data_dir;
            b.overrides = to_settings(overrides);
            b.seed = seed;
            return rl::load_theory(path, b);
          },
          py::arg("path"), py::arg("data_dir") = "", py::arg("overrides") = std::map<std::string, std::string>{},
          py::arg("seed") = py::none())
      .def_static(
          "from_text",
          [](const std::string& text, const std::string& data_dir, const std::map<std::string, std::string>& overrides,
             std::optional<std::uint64_t> seed) {
            auto parsed = rl::parse_theory(text, "<text>", data_dir);
            rl::BuildOptions b;
            b.data_dir = data_dir;
            b.overrides = to_settings(overrides);
            b.seed = seed;
            return rl::build_theory(parsed.value(), b);
          },
          py::arg("text"), py::arg("data_dir") = "", py::arg("overrides") = std::map<std::string, std::string>{},
          py::arg("seed") = py::none())
      .def("set", &rl::Theory::apply_setting, py::arg("key"), py::arg("value"))
      .def("reinitialize", &rl::Theory::reinitialize, py::arg("seed"))
      .def_property_readonly("axiom_labels",
                             [](const rl::Theory& t) {
                               std::vector<std::string> out;
                               for (std::size_t i = 0; i < t.axioms.size(); ++i) out.push_back(t.axiom_label(i));
                               return out;
                             })
      .def_property_readonly("epochs", [](const rl::Theory& t) { return t.train.epochs; })
      .def("satisfiability", &rl::satisfiability_value)
      .def(
          "learn",
          [](rl::Theory& t) {
            rl::MetricsLog log;
            {
              py::gil_scoped_release release;
              log = rl::learn(t);
            }
            return to_list(log);
          },
          "Trains the parameters; returns one dict per epoch (epoch 0 is the initial state).")
      .def(
          "query",
          [](const rl::Theory& t, const std::string& text, const std::map<std::string, Array>& unseen,
             std::optional<double> forall_p, std::optional<double> exists_p) {
            rl::QueryOptions o;
            for (const auto& [k, v] : unseen) o.unseen[k] = to_tensor(v);
            o.forall_p = forall_p;
            o.exists_p = exists_p;
            auto r = rl::query(t, text, o);
            py::dict d;
            d["kind"] = kind_name(r.kind);
            d["axes"] = r.axes;
            d["values"] = to_array(r.values);
            return d;
          },
          py::arg("text"), py::arg("unseen") = std::map<std::string, Array>{}, py::arg("forall_p") = py::none(),
          py::arg("exists_p") = py::none())
      .def(
          "refute",
          [](const rl::Theory& t, const std::string& formula, std::optional<double> q) {
            auto phi = rl::parse_formula(formula, t.env.signature);
            rl::RefutationConfig cfg = t.refute;
            if (q) cfg.q = *q;
            rl::RefutationResult r;
            {
              py::gil_scoped_release release;
              r = rl::reason_refute(t, *phi, cfg);
            }
            py::dict d;
            d["verdict"] = rl::to_string(r.verdict);
            d["not_entailed"] = r.verdict == rl::Verdict::NotEntailed;
            d["sat"] = r.sat;
            d["phi"] = r.phi;
            d["steps"] = r.steps;
            py::dict atoms;
            for (const auto& [k, v] : r.atoms) atoms[py::str(k)] = v;
            d["atoms"] = atoms;
            d["trace"] = to_list(r.trace);
            return d;
          },
          py::arg("formula"), py::arg("q") = py::none())
      .def("params",
           [](const rl::Theory& t) {
             py::dict d;
             for (const auto& s : t.params.slots()) d[py::str(s.name)] = to_array(s.value);
             return d;
           })
      .def("save_params", [](const rl::Theory& t, const std::string& path) { rl::save_params(t.params, path); })
      .def("load_params", [](rl::Theory& t, const std::string& path) { rl::load_params(t.params, path); });

  m.def("demo_ids", &rl::demo_ids);
  m.def(
      "run_demo",
      [](const std::string& id, std::uint64_t seed, std::optional<std::size_t> epochs, const std::string& out_dir,
         const std::map<std::string, std::string>& overrides) {
        rl::DemoOptions o;
        o.seed = seed;
        o.epochs = epochs;
        o.out_dir = out_dir;
        o.overrides = to_settings(overrides);
        rl::DemoResult r;
        {
          py::gil_scoped_release release;
          r = rl::run_demo(id, o);
        }
        py::dict d;
        d["summary"] = to_dict(r.summary);
        d["log"] = to_list(r.log);
        d["out_dir"] = r.out_dir;
        d["passed"] = rl::self_check(id, r.summary).passed;
        return d;
      },
      py::arg("id"), py::arg("seed") = 0, py::arg("epochs") = py::none(), py::arg("out_dir") = "rl_out",
      py::arg("overrides") = std::map<std::string, std::string>{});
  m.def(
      "format_formula", [](const std::string& text) { return rl::pretty_print(*rl::parse_formula_syntax(text)); },
      "Parses a formula (syntax only) and prints it in canonical form.");
  m.def(
      "read_params",
      [](const std::string& path) {
        const rl::ParamStore store = rl::read_params(path);
        py::dict d;
        for (const auto& s : store.slots()) d[py::str(s.name)] = to_array(s.value);
        return d;
      },
      py::arg("path"));
}
