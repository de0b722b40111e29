#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "rejectsvm/errors.hpp"
#include "rejectsvm/evaluate.hpp"
#include "rejectsvm/io.hpp"
#include "rejectsvm/train.hpp"

namespace py = pybind11;
using namespace rsvm;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& x) {
  if (x.ndim() != 2) throw StructuralError("expected a 2-D array of rows");
  Matrix m(static_cast<std::size_t>(x.shape(0)), static_cast<std::size_t>(x.shape(1)));
  std::copy(x.data(), x.data() + x.size(), m.data().begin());
  return m;
}

std::vector<int> to_labels(const py::array_t<int, py::array::c_style | py::array::forcecast>& y) {
  if (y.ndim() != 1) throw StructuralError("labels must be a 1-D array");
  return {y.data(), y.data() + y.size()};
}

Array to_array(const std::vector<double>& v) { return Array(static_cast<py::ssize_t>(v.size()), v.data()); }

Array to_array(const Matrix& m) {
  Array out({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

CostParams make_cost(double d, std::optional<double> tau) { return tau ? CostParams(d, *tau) : CostParams(d); }

py::dict risk_dict(const RiskReport& r) {
  py::dict out;
  out["n_eval"] = r.n_eval;
  out["phi_risk"] = r.phi_risk;
  out["ell_risk"] = r.ell_risk;
  out["misclass_rate"] = r.misclass_rate;
  out["reject_rate"] = r.reject_rate;
  return out;
}

py::dict term_dict(const BoundTerm& t) {
  py::dict out;
  out["gamma"] = t.gamma;
  out["empirical"] = t.empirical;
  out["penalty"] = t.penalty;
  out["value"] = t.value;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "l1-penalized generalized-hinge classifier with a reject option";

  py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_RuntimeError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);

  py::class_<CostParams>(m, "CostParams")
      .def(py::init(&make_cost), py::arg("d"), py::arg("tau") = py::none())
      .def_property_readonly("d", &CostParams::d)
      .def_property_readonly("a", &CostParams::a)
      .def_property_readonly("tau", &CostParams::tau);

  m.def("gen_hinge", py::overload_cast<double, double>(&gen_hinge), py::arg("z"), py::arg("a"));
  m.def("reject_loss", [](double z, double d, double tau) { return reject_loss(z, DecisionRule{d, tau}); },
        py::arg("z"), py::arg("d"), py::arg("tau"));
  m.def("bayes_rule", py::overload_cast<double, double>(&bayes_rule), py::arg("eta"), py::arg("d"));

  py::class_<Dictionary>(m, "Dictionary")
      .def_static("linear", &Dictionary::linear, py::arg("dim"))
      .def_static("constant_linear", &Dictionary::constant_linear, py::arg("dim"))
      .def_static("constant", &Dictionary::constant, py::arg("dim"))
      .def_static("rbf_lattice", &Dictionary::rbf_lattice, py::arg("counts"), py::arg("lower"), py::arg("upper"),
                  py::arg("beta") = 2.0)
      .def_static("custom_rbf", [](const Array& centers, double beta) {
            return Dictionary::custom_rbf(to_matrix(centers), beta);
          }, py::arg("centers"), py::arg("beta") = 2.0)
      .def_static("from_spec", [](const std::string& spec, const Array& x) {
            return parse_dictionary_spec(spec, to_matrix(x));
          }, py::arg("spec"), py::arg("x"))
      .def_property_readonly("size", &Dictionary::size)
      .def_property_readonly("input_dim", &Dictionary::input_dim)
      .def_property_readonly("sup_norm", [](const Dictionary& d) { return d.sup_norm().value; })
      .def("evaluate", [](const Dictionary& d, const Array& x) { return to_array(d.evaluate(to_matrix(x)).phi); },
           py::arg("x"));

  py::class_<Model>(m, "Model")
      .def_property_readonly("coef", [](const Model& md) { return to_array(md.lambda); })
      .def_property_readonly("dictionary", [](const Model& md) { return md.dict; })
      .def_property_readonly("cost", [](const Model& md) { return md.cp; })
      .def_property_readonly("r", [](const Model& md) { return md.r; })
      .def_property_readonly("objective", [](const Model& md) { return md.meta.objective; })
      .def_property_readonly("l1", &Model::l1)
      .def_property_readonly("support_size", &Model::support_size)
      .def("margins", [](const Model& md, const Array& x) { return to_array(md.margins(to_matrix(x))); },
           py::arg("x"))
      .def("predict", [](const Model& md, const Array& x) {
            const std::vector<double> f = md.margins(to_matrix(x));
            py::array_t<int> out(static_cast<py::ssize_t>(f.size()));
            for (std::size_t i = 0; i < f.size(); ++i) out.mutable_at(static_cast<py::ssize_t>(i)) = decide(f[i], md.cp.tau());
            return out;
          }, py::arg("x"))
      .def("save", [](const Model& md, const std::string& path) { save_model(path, md); }, py::arg("path"))
      .def_static("load", [](const std::string& path) { return load_model(path); }, py::arg("path"));

  m.def("fit", [](const Dictionary& dict, const Array& x, const py::array_t<int, py::array::c_style | py::array::forcecast>& y,
                  double d, double r, std::optional<double> tau) {
          const DesignMatrix dm = dict.evaluate(to_matrix(x), to_labels(y));
          py::gil_scoped_release release;
          return fit(dict, dm, make_cost(d, tau), r);
        },
        py::arg("dictionary"), py::arg("x"), py::arg("y"), py::arg("d"), py::arg("r"), py::arg("tau") = py::none());

  m.def("cross_validate", [](const Dictionary& dict, const Array& x,
                             const py::array_t<int, py::array::c_style | py::array::forcecast>& y, double d,
                             std::vector<double> r_grid, std::size_t folds, std::uint64_t seed, std::optional<double> tau) {
          const DesignMatrix dm = dict.evaluate(to_matrix(x), to_labels(y));
          CvResult cv;
          {
            py::gil_scoped_release release;
            cv = cross_validate(dm, make_cost(d, tau), r_grid, folds, seed);
          }
          py::list table;
          for (const CvRow& row : cv.table) table.append(py::make_tuple(row.r, row.mean_ell, row.fold_se));
          return py::make_tuple(cv.best_r, table);
        },
        py::arg("dictionary"), py::arg("x"), py::arg("y"), py::arg("d"), py::arg("r_grid"), py::arg("folds") = 10,
        py::arg("seed") = 0, py::arg("tau") = py::none());

  m.def("risk_report", [](const Model& md, const Array& x,
                          const py::array_t<int, py::array::c_style | py::array::forcecast>& y) {
          return risk_dict(risk_report(md, to_matrix(x), to_labels(y)));
        },
        py::arg("model"), py::arg("x"), py::arg("y"));

  m.def("bounds", [](const Model& md, const Array& x, const py::array_t<int, py::array::c_style | py::array::forcecast>& y,
                     double delta, double p) {
          const BoundReport b = bounds(md, to_matrix(x), to_labels(y), default_gamma_grid(), delta, p);
          py::dict out;
          out["misclass"] = term_dict(b.misclass);
          out["reject"] = term_dict(b.reject);
          out["tail"] = b.tail;
          out["l1"] = b.l1;
          return out;
        },
        py::arg("model"), py::arg("x"), py::arg("y"), py::arg("delta") = 0.05, py::arg("p") = 1.0);

  m.def("theoretical_r", [](std::size_t n, std::size_t mm, double c_f, double d, double delta, double p) {
          return theoretical_r(n, mm, c_f, CostParams(d), delta, p);
        },
        py::arg("n"), py::arg("m"), py::arg("c_f"), py::arg("d"), py::arg("delta"), py::arg("p") = 1.0);
  m.def("rate_r", &rate_r, py::arg("gamma"), py::arg("n"), py::arg("m"), py::arg("c_f"), py::arg("delta"),
        py::arg("p") = 1.0);
  m.def("log_grid", &log_grid, py::arg("lo"), py::arg("hi"), py::arg("count"));
}
