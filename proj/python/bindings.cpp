/*
 * Copyright 2026 The crimepred Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "crimepred/error.hpp"
#include "crimepred/explain.hpp"
#include "crimepred/ingest.hpp"
#include "crimepred/metrics.hpp"
#include "crimepred/models.hpp"
#include "crimepred/parallel.hpp"
#include "crimepred/pipeline.hpp"
#include "crimepred/resample.hpp"
#include "crimepred/stats.hpp"

namespace py = pybind11;
using namespace crimepred;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using Labels = py::array_t<int, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw ArgumentError("expected a 2-D array");
  Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.data().begin());
  return m;
}

Array to_array(const Matrix& m) {
  Array a({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), a.mutable_data());
  return a;
}

std::vector<int> to_labels(const Labels& y) { return {y.data(), y.data() + y.size()}; }

py::array_t<double> to_vector(const std::vector<double>& v) {
  py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

py::dict shap_dict(const ShapValues& s) {
  py::dict d;
  d["base_value"] = s.base_value;
  d["prediction"] = s.prediction;
  d["phi"] = to_vector(s.phi);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the crimepred toolkit";
  m.attr("__version__") = CRIMEPRED_VERSION;

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<StageError>(m, "StageError", PyExc_RuntimeError);

  m.def("set_max_jobs", &set_max_jobs, py::arg("jobs"));
  m.def("split_train_size", &split_train_size, py::arg("n"), py::arg("ratio"));

  m.def("load_csv_summary", [](const std::filesystem::path& path, bool strict) {
    const RawTable t = load_csv(path, strict);
    py::dict d;
    d["rows"] = t.size();
    d["columns"] = t.columns.size();
    d["invalid_cells"] = t.provenance.invalid_cells;
    return d;
  }, py::arg("path"), py::arg("strict") = false);

  m.def("pearson", [](const std::vector<double>& x, const std::vector<double>& y) { return pearson(x, y); });
  m.def("spearman", [](const std::vector<double>& x, const std::vector<double>& y) { return spearman(x, y); });
  m.def("chi_square", [](const std::vector<std::vector<double>>& table) {
    const auto r = chi_square_independence(table);
    return py::make_tuple(r.statistic, r.dof, r.p_value);
  });
  m.def("mca", [](const std::vector<std::vector<std::string>>& columns, std::size_t k) {
    const McaModel model = McaModel::fit(columns, k);
    py::dict d;
    d["eigenvalues"] = to_vector(model.eigenvalues());
    d["total_inertia"] = model.total_inertia();
    d["row_coordinates"] = to_array(model.row_coordinates());
    return d;
  }, py::arg("columns"), py::arg("n_components"));

  m.def("balance", [](const Array& x, const Labels& y, std::size_t smote_k, double oversample_ratio,
                      double undersample_ratio, std::uint64_t seed) {
    LabeledData data{to_matrix(x), to_labels(y), SplitRole::kTrain};
    const ResamplePlan plan{smote_k, oversample_ratio, undersample_ratio, seed};
    const auto r = balance(data, plan);
    return py::make_tuple(to_array(r.x), py::array_t<int>(static_cast<py::ssize_t>(r.y.size()), r.y.data()));
  }, py::arg("x"), py::arg("y"), py::arg("smote_k") = 3, py::arg("oversample_ratio") = 0.5,
     py::arg("undersample_ratio") = 1.0, py::arg("seed") = 0);

  m.def("roc_auc", [](const Labels& y, const std::vector<double>& s) { return roc_auc(to_labels(y), s).auc; });
  m.def("mann_whitney_auc", [](const Labels& y, const std::vector<double>& s) {
    return mann_whitney_auc(to_labels(y), s);
  });
  m.def("precision_recall_f1", [](const Labels& y_true, const Labels& y_pred) {
    const auto r = precision_recall_f1(confusion(to_labels(y_true), to_labels(y_pred)));
    return py::make_tuple(r.precision, r.recall, r.f1);
  });

  py::class_<Model>(m, "Model")
      .def_property_readonly("kind", [](const Model& model) { return std::string(to_string(model.config.kind)); })
      .def_property_readonly("n_features", [](const Model& model) { return model.n_features; })
      .def_readonly("warnings", &Model::warnings)
      .def("predict_proba", [](const Model& model, const Array& x) { return to_vector(predict_proba(model, to_matrix(x))); })
      .def("predict_margin", [](const Model& model, const Array& x) { return to_vector(predict_margin(model, to_matrix(x))); })
      .def("predict", [](const Model& model, const Array& x) {
        const auto p = predict(model, to_matrix(x));
        return py::array_t<int>(static_cast<py::ssize_t>(p.size()), p.data());
      })
      .def("to_json", [](const Model& model) { return to_json(model).dump(); })
      .def_static("from_json", [](const std::string& s) { return model_from_json(nlohmann::json::parse(s)); });

  m.def("fit", [](const Array& x, const Labels& y, const std::string& config_json) {
    const Matrix xm = to_matrix(x);
    const auto labels = to_labels(y);
    py::gil_scoped_release release;
    return fit(xm, labels, ClassifierConfig::from_json(nlohmann::json::parse(config_json)));
  }, py::arg("x"), py::arg("y"), py::arg("config_json"));

  m.def("shap", [](const Model& model, const Array& x, const Array& background, bool exact, std::uint64_t seed) {
    const Matrix rows = to_matrix(x), bg = to_matrix(background);
    const PredictFn f = make_predict_fn(model);
    KernelShapOptions opt;
    opt.seed = seed;
    const auto values = explain_rows(f, rows, bg, exact ? ShapMethod::kExact : ShapMethod::kKernel, opt);
    py::list out;
    for (const auto& v : values) out.append(shap_dict(v));
    return out;
  }, py::arg("model"), py::arg("x"), py::arg("background"), py::arg("exact") = false, py::arg("seed") = 0);

  m.def("run_train", [](const std::string& config_json) {
    const RunConfig config = RunConfig::from_json(nlohmann::json::parse(config_json));
    TrainResult r;
    {
      py::gil_scoped_release release;
      r = run_train(config);
    }
    py::dict d;
    d["directory"] = r.directory.string();
    d["manifest"] = r.manifest.to_json().dump();
    d["report"] = r.report.to_json().dump();
    return d;
  }, py::arg("config_json"));
  m.def("run_analyze", [](const std::filesystem::path& data, const std::filesystem::path& out, bool strict) {
    py::gil_scoped_release release;
    return run_analyze(data, out, strict);
  }, py::arg("data"), py::arg("out"), py::arg("strict") = false);
  m.def("run_report", [](const std::vector<std::filesystem::path>& runs, const std::filesystem::path& out) {
    py::gil_scoped_release release;
    return run_report(runs, out);
  }, py::arg("runs"), py::arg("out"));
}
