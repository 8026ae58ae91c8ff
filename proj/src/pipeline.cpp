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

#include "crimepred/pipeline.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "crimepred/csv.hpp"
#include "crimepred/ingest.hpp"
#include "crimepred/stats.hpp"

namespace crimepred {
namespace fs = std::filesystem;
namespace {

void check_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) throw ArgumentError(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || a == key;
    if (!ok) throw ArgumentError("unknown key \"" + key + "\" in " + where);
  }
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ArgumentError(std::string("invalid value for \"") + key + "\"");
  }
}

std::string pretty(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("invalid JSON in " + path.string() + ": " + e.what());
  }
}

// Collects artifacts in a hidden sibling directory and moves it into place
// only when the whole run succeeded.
class StagedOutput {
 public:
  explicit StagedOutput(fs::path target) : target_(std::move(target)) {
    if (target_.empty()) throw ArgumentError("no output directory given");
    if (target_.filename().empty()) target_ = target_.parent_path();
    staging_ = target_.parent_path() / ("." + target_.filename().string() + ".staging");
    fs::remove_all(staging_);
    fs::create_directories(staging_);
  }
  StagedOutput(const StagedOutput&) = delete;
  StagedOutput& operator=(const StagedOutput&) = delete;
  ~StagedOutput() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(staging_, ec);
    }
  }

  void write(const std::string& key, const std::string& file, const std::string& text) {
    write_text(staging_ / file, text);
    artifacts_[key] = file;
  }

  const std::map<std::string, std::string>& artifacts() const { return artifacts_; }

  void commit() {
    if (fs::exists(target_)) {
      const bool replaceable = fs::is_directory(target_) &&
                               (fs::is_empty(target_) || fs::exists(target_ / "manifest.json") ||
                                fs::exists(target_ / "analysis.json") || fs::exists(target_ / "report.json"));
      if (!replaceable) throw Error("refusing to replace " + target_.string() + ": not a crimepred output directory");
      fs::remove_all(target_);
    }
    fs::rename(staging_, target_);
    committed_ = true;
  }

  const fs::path& target() const { return target_; }

 private:
  fs::path target_;
  fs::path staging_;
  std::map<std::string, std::string> artifacts_;
  bool committed_ = false;
};

class StageRunner {
 public:
  template <typename F>
  auto operator()(const std::string& stage, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<std::invoke_result_t<F>>) {
        body();
        record(stage, start);
      } else {
        auto out = body();
        record(stage, start);
        return out;
      }
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(stage, e.what());
    }
  }

  const std::vector<std::pair<std::string, double>>& timings() const { return timings_; }

 private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point start) {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    timings_.emplace_back(stage, dt.count());
  }
  std::vector<std::pair<std::string, double>> timings_;
};

std::string_view method_name(ShapMethod m) { return m == ShapMethod::kExact ? "exact" : "kernel"; }

ShapMethod shap_method_from_string(std::string_view s) {
  if (s == "kernel") return ShapMethod::kKernel;
  if (s == "exact") return ShapMethod::kExact;
  throw ArgumentError("unknown explanation method: " + std::string(s));
}

nlohmann::json grid_json(const ParamGrid& g) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, values] : g.axes) j[name] = values;
  return j;
}

nlohmann::json space_json(const ParamSpace& s) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& d : s.dims) {
    switch (d.type) {
      case ParamDimension::Type::kReal: j[d.name] = {d.lo, d.hi}; break;
      case ParamDimension::Type::kInteger: j[d.name] = {{"int", {d.lo, d.hi}}}; break;
      case ParamDimension::Type::kChoice: j[d.name] = d.choices; break;
    }
  }
  return j;
}

std::vector<int> take(std::span<const int> y, std::span<const std::size_t> idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(y[i]);
  return out;
}

struct Prepared {
  EncodedMatrix train;
  EncodedMatrix test;
  std::vector<int> y_train;
  std::vector<int> y_test;
  nlohmann::json info;
};

RawTable prepare_table(const RawTable& table, const std::vector<Column>& keep, std::vector<int>& labels,
                       std::size_t& excluded) {
  RawTable t = zero_coordinate_to_missing(derive_temporal(table));
  TargetVector target = make_target(t);
  excluded = target.excluded;
  labels = std::move(target.labels);
  t = select_rows(t, target.kept_rows);
  return drop_leakage_features(t, keep);
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

fs::path resolve_data_path(const std::string& configured) {
  if (!configured.empty()) return configured;
  if (const char* dir = std::getenv(kDataDirEnv); dir && *dir) return fs::path(dir) / kDefaultDataFile;
  throw ArgumentError(std::string("no data path given and ") + kDataDirEnv + " is not set");
}

std::size_t RunConfig::effective_sample_size(std::size_t available) const {
  std::size_t n = sample_size == 0 ? available : sample_size;
  if (row_cap > 0) n = std::min(n, row_cap);
  return n;
}

std::vector<std::string> RunConfig::techniques() const {
  std::vector<std::string> out;
  if (tuning.method == "grid") out.push_back("Grid Search");
  if (tuning.method == "bayes") out.push_back("Bayesian Optimisation Search");
  if (resample) out.push_back("SMOTE");
  return out;
}

std::vector<std::string> RunConfig::feature_names() const {
  std::vector<std::string> out;
  for (const auto& f : features) out.push_back(f.name);
  return out;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  check_keys(j, {"schema_version", "name", "data", "seed", "split_ratio", "sample_size", "row_cap", "strict", "model",
                 "features", "scale", "impute", "resample", "tuning", "explain", "output"},
             "run config");
  const int version = get_or<int>(j, "schema_version", kRunConfigSchemaVersion);
  if (version != kRunConfigSchemaVersion) {
    throw ArgumentError("unsupported run config schema_version " + std::to_string(version));
  }
  RunConfig c;
  c.name = get_or<std::string>(j, "name", "");
  c.data = get_or<std::string>(j, "data", "");
  c.seed = get_or<std::uint64_t>(j, "seed", 0);
  c.split_ratio = get_or<double>(j, "split_ratio", 0.8);
  if (!(c.split_ratio > 0.0 && c.split_ratio < 1.0)) throw ArgumentError("split_ratio must lie in (0, 1)");
  c.sample_size = get_or<std::size_t>(j, "sample_size", 0);
  c.row_cap = get_or<std::size_t>(j, "row_cap", 0);
  c.strict = get_or<bool>(j, "strict", false);
  c.output = get_or<std::string>(j, "output", "");
  c.scale = scale_mode_from_string(get_or<std::string>(j, "scale", "numeric"));

  if (!j.contains("model")) throw ArgumentError("run config needs a \"model\" block");
  check_keys(j.at("model"), {"kind", "params"}, "model");
  c.model = ClassifierConfig::from_json(j.at("model"));
  c.model.seed = derive_seed(c.seed, 5);

  if (!j.contains("features") || !j.at("features").is_array() || j.at("features").empty()) {
    throw ArgumentError("run config needs a non-empty \"features\" list");
  }
  std::set<std::string> seen;
  for (const auto& f : j.at("features")) {
    FeatureSpec spec;
    if (f.is_string()) {
      spec = default_feature_spec(f.get<std::string>(), c.scale != ScaleMode::kNone);
    } else {
      check_keys(f, {"name", "kind", "transform"}, "feature entry");
      spec = default_feature_spec(f.at("name").get<std::string>(), c.scale != ScaleMode::kNone);
      if (f.contains("kind")) spec.kind = feature_kind_from_string(f.at("kind").get<std::string>());
      if (f.contains("transform")) spec.transform = transform_from_string(f.at("transform").get<std::string>());
    }
    spec.validate();
    if (!seen.insert(spec.name).second) throw ArgumentError("feature listed twice: " + spec.name);
    c.features.push_back(std::move(spec));
  }

  if (j.contains("impute")) {
    const auto& im = j.at("impute");
    check_keys(im, {"k", "max_donors"}, "impute");
    c.impute.k = get_or<std::size_t>(im, "k", 5);
    c.impute.max_donors = get_or<std::size_t>(im, "max_donors", 20000);
    if (c.impute.k == 0 || c.impute.max_donors == 0) throw ArgumentError("impute k and max_donors must be positive");
  }

  if (j.contains("resample") && !j.at("resample").is_null()) {
    const auto& r = j.at("resample");
    check_keys(r, {"smote_k", "oversample_ratio", "undersample_ratio"}, "resample");
    ResamplePlan plan;
    plan.smote_k = get_or<std::size_t>(r, "smote_k", plan.smote_k);
    plan.oversample_ratio = get_or<double>(r, "oversample_ratio", plan.oversample_ratio);
    plan.undersample_ratio = get_or<double>(r, "undersample_ratio", plan.undersample_ratio);
    plan.seed = derive_seed(c.seed, 4);
    plan.validate();
    c.resample = plan;
  }

  if (j.contains("tuning")) {
    const auto& t = j.at("tuning");
    check_keys(t, {"method", "folds", "grid", "space", "n_iter", "max_rows"}, "tuning");
    c.tuning.method = get_or<std::string>(t, "method", "none");
    c.tuning.folds = get_or<std::size_t>(t, "folds", 5);
    c.tuning.n_iter = get_or<std::size_t>(t, "n_iter", 25);
    c.tuning.max_rows = get_or<std::size_t>(t, "max_rows", 0);
    if (c.tuning.method == "grid") {
      if (!t.contains("grid")) throw ArgumentError("grid tuning needs a \"grid\" block");
      c.tuning.grid = ParamGrid::from_json(t.at("grid"));
    } else if (c.tuning.method == "bayes") {
      if (!t.contains("space")) throw ArgumentError("bayes tuning needs a \"space\" block");
      c.tuning.space = ParamSpace::from_json(t.at("space"));
      if (c.tuning.n_iter < 5) throw ArgumentError("bayes tuning needs n_iter >= 5");
    } else if (c.tuning.method != "none") {
      throw ArgumentError("unknown tuning method: " + c.tuning.method);
    }
    if (c.tuning.folds < 2) throw ArgumentError("tuning needs at least 2 folds");
    // Every searched parameter must exist for the model kind.
    ClassifierConfig probe = c.model;
    for (const auto& [name, values] : c.tuning.grid.axes) probe.set_param(name, values.front());
    for (const auto& d : c.tuning.space.dims) probe.set_param(d.name, d.decode(0.5));
  }

  if (j.contains("explain")) {
    const auto& e = j.at("explain");
    check_keys(e, {"enabled", "method", "instances", "background", "n_coalitions", "output"}, "explain");
    c.explain.enabled = get_or<bool>(e, "enabled", true);
    c.explain.method = shap_method_from_string(get_or<std::string>(e, "method", "kernel"));
    c.explain.instances = get_or<std::size_t>(e, "instances", 500);
    c.explain.background = get_or<std::size_t>(e, "background", 100);
    c.explain.n_coalitions = get_or<std::size_t>(e, "n_coalitions", 0);
    c.explain.output = output_space_from_string(get_or<std::string>(e, "output", "probability"));
    if (c.explain.enabled && (c.explain.instances == 0 || c.explain.background == 0)) {
      throw ArgumentError("explain instances and background must be positive");
    }
  }
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  const nlohmann::json j = read_json(path);
  return from_json(j);
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json feats = nlohmann::json::array();
  for (const auto& f : features) {
    feats.push_back({{"name", f.name}, {"kind", to_string(f.kind)}, {"transform", to_string(f.transform)}});
  }
  nlohmann::json j = {
      {"schema_version", kRunConfigSchemaVersion},
      {"name", name},
      {"data", data},
      {"seed", seed},
      {"split_ratio", split_ratio},
      {"sample_size", sample_size},
      {"row_cap", row_cap},
      {"strict", strict},
      {"model", {{"kind", to_string(model.kind)}, {"params", model.params_json()}}},
      {"features", std::move(feats)},
      {"scale", to_string(scale)},
      {"impute", {{"k", impute.k}, {"max_donors", impute.max_donors}}},
      {"resample", resample ? nlohmann::json({{"smote_k", resample->smote_k},
                                             {"oversample_ratio", resample->oversample_ratio},
                                             {"undersample_ratio", resample->undersample_ratio}})
                            : nlohmann::json(nullptr)},
      {"tuning",
       {{"method", tuning.method},
        {"folds", tuning.folds},
        {"grid", grid_json(tuning.grid)},
        {"space", space_json(tuning.space)},
        {"n_iter", tuning.n_iter},
        {"max_rows", tuning.max_rows}}},
      {"explain",
       {{"enabled", explain.enabled},
        {"method", method_name(explain.method)},
        {"instances", explain.instances},
        {"background", explain.background},
        {"n_coalitions", explain.n_coalitions},
        {"output", to_string(explain.output)}}},
      {"output", output}};
  return j;
}

std::string RunConfig::hash() const {
  nlohmann::json j = to_json();
  j.erase("name");
  j.erase("output");
  return sha256_hex(j.dump());
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json timing = nlohmann::json::array();
  for (const auto& [stage, seconds] : timings) timing.push_back({{"stage", stage}, {"seconds", seconds}});
  return {{"schema_version", 1},
          {"library_version", library_version},
          {"config_hash", config_hash},
          {"artifacts", artifacts},
          {"timings", std::move(timing)},
          {"warnings", warnings}};
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  m.library_version = j.at("library_version").get<std::string>();
  m.config_hash = j.at("config_hash").get<std::string>();
  m.artifacts = j.at("artifacts").get<std::map<std::string, std::string>>();
  for (const auto& t : j.at("timings")) m.timings.emplace_back(t.at("stage").get<std::string>(), t.at("seconds").get<double>());
  m.warnings = j.at("warnings").get<std::vector<std::string>>();
  return m;
}

TrainResult run_train(const RunConfig& config) {
  StageRunner stage;
  std::vector<std::string> warnings;
  const std::uint64_t seed = config.seed;

  std::optional<StagedOutput> staged;
  const fs::path data_path = stage("config", [&] {
    if (config.output.empty()) throw ArgumentError("no output directory given");
    fs::path path = resolve_data_path(config.data);
    staged.emplace(config.output);
    return path;
  });
  StagedOutput& out = *staged;

  const RawTable table = stage("load", [&] {
    RawTable t = load_csv(data_path, config.strict);
    if (t.size() == 0) throw Error("no data rows in " + data_path.string());
    if (t.provenance.invalid_cells > 0) {
      warnings.push_back(std::to_string(t.provenance.invalid_cells) + " unparseable cells treated as missing");
    }
    return t;
  });

  const SplitPair halves = stage("split", [&] { return split(shuffle(table, seed), config.split_ratio, seed); });

  const std::size_t n_used = config.effective_sample_size(table.size());
  const std::size_t n_train = split_train_size(n_used, config.split_ratio);
  const std::size_t n_test = n_used - n_train;
  const auto [train_raw, test_raw] = stage("sample", [&] {
    if (n_used > table.size()) {
      throw ArgumentError("sample size " + std::to_string(n_used) + " exceeds the " + std::to_string(table.size()) +
                          " available rows");
    }
    return std::make_pair(sample(halves.train, n_train, derive_seed(seed, 1)),
                          sample(halves.test, n_test, derive_seed(seed, 2)));
  });

  Prepared prep = stage("preprocess", [&] {
    std::vector<Column> keep;
    for (const auto& f : config.features) {
      const auto col = column_from_name(f.name);
      if (!col) continue;
      for (Column leak : leakage_columns()) {
        if (leak == *col) {
          keep.push_back(leak);
          warnings.push_back("feature " + f.name + " is a leakage column and is kept because the config asks for it");
        }
      }
    }
    Prepared p;
    std::size_t excluded_train = 0, excluded_test = 0;
    const RawTable train = prepare_table(train_raw, keep, p.y_train, excluded_train);
    const RawTable test = prepare_table(test_raw, keep, p.y_test, excluded_test);
    const FeatureEncoder encoder = FeatureEncoder::fit(train, config.features, config.scale);
    p.train = encoder.transform(train);
    p.test = encoder.transform(test);

    nlohmann::json impute_info = nullptr;
    if (p.train.missing_cells() > 0 || p.test.missing_cells() > 0) {
      EncodedMatrix donors = p.train;
      donors.values = sample_rows(p.train.values, config.impute.max_donors, derive_seed(seed, 3));
      ImputeReport report_train, report_test;
      p.train = knn_impute(p.train, donors, config.impute.k, &report_train);
      p.test = knn_impute(p.test, donors, config.impute.k, &report_test);
      for (const auto* r : {&report_train, &report_test}) {
        warnings.insert(warnings.end(), r->warnings.begin(), r->warnings.end());
      }
      impute_info = {{"k", config.impute.k},
                     {"donors", donors.values.rows()},
                     {"train_imputed_cells", report_train.imputed_cells},
                     {"test_imputed_cells", report_test.imputed_cells}};
    }
    p.info = {{"train_rows", train.size()},
              {"test_rows", test.size()},
              {"excluded_without_target", excluded_train + excluded_test},
              {"train_positive", count_classes(p.y_train).positive},
              {"test_positive", count_classes(p.y_test).positive},
              {"columns", p.train.column_names()},
              {"unseen_in_test", p.test.unseen_counts},
              {"encoder", encoder.to_json()},
              {"impute", impute_info}};
    return p;
  });

  LabeledData train{prep.train.values, prep.y_train, SplitRole::kTrain};
  nlohmann::json balance_info = nullptr;
  if (config.resample) {
    stage("balance", [&] {
      ResampleResult r = balance(train, *config.resample);
      warnings.insert(warnings.end(), r.warnings.begin(), r.warnings.end());
      balance_info = {{"plan", config.resample->to_json()},
                      {"before", to_json(r.before)},
                      {"after", to_json(r.after)},
                      {"synthetic_rows", r.synthetic.size()}};
      train.x = std::move(r.x);
      train.y = std::move(r.y);
    });
  }

  ClassifierConfig model_config = config.model;
  std::optional<SearchResult> search;
  if (config.tuning.method != "none") {
    search = stage("tune", [&] {
      std::vector<std::size_t> rows(prep.y_train.size());
      std::iota(rows.begin(), rows.end(), std::size_t{0});
      if (config.tuning.max_rows > 0 && config.tuning.max_rows < rows.size()) {
        Rng rng(derive_seed(seed, 6));
        for (std::size_t i = 0; i < config.tuning.max_rows; ++i) {
          std::swap(rows[i], rows[i + rng.uniform_index(rows.size() - i)]);
        }
        rows.resize(config.tuning.max_rows);
        std::sort(rows.begin(), rows.end());
      }
      const Matrix x = prep.train.values.select_rows(rows);
      const std::vector<int> y = take(prep.y_train, rows);
      CvSetup cv;
      cv.x = &x;
      cv.y = y;
      cv.folds = config.tuning.folds;
      cv.fold_of = cv_split(y, cv.folds, derive_seed(seed, 7));
      cv.base = config.model;
      cv.resample = config.resample;
      const FoldObjective objective = cv_objective(cv);
      if (config.tuning.method == "grid") return grid_search(config.tuning.grid, objective);
      BayesOptions opts;
      opts.n_iter = config.tuning.n_iter;
      opts.seed = derive_seed(seed, 8);
      return bayes_opt(config.tuning.space, objective, opts);
    });
    for (const auto& [name, value] : search->best().params.items()) model_config.set_param(name, value);
  }

  const Model model = stage("fit", [&] { return fit(train.x, train.y, model_config); });
  warnings.insert(warnings.end(), model.warnings.begin(), model.warnings.end());

  EvalMetadata meta{config.model.kind, config.feature_names(), config.techniques(), n_used};
  const EvalReport report = stage("evaluate", [&] { return evaluate(model, prep.test.values, prep.y_test, meta); });
  if (report.auc_error) warnings.push_back("AUC not reported: " + *report.auc_error);

  std::optional<ShapSummary> summary;
  std::vector<ShapValues> shap;
  if (config.explain.enabled) {
    stage("explain", [&] {
      const Matrix background = sample_rows(prep.train.values, config.explain.background, derive_seed(seed, 9));
      const Matrix rows = sample_rows(prep.test.values, config.explain.instances, derive_seed(seed, 10));
      KernelShapOptions opts;
      opts.n_coalitions = config.explain.n_coalitions;
      opts.seed = derive_seed(seed, 11);
      shap = explain_rows(make_predict_fn(model, config.explain.output), rows, background, config.explain.method, opts);
      summary = shap_summary(shap, prep.train.column_names());
    });
  }

  TrainResult result;
  stage("write", [&] {
    out.write("config", "config.json", pretty(config.to_json()));
    out.write("model", "model.json", pretty(to_json(model)));
    nlohmann::json prep_info = prep.info;
    prep_info["balance"] = balance_info;
    prep_info["sample"] = {{"requested", config.sample_size}, {"row_cap", config.row_cap}, {"used", n_used},
                           {"train", n_train}, {"test", n_test}, {"available", table.size()}};
    out.write("preprocess", "preprocess.json", pretty(prep_info));
    out.write("eval", "eval.json", pretty(report.to_json()));
    out.write("roc", "roc.csv", roc_csv(report.roc));
    out.write("table1", "table1.csv", table1_csv({report}));
    if (search) {
      out.write("trials_csv", "trials.csv", search->ledger_csv());
      out.write("trials_json", "trials.json", pretty(search->to_json()));
    }
    if (summary) {
      const auto names = prep.train.column_names();
      out.write("shap_values", "shap_values.csv", phi_csv(shap, names));
      nlohmann::json sj = summary->to_json();
      sj["algorithm"] = display_name(config.model.kind);
      sj["kind"] = to_string(config.model.kind);
      sj["output"] = to_string(config.explain.output);
      sj["method"] = method_name(config.explain.method);
      sj["background_rows"] = std::min(config.explain.background, prep.train.values.rows());
      out.write("shap_summary", "shap_summary.json", pretty(sj));
      out.write("table2", "table2.csv", table2_csv({{config.model.kind, *summary}}));
    }
    result.manifest.config_hash = config.hash();
    result.manifest.library_version = CRIMEPRED_VERSION;
    result.manifest.artifacts = out.artifacts();
    result.manifest.artifacts["manifest"] = "manifest.json";
    result.manifest.timings = stage.timings();
    result.manifest.warnings = warnings;
    out.write("manifest", "manifest.json", pretty(result.manifest.to_json()));
    out.commit();
  });
  result.directory = out.target();
  result.report = report;
  result.shap = summary;
  return result;
}

std::map<std::string, std::string> run_analyze(const fs::path& data, const fs::path& out_dir, bool strict) {
  StageRunner stage;
  std::optional<StagedOutput> staged;
  stage("config", [&] { staged.emplace(out_dir); });
  StagedOutput& out = *staged;
  const RawTable table = stage("load", [&] {
    RawTable t = load_csv(data, strict);
    if (t.size() == 0) throw Error("no data rows in " + data.string());
    return derive_temporal(t);
  });

  stage("frequencies", [&] {
    const auto ranking = rank_frequencies(extract_feature(table, "Primary Type").labels);
    std::size_t total = 0;
    for (const auto& e : ranking) total += e.count;
    std::ostringstream csv_out;
    csv::write_row(csv_out, {"rank", "primary_type", "count", "share"});
    for (std::size_t i = 0; i < ranking.size(); ++i) {
      csv::write_row(csv_out, {std::to_string(i + 1), ranking[i].category, std::to_string(ranking[i].count),
                               csv::format_double(static_cast<double>(ranking[i].count) / static_cast<double>(total))});
    }
    out.write("frequencies", "frequencies.csv", csv_out.str());
  });

  // Numeric view of a column: numbers when present, else lexicographic label codes.
  auto numeric_view = [&](std::string_view name) {
    const RawFeature f = extract_feature(table, name);
    const bool textual = name == "IUCR" || name == "FBI Code" || name == "Primary Type" || name == "Block" ||
                         name == "Location Description" || name == "Description";
    if (!textual) {
      std::vector<double> v(f.numbers.size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = f.numbers[i] ? *f.numbers[i] : std::nan("");
      return v;
    }
    return LabelEncoder::fit(f.labels).apply(f.labels).codes;
  };

  stage("correlations", [&] {
    CorrelationReport report;
    const std::vector<std::pair<std::string, std::string>> numeric_pairs = {
        {"IUCR", "FBI Code"},          {"Beat", "District"},          {"Ward", "Community Area"},
        {"X Coordinate", "Longitude"}, {"Y Coordinate", "Latitude"},  {"District", "Ward"}};
    for (const auto& [a, b] : numeric_pairs) {
      const auto va = numeric_view(a), vb = numeric_view(b);
      std::vector<double> xa, xb;
      for (std::size_t i = 0; i < va.size(); ++i) {
        if (!std::isnan(va[i]) && !std::isnan(vb[i])) {
          xa.push_back(va[i]);
          xb.push_back(vb[i]);
        }
      }
      try {
        report.pairs.push_back({a, b, "pearson", pearson(xa, xb), std::nullopt, std::nullopt});
        report.pairs.push_back({a, b, "spearman", spearman(xa, xb), std::nullopt, std::nullopt});
      } catch (const Error&) {
        // Too few rows or a constant column: the pair is left out.
      }
    }
    const std::vector<std::pair<std::string, std::string>> nominal_pairs = {
        {"Primary Type", "Domestic"}, {"Primary Type", "Arrest"}, {"Primary Type", "Weekday"}};
    for (const auto& [a, b] : nominal_pairs) {
      const RawFeature fa = extract_feature(table, a), fb = extract_feature(table, b);
      std::vector<std::string> la, lb;
      for (std::size_t i = 0; i < fa.labels.size(); ++i) {
        if (fa.labels[i] && fb.labels[i]) {
          la.push_back(*fa.labels[i]);
          lb.push_back(*fb.labels[i]);
        }
      }
      try {
        const ChiSquareResult r = chi_square_independence(contingency_table(la, lb));
        report.pairs.push_back({a, b, "chi_square", r.statistic, r.p_value, r.dof});
      } catch (const Error&) {
      }
    }
    out.write("correlations_json", "correlations.json", pretty(report.to_json()));
    out.write("correlations_csv", "correlations.csv", report.to_csv());
  });

  stage("vif", [&] {
    const std::vector<std::string> names = {"Beat",      "District",     "Ward",         "Community Area",
                                            "X Coordinate", "Y Coordinate", "Year",       "Latitude",
                                            "Longitude", "Hour",         "Month",        "Week Number"};
    std::vector<std::vector<double>> cols;
    for (const auto& n : names) cols.push_back(numeric_view(n));
    Matrix x(0, names.size());
    std::vector<double> row(names.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
      bool complete = true;
      for (std::size_t c = 0; c < names.size(); ++c) {
        row[c] = cols[c][i];
        complete = complete && !std::isnan(row[c]);
      }
      if (complete) x.append_row(row);
    }
    nlohmann::json j;
    if (x.rows() > names.size() + 1) {
      j = vif(x, names).to_json();
      j["rows"] = x.rows();
    } else {
      j = {{"rows", x.rows()}, {"error", "too few complete rows for VIF"}};
    }
    out.write("vif", "vif.json", pretty(j));
  });

  stage("write", [&] {
    out.write("analysis", "analysis.json",
              pretty({{"library_version", CRIMEPRED_VERSION},
                      {"source", data.string()},
                      {"rows", table.size()},
                      {"invalid_cells", table.provenance.invalid_cells},
                      {"timings", nlohmann::json(stage.timings())}}));
    out.commit();
  });
  return out.artifacts();
}

std::map<std::string, std::string> run_report(const std::vector<fs::path>& runs, const fs::path& out_dir) {
  StageRunner stage;
  if (runs.empty()) throw StageError("config", "report needs at least one run manifest");
  std::optional<StagedOutput> staged;
  stage("config", [&] { staged.emplace(out_dir); });
  StagedOutput& out = *staged;
  std::vector<EvalReport> reports;
  std::vector<Table2Row> shap_rows;
  nlohmann::json sources = nlohmann::json::array();
  stage("read", [&] {
    for (const auto& run : runs) {
      const fs::path manifest_path = fs::is_directory(run) ? run / "manifest.json" : run;
      const fs::path dir = manifest_path.parent_path();
      const RunManifest m = RunManifest::from_json(read_json(manifest_path));
      for (const auto& [key, rel] : m.artifacts) {
        if (!fs::exists(dir / rel)) throw Error("artifact " + rel + " listed in " + manifest_path.string() + " is missing");
      }
      if (!m.artifacts.count("eval")) throw Error(manifest_path.string() + " has no evaluation report");
      reports.push_back(EvalReport::from_json(read_json(dir / m.artifacts.at("eval"))));
      if (m.artifacts.count("shap_summary")) {
        shap_rows.push_back({reports.back().metadata.kind,
                             ShapSummary::from_json(read_json(dir / m.artifacts.at("shap_summary")))});
      }
      sources.push_back({{"manifest", manifest_path.string()}, {"config_hash", m.config_hash}});
    }
  });
  stage("write", [&] {
    out.write("table1", "table1.csv", table1_csv(reports));
    if (!shap_rows.empty()) out.write("table2", "table2.csv", table2_csv(shap_rows));
    out.write("report", "report.json", pretty({{"library_version", CRIMEPRED_VERSION}, {"runs", sources}}));
    out.commit();
  });
  return out.artifacts();
}

}  // namespace crimepred
