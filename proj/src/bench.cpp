#include "skewfit/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "skewfit/metrics.hpp"
#include "skewfit/resample.hpp"
#include "skewfit/rng.hpp"

namespace skewfit {

namespace {

using nlohmann::json;

constexpr int kMaxSplitAttempts = 100;

std::uint64_t method_seed(std::uint64_t trial_seed, Method method) {
  return derive_seed(trial_seed, 1000 + static_cast<std::uint64_t>(method));
}

std::vector<std::size_t> complement(const std::vector<std::size_t>& fold, std::size_t n) {
  std::vector<bool> held(n, false);
  for (std::size_t i : fold) {
    held[i] = true;
  }
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < n; ++i) {
    if (!held[i]) {
      rest.push_back(i);
    }
  }
  return rest;
}

FwlrConfig fwlr_config(const ExperimentConfig& config, double lambda_beta, std::uint64_t seed) {
  FwlrConfig fc;
  fc.alpha = config.alpha;
  fc.epsilon = config.fwlr_epsilon;
  fc.max_outer_iterations = config.fwlr_max_outer_iterations;
  fc.lambda_beta = lambda_beta;
  fc.lambda_theta_grid = config.lambda_theta_grid;
  fc.sigma_grid = config.sigma_grid;
  fc.ratio_folds = config.cv_folds;
  fc.inner = config.optimizer;
  fc.seed = seed;
  fc.reselect_each_iteration = config.fwlr_reselect_each_iteration;
  fc.include_intercept = config.include_intercept;
  return fc;
}

MetricSummary summarize_metric(const std::vector<double>& values) {
  MetricSummary s;
  if (values.empty()) {
    return s;
  }
  const double n = static_cast<double>(values.size());
  double total = 0.0;
  for (double v : values) {
    total += v;
  }
  s.mean = total / n;
  double ss = 0.0;
  for (double v : values) {
    ss += (v - s.mean) * (v - s.mean);
  }
  s.sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  return s;
}

std::vector<double> read_grid(const json& doc, const char* key, std::vector<double> fallback) {
  return doc.contains(key) ? doc.at(key).get<std::vector<double>>() : fallback;
}

json hyperparameters_to_json(const Hyperparameters& h) {
  json doc;
  doc["lambda_beta"] = h.lambda_beta;
  if (h.sigma) {
    doc["sigma"] = *h.sigma;
  }
  if (h.lambda_theta) {
    doc["lambda_theta"] = *h.lambda_theta;
  }
  return doc;
}

}  // namespace

std::string_view method_name(Method method) {
  switch (method) {
    case Method::kProposed:
      return "proposed";
    case Method::kLogistic:
      return "logistic";
    case Method::kCostSensitive:
      return "cost_sensitive";
    case Method::kJansche:
      return "jansche";
    case Method::kSmote:
      return "smote";
  }
  return "unknown";
}

Method method_from_name(std::string_view name) {
  for (Method m : all_methods()) {
    if (method_name(m) == name) {
      return m;
    }
  }
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> kAll{Method::kProposed, Method::kLogistic, Method::kCostSensitive,
                                        Method::kJansche, Method::kSmote};
  return kAll;
}

void validate(const ExperimentConfig& config) {
  auto fail = [](const std::string& what) { throw ConfigError("invalid config: " + what); };
  if (config.methods.empty()) fail("methods must be non-empty");
  if (config.trials < 1) fail("trials must be >= 1");
  if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0)) fail("train_fraction must be in (0, 1)");
  if (config.cv_folds < 2) fail("cv_folds must be >= 2");
  if (config.lambda_beta_grid.empty() || config.lambda_theta_grid.empty() || config.sigma_grid.empty()) {
    fail("grids must be non-empty");
  }
  for (double v : config.lambda_beta_grid) {
    if (!(v >= 0.0)) fail("lambda_beta values must be >= 0");
  }
  for (double v : config.lambda_theta_grid) {
    if (!(v >= 0.0)) fail("lambda_theta values must be >= 0");
  }
  for (double v : config.sigma_grid) {
    if (!(v > 0.0)) fail("sigma values must be > 0");
  }
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) fail("alpha must be in [0, 1]");
  if (!(config.threshold >= 0.0 && config.threshold <= 1.0)) fail("threshold must be in [0, 1]");
  if (!(config.fwlr_epsilon > 0.0)) fail("fwlr epsilon must be > 0");
  if (config.fwlr_max_outer_iterations < 1) fail("fwlr max_outer_iterations must be >= 1");
  if (config.smote_k < 1) fail("smote k_neighbors must be >= 1");
  if (!(config.smote_target_ratio > 0.0 && config.smote_target_ratio <= 1.0)) fail("smote target_ratio must be in (0, 1]");
  if (!(config.optimizer.gradient_tolerance > 0.0) || config.optimizer.max_iterations < 1) {
    fail("optimizer settings out of range");
  }
  if (config.source.kind == DataSource::Kind::kSynthetic) {
    if (config.source.setting_id < 1 || config.source.setting_id > 6) fail("synthetic setting must be 1..6");
    if (config.source.synthetic_n < 4) fail("synthetic n must be >= 4");
  } else if (config.source.csv_path.empty() || config.source.label_column.empty()) {
    fail("csv source needs path and label_column");
  }
}

ExperimentConfig config_from_json(std::string_view text) {
  ExperimentConfig config;
  try {
    const json doc = json::parse(text);
    const json& ds = doc.at("dataset");
    const std::string type = ds.value("type", "synthetic");
    if (type == "synthetic") {
      config.source.kind = DataSource::Kind::kSynthetic;
      config.source.setting_id = ds.value("setting", 1);
      config.source.synthetic_n = ds.value("n", std::size_t{1000});
    } else if (type == "csv") {
      config.source.kind = DataSource::Kind::kCsv;
      config.source.csv_path = ds.at("path").get<std::string>();
      config.source.label_column = ds.at("label_column").get<std::string>();
      config.source.positive_label = ds.at("positive_label").get<std::string>();
    } else {
      throw ConfigError("dataset.type must be 'synthetic' or 'csv'");
    }
    if (doc.contains("methods")) {
      config.methods.clear();
      for (const auto& m : doc.at("methods")) {
        config.methods.push_back(method_from_name(m.get<std::string>()));
      }
    }
    const int default_trials = config.source.kind == DataSource::Kind::kCsv ? 30 : 100;
    config.trials = doc.value("trials", default_trials);
    config.train_fraction = doc.value("train_fraction", config.train_fraction);
    config.cv_folds = doc.value("cv_folds", config.cv_folds);
    config.lambda_beta_grid = read_grid(doc, "lambda_beta_grid", config.lambda_beta_grid);
    config.lambda_theta_grid = read_grid(doc, "lambda_theta_grid", config.lambda_theta_grid);
    config.sigma_grid = read_grid(doc, "sigma_grid", config.sigma_grid);
    config.alpha = doc.value("alpha", config.alpha);
    config.threshold = doc.value("threshold", config.threshold);
    config.seed = doc.value("seed", config.seed);
    config.include_intercept = doc.value("include_intercept", config.include_intercept);
    if (doc.contains("optimizer")) {
      const json& opt = doc.at("optimizer");
      config.optimizer.gradient_tolerance = opt.value("gradient_tolerance", config.optimizer.gradient_tolerance);
      config.optimizer.max_iterations = opt.value("max_iterations", config.optimizer.max_iterations);
    }
    if (doc.contains("fwlr")) {
      const json& f = doc.at("fwlr");
      config.fwlr_epsilon = f.value("epsilon", config.fwlr_epsilon);
      config.fwlr_max_outer_iterations = f.value("max_outer_iterations", config.fwlr_max_outer_iterations);
      config.fwlr_reselect_each_iteration = f.value("reselect_each_iteration", config.fwlr_reselect_each_iteration);
    }
    if (doc.contains("smote")) {
      const json& s = doc.at("smote");
      config.smote_k = s.value("k_neighbors", config.smote_k);
      config.smote_target_ratio = s.value("target_ratio", config.smote_target_ratio);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config json: ") + e.what());
  }
  validate(config);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read config file: " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  ExperimentConfig config = config_from_json(buffer.str());
  if (config.source.kind == DataSource::Kind::kCsv && config.source.csv_path.is_relative()) {
    config.source.csv_path = path.parent_path() / config.source.csv_path;
  }
  return config;
}

std::string config_to_json(const ExperimentConfig& config) {
  json doc;
  if (config.source.kind == DataSource::Kind::kSynthetic) {
    doc["dataset"] = {{"type", "synthetic"}, {"setting", config.source.setting_id}, {"n", config.source.synthetic_n}};
  } else {
    doc["dataset"] = {{"type", "csv"},
                      {"path", config.source.csv_path.string()},
                      {"label_column", config.source.label_column},
                      {"positive_label", config.source.positive_label}};
  }
  std::vector<std::string> methods;
  for (Method m : config.methods) {
    methods.emplace_back(method_name(m));
  }
  doc["methods"] = methods;
  doc["trials"] = config.trials;
  doc["train_fraction"] = config.train_fraction;
  doc["cv_folds"] = config.cv_folds;
  doc["lambda_beta_grid"] = config.lambda_beta_grid;
  doc["lambda_theta_grid"] = config.lambda_theta_grid;
  doc["sigma_grid"] = config.sigma_grid;
  doc["alpha"] = config.alpha;
  doc["threshold"] = config.threshold;
  doc["seed"] = config.seed;
  doc["include_intercept"] = config.include_intercept;
  doc["optimizer"] = {{"gradient_tolerance", config.optimizer.gradient_tolerance},
                      {"max_iterations", config.optimizer.max_iterations}};
  doc["fwlr"] = {{"epsilon", config.fwlr_epsilon},
                 {"max_outer_iterations", config.fwlr_max_outer_iterations},
                 {"reselect_each_iteration", config.fwlr_reselect_each_iteration}};
  doc["smote"] = {{"k_neighbors", config.smote_k}, {"target_ratio", config.smote_target_ratio}};
  return doc.dump(2);
}

FittedModel fit_method(Method method, const Dataset& train, double lambda_beta, const ExperimentConfig& config,
                       std::uint64_t seed) {
  GlmOptions options;
  options.lambda_beta = lambda_beta;
  options.include_intercept = config.include_intercept;
  options.optimizer = config.optimizer;

  FittedModel fitted;
  switch (method) {
    case Method::kLogistic:
      fitted.params = fit(train, options).params;
      break;
    case Method::kCostSensitive:
      fitted.params = fit(train, options, cost_sensitive_weights(train)).params;
      break;
    case Method::kJansche:
      fitted.params = fit_soft_f(train, options).params;
      break;
    case Method::kSmote: {
      SmoteConfig sc;
      sc.k_neighbors = config.smote_k;
      sc.target_ratio = config.smote_target_ratio;
      sc.seed = seed;
      fitted.params = fit(smote(train, sc), options).params;
      break;
    }
    case Method::kProposed: {
      FwlrResult result = fit_fwlr(train, fwlr_config(config, lambda_beta, seed));
      fitted.params = std::move(result.params);
      fitted.ratio = std::move(result.ratio);
      fitted.trace = std::move(result.trace);
      break;
    }
  }
  return fitted;
}

GridSearchResult grid_search(Method method, const Dataset& train, const ExperimentConfig& config,
                             std::uint64_t seed) {
  require_two_classes(train, "grid_search");
  const auto n = static_cast<std::size_t>(train.rows());
  const std::size_t k = std::min(config.cv_folds, n);
  const Folds folds = stratified_kfold_indices(train.labels, k, seed);

  GridSearchResult result;
  std::optional<std::size_t> best;
  for (double lambda_beta : config.lambda_beta_grid) {
    GridCell cell;
    cell.params.lambda_beta = lambda_beta;
    double total = 0.0;
    try {
      for (std::size_t f = 0; f < folds.size(); ++f) {
        const Dataset validation = train.subset(folds[f]);
        if (!validation.has_both_classes()) {
          continue;
        }
        const Dataset fold_train = train.subset(complement(folds[f], n));
        const FittedModel model = fit_method(method, fold_train, lambda_beta, config, derive_seed(seed, f + 1));
        total += auc(predict(model.params, validation));
        ++cell.folds_scored;
      }
      if (cell.folds_scored == 0) {
        cell.error = "no validation fold contained both classes";
      } else {
        cell.mean_auc = total / cell.folds_scored;
      }
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    result.cells.push_back(cell);
    if (cell.error.empty()) {
      const GridCell* incumbent = best ? &result.cells[*best] : nullptr;
      const bool better =
          incumbent == nullptr || cell.mean_auc > incumbent->mean_auc ||
          (cell.mean_auc == incumbent->mean_auc && cell.params.lambda_beta > incumbent->params.lambda_beta);
      if (better) {
        best = result.cells.size() - 1;
      }
    }
  }
  if (!best) {
    std::string message = "grid search failed for every cell (" + std::string(method_name(method)) + "):";
    for (const auto& cell : result.cells) {
      message += " [lambda_beta=" + std::to_string(cell.params.lambda_beta) + ": " + cell.error + "]";
    }
    throw std::runtime_error(message);
  }
  result.best = result.cells[*best].params;
  return result;
}

Dataset load_source(const ExperimentConfig& config) {
  if (config.source.kind != DataSource::Kind::kCsv) {
    throw std::invalid_argument("load_source: synthetic sources are generated per trial");
  }
  return load_csv(config.source.csv_path, config.source.label_column, config.source.positive_label).data;
}

TrialData prepare_trial(const ExperimentConfig& config, const Dataset* source, int trial) {
  const std::uint64_t trial_seed = derive_seed(config.seed, static_cast<std::uint64_t>(trial));
  Dataset generated;
  if (config.source.kind == DataSource::Kind::kSynthetic) {
    generated = generate_synthetic(synthetic_setting(config.source.setting_id), config.source.synthetic_n,
                                   derive_seed(trial_seed, 1));
    source = &generated;
  } else if (source == nullptr) {
    throw std::invalid_argument("prepare_trial: csv source data missing");
  }

  for (int attempt = 0; attempt < kMaxSplitAttempts; ++attempt) {
    SplitPair pair = split(*source, config.train_fraction, derive_seed(trial_seed, 2 + static_cast<std::uint64_t>(attempt)));
    if (pair.degenerate || !pair.test.has_both_classes()) {
      continue;
    }
    const NormalizationStats stats = fit_normalizer(pair.train);
    TrialData data;
    data.train = apply_normalizer(stats, pair.train);
    data.test = apply_normalizer(stats, pair.test);
    data.seed = trial_seed;
    return data;
  }
  throw std::runtime_error("could not draw a split with both classes on each side");
}

MethodOutcome evaluate_method(Method method, const TrialData& data, const ExperimentConfig& config, int trial) {
  MethodOutcome outcome;
  TrialResult& r = outcome.result;
  r.dataset = data.train.name;
  r.method = method;
  r.trial = trial;
  r.seed = data.seed;
  const auto start = std::chrono::steady_clock::now();
  try {
    const std::uint64_t seed = method_seed(data.seed, method);
    const GridSearchResult grid = grid_search(method, data.train, config, derive_seed(seed, 1));
    outcome.model = fit_method(method, data.train, grid.best.lambda_beta, config, derive_seed(seed, 2));
    r.hyperparameters = grid.best;
    if (outcome.model.ratio) {
      r.hyperparameters.sigma = outcome.model.ratio->sigma;
      r.hyperparameters.lambda_theta = outcome.model.ratio->lambda_theta;
    }
    const ScoredLabels scored = predict(outcome.model.params, data.test);
    const ConfusionCounts counts = confusion(scored, config.threshold);
    r.auc = auc(scored);
    r.f_measure = f_measure(counts).value;
    r.accuracy = accuracy(counts).value;
  } catch (const std::exception& e) {
    r.failed = true;
    r.error = e.what();
  }
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return outcome;
}

std::vector<SummaryRow> summarize(const std::vector<TrialResult>& results) {
  std::vector<std::string> datasets;
  for (const auto& r : results) {
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) {
      datasets.push_back(r.dataset);
    }
  }
  std::vector<SummaryRow> rows;
  for (const auto& dataset : datasets) {
    for (Method method : all_methods()) {
      SummaryRow row;
      row.dataset = dataset;
      row.method = method;
      std::vector<double> aucs, fs, accs;
      bool seen = false;
      for (const auto& r : results) {
        if (r.dataset != dataset || r.method != method) {
          continue;
        }
        seen = true;
        if (r.failed) {
          ++row.failures;
          continue;
        }
        aucs.push_back(r.auc);
        fs.push_back(r.f_measure);
        accs.push_back(r.accuracy);
      }
      if (!seen) {
        continue;
      }
      row.count = static_cast<int>(aucs.size());
      row.auc = summarize_metric(aucs);
      row.f_measure = summarize_metric(fs);
      row.accuracy = summarize_metric(accs);
      rows.push_back(row);
    }
  }
  return rows;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  validate(config);
  std::optional<Dataset> source;
  if (config.source.kind == DataSource::Kind::kCsv) {
    source = load_source(config);
  }
  ExperimentResult result;
  for (int trial = 0; trial < config.trials; ++trial) {
    TrialData data;
    try {
      data = prepare_trial(config, source ? &*source : nullptr, trial);
    } catch (const std::exception& e) {
      for (Method method : config.methods) {
        TrialResult r;
        r.dataset = source ? source->name : "setting" + std::to_string(config.source.setting_id);
        r.method = method;
        r.trial = trial;
        r.seed = derive_seed(config.seed, static_cast<std::uint64_t>(trial));
        r.failed = true;
        r.error = e.what();
        result.trials.push_back(r);
      }
      continue;
    }
    for (Method method : config.methods) {
      result.trials.push_back(evaluate_method(method, data, config, trial).result);
    }
  }
  result.summary = summarize(result.trials);
  return result;
}

std::string trial_result_to_json(const TrialResult& r) {
  json doc;
  doc["dataset"] = r.dataset;
  doc["method"] = std::string(method_name(r.method));
  doc["trial"] = r.trial;
  doc["seed"] = r.seed;
  doc["hyperparameters"] = hyperparameters_to_json(r.hyperparameters);
  doc["auc"] = r.auc;
  doc["f_measure"] = r.f_measure;
  doc["accuracy"] = r.accuracy;
  doc["wall_time_s"] = r.wall_time_s;
  doc["failed"] = r.failed;
  if (r.failed) {
    doc["error"] = r.error;
  }
  return doc.dump();
}

TrialResult trial_result_from_json(std::string_view line) {
  try {
    const json doc = json::parse(line);
    TrialResult r;
    r.dataset = doc.at("dataset").get<std::string>();
    r.method = method_from_name(doc.at("method").get<std::string>());
    r.trial = doc.at("trial").get<int>();
    r.seed = doc.value("seed", std::uint64_t{0});
    if (doc.contains("hyperparameters")) {
      const json& h = doc.at("hyperparameters");
      r.hyperparameters.lambda_beta = h.value("lambda_beta", 0.0);
      if (h.contains("sigma")) r.hyperparameters.sigma = h.at("sigma").get<double>();
      if (h.contains("lambda_theta")) r.hyperparameters.lambda_theta = h.at("lambda_theta").get<double>();
    }
    r.auc = doc.value("auc", 0.0);
    r.f_measure = doc.value("f_measure", 0.0);
    r.accuracy = doc.value("accuracy", 0.0);
    r.wall_time_s = doc.value("wall_time_s", 0.0);
    r.failed = doc.value("failed", false);
    r.error = doc.value("error", std::string{});
    return r;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("trial result json: ") + e.what());
  }
}

void write_trial_results(const std::vector<TrialResult>& results, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write results file: " + path.string());
  }
  for (const auto& r : results) {
    out << trial_result_to_json(r) << '\n';
  }
}

std::vector<TrialResult> read_trial_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read results file: " + path.string());
  }
  std::vector<TrialResult> results;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    results.push_back(trial_result_from_json(line));
  }
  return results;
}

}  // namespace skewfit
