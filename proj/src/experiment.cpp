#include "qsvm/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "qsvm/json_eigen.hpp"
#include "qsvm/qubo_io.hpp"
#include "qsvm/svg.hpp"
#include "qsvm/util.hpp"

namespace qsvm {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

const std::set<std::string> kTopLevelKeys = {"dataset",  "split",    "encoding", "backend", "baselines",
                                             "ensemble", "roster",   "output",   "seed",    "shots",
                                             "schedule", "noise",    "embedding"};

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw std::invalid_argument("unknown key '" + key + "' in " + where + " (allowed: " + list + ")");
    }
  }
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t cell_seed(const ExperimentConfig& cfg, int train_size, int repeat) {
  return derive_seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(train_size)), static_cast<std::uint64_t>(repeat));
}

std::string normalize(const std::string& name) {
  std::string out;
  for (char c : name) {
    const char lc = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const char mapped = (lc == '_' || lc == '-') ? ' ' : lc;
    if (mapped == ' ' && (out.empty() || out.back() == ' ')) continue;
    out += mapped;
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

std::vector<int> predict_all(const std::function<int(const Eigen::VectorXd&)>& f, const Dataset& d) {
  std::vector<int> out(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) out[i] = f(d.samples.row(i).transpose());
  return out;
}

SplitMetrics score(const std::vector<int>& pred, const Dataset& d) {
  const auto c = confusion(d.labels, pred);
  return {metrics(c), c};
}

void write_json(const fs::path& path, const json& j, std::vector<fs::path>& written) {
  write_file_atomic(path, j.dump(2) + "\n");
  written.push_back(path);
}

void write_text(const fs::path& path, const std::string& text, std::vector<fs::path>& written) {
  write_file_atomic(path, text);
  written.push_back(path);
}

std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(10) << v;
  return out.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

Dataset concat(const Dataset& a, const Dataset& b) {
  Dataset out = a;
  out.samples.resize(a.size() + b.size(), a.features());
  out.samples << a.samples, b.samples;
  out.labels.resize(a.size() + b.size());
  out.labels << a.labels, b.labels;
  return out;
}

BackendConfig backend_for(const ExperimentConfig& cfg, BackendKind kind, long shots) {
  BackendConfig b = cfg.backend;
  b.kind = kind;
  if (shots > 0) b.shots = shots;
  return b;
}

/// Histograms for one split, shared between roster entries that use the
/// same backend. Analog sessions are evolved once and re-sampled per shot
/// budget.
class TrainingCache {
 public:
  TrainingCache(const ExperimentConfig& cfg, std::uint64_t seed) : cfg_(cfg), seed_(seed) {}

  TrainingRun get(const QuboMatrix& q, BackendKind kind, long shots) {
    const auto backend = backend_for(cfg_, kind, shots);
    const auto seed = derive_seed(seed_, fnv1a("backend:" + to_string(kind)));
    if (is_analog(kind)) {
      auto it = sessions_.find(kind);
      if (it == sessions_.end()) it = sessions_.emplace(kind, AnalogSession(q, backend, seed)).first;
      return it->second.run(backend.shots);
    }
    const auto key = std::make_pair(kind, backend.shots);
    auto it = classical_.find(key);
    if (it == classical_.end()) it = classical_.emplace(key, solve_qubo(q, backend, seed)).first;
    return it->second;
  }

 private:
  const ExperimentConfig& cfg_;
  std::uint64_t seed_;
  std::map<BackendKind, AnalogSession> sessions_;
  std::map<std::pair<BackendKind, long>, TrainingRun> classical_;
};

CellResult run_cell(const RosterEntry& entry, const FormulatedProblem& problem, TrainingCache& cache,
                    const ExperimentConfig& cfg, std::uint64_t seed) {
  CellResult cell;
  cell.model = entry.name;
  cell.train_size = problem.train_size;
  cell.repeat = problem.prepared.split.repeat;
  const auto& prep = problem.prepared;
  const auto train = prep.train.training_set();
  const auto entry_seed = derive_seed(seed, fnv1a(entry.name));

  if (entry.family == RosterEntry::Family::classical) {
    const auto model = fit(entry.classical, cfg.baselines, train, entry_seed);
    cell.test = score(predict_all([&](const Eigen::VectorXd& x) { return predict(model, x); }, prep.test), prep.test);
    cell.ok = true;
    return cell;
  }

  if (entry.strategy == RosterEntry::Strategy::stack) {
    const Dataset base_data = cfg.stack_data == StackData::train ? prep.train : concat(prep.train, prep.validation);
    std::vector<BaselineModel> bases;
    for (std::size_t b = 0; b < cfg.stack_bases.size(); ++b) {
      bases.push_back(fit(cfg.stack_bases[b], cfg.baselines, base_data.training_set(), derive_seed(entry_seed, b)));
    }
    const auto meta_encoding = resolved_meta_encoding(cfg, bases.size());
    const auto backend = backend_for(cfg, entry.backend, entry.shots);
    const auto meta_seed = derive_seed(entry_seed, 1000);
    const QuboSolver solver = [&](const QuboMatrix& q) { return solve_qubo(q, backend, meta_seed).histogram; };
    const auto model = stack_train(std::move(bases), train, solver, meta_encoding);
    cell.test = score(predict_all([&](const Eigen::VectorXd& x) { return stack_predict(model, x); }, prep.test), prep.test);
    cell.details = {{"meta_alphas", vector_to_json(model.meta.alphas)}, {"meta_bias", model.meta.bias}};
    cell.ok = true;
    return cell;
  }

  const auto run = cache.get(problem.q, entry.backend, entry.shots);
  const auto ranked = rank_models(run.histogram, train, problem.encoding, cfg.max_models);
  if (entry.strategy == RosterEntry::Strategy::single) {
    const auto& top = ranked.entries.front();
    cell.test = score(predict_all([&](const Eigen::VectorXd& x) { return predict(top.model, x); }, prep.test), prep.test);
    cell.details = {{"bitstring", to_string(top.bits)}, {"frequency", top.frequency}};
  } else {
    const auto validation = prep.validation.training_set();
    const auto scores = prefix_scores(ranked, validation, cfg.metric, cfg.vote_mode);
    const auto best = std::max_element(scores.begin(), scores.end());
    const auto ens = prefix_ensemble(ranked, static_cast<std::size_t>(best - scores.begin()) + 1, cfg.vote_mode);
    cell.test = score(predict_all([&](const Eigen::VectorXd& x) { return vote_predict(ens, x); }, prep.test), prep.test);
    cell.details = {{"k", ens.size()},
                    {"candidates", ranked.entries.size()},
                    {"validation_metric", to_string(cfg.metric)},
                    {"validation_top_model", scores.front()},
                    {"validation_selected", *best}};
  }
  cell.ok = true;
  return cell;
}

json encoding_to_config_json(const ExperimentConfig& cfg) {
  json e = to_json(cfg.encoding);
  if (cfg.kernel_scale_auto && cfg.encoding.kernel.kind == KernelKind::linear) e["kernel"]["scale"] = "auto";
  return e;
}

}  // namespace

ExperimentConfig config_from_json(const json& j, const fs::path& base_dir) {
  reject_unknown(j, kTopLevelKeys, "config");
  ExperimentConfig cfg;

  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    reject_unknown(d, {"path", "label_column", "positive_label"}, "dataset");
    cfg.dataset.path = d.value("path", cfg.dataset.path.string());
    cfg.dataset.label_column = d.value("label_column", cfg.dataset.label_column);
    cfg.dataset.positive_label = d.value("positive_label", cfg.dataset.positive_label);
  }
  if (cfg.dataset.path.is_relative() && !base_dir.empty() && !fs::exists(cfg.dataset.path) &&
      fs::exists(base_dir / cfg.dataset.path)) {
    cfg.dataset.path = base_dir / cfg.dataset.path;
  }

  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("split")) {
    const auto& s = j.at("split");
    reject_unknown(s, {"pool_fraction", "train_size", "train_sizes", "repeats", "repeat", "stratified"}, "split");
    cfg.split.pool_fraction = s.value("pool_fraction", cfg.split.pool_fraction);
    cfg.split.repeats = s.value("repeats", cfg.split.repeats);
    cfg.split.stratified = s.value("stratified", cfg.split.stratified);
    cfg.repeat = s.value("repeat", cfg.repeat);
    if (s.contains("train_sizes")) cfg.train_sizes = s.at("train_sizes").get<std::vector<int>>();
    cfg.split.train_size = s.value("train_size", cfg.train_sizes.empty() ? 6 : cfg.train_sizes.front());
  }
  cfg.split.seed = cfg.seed;
  if (cfg.train_sizes.empty()) throw std::invalid_argument("split.train_sizes must not be empty");
  for (int n : cfg.train_sizes)
    if (n < 2) throw std::invalid_argument("split.train_sizes entries must be at least 2");
  if (cfg.repeat < 0) throw std::invalid_argument("split.repeat must be non-negative");

  if (j.contains("encoding")) {
    json e = j.at("encoding");
    reject_unknown(e, {"base", "bits_per_alpha", "xi", "kernel"}, "encoding");
    cfg.kernel_scale_auto = false;
    if (e.contains("kernel")) {
      auto& k = e["kernel"];
      reject_unknown(k, {"kind", "scale", "gamma"}, "encoding.kernel");
      if (!k.contains("scale") || (k.at("scale").is_string() && k.at("scale").get<std::string>() == "auto")) {
        cfg.kernel_scale_auto = true;
        k.erase("scale");
      } else if (!k.at("scale").is_number()) {
        throw std::invalid_argument("encoding.kernel.scale must be a number or \"auto\"");
      }
    } else {
      cfg.kernel_scale_auto = true;
    }
    cfg.encoding = encoding_from_json(e);
  }

  json backend = j.contains("backend") && j.at("backend").is_object() ? j.at("backend") : json::object();
  if (j.contains("backend") && j.at("backend").is_string()) backend["kind"] = j.at("backend");
  for (const char* key : {"shots", "schedule", "noise", "embedding"})
    if (j.contains(key)) backend[key] = j.at(key);
  reject_unknown(backend, {"kind", "shots", "spectrum_size", "anneal_sweeps", "max_atoms", "schedule", "noise", "embedding"},
                 "backend");
  if (backend.contains("schedule"))
    reject_unknown(backend["schedule"], {"tau", "dt", "omega_cap", "delta_start", "delta_end", "qpu_mode"}, "schedule");
  if (backend.contains("embedding"))
    reject_unknown(backend["embedding"],
                   {"c6", "target_scale", "restarts", "penalty_weight", "rho_begin", "rho_end", "max_evaluations",
                    "constraints"},
                   "embedding");
  cfg.backend = backend_config_from_json(backend);

  if (j.contains("baselines")) cfg.baselines = baseline_params_from_json(j.at("baselines"));

  if (j.contains("ensemble")) {
    const auto& e = j.at("ensemble");
    reject_unknown(e, {"max_models", "metric", "vote_mode", "stack_bases", "stack_data", "meta_kernel_scale"},
                   "ensemble");
    if (e.contains("meta_kernel_scale")) {
      const auto& m = e.at("meta_kernel_scale");
      if (m.is_string() && m.get<std::string>() == "auto") cfg.meta_kernel_scale = 0.0;
      else if (m.is_number() && m.get<double>() > 0.0) cfg.meta_kernel_scale = m.get<double>();
      else throw std::invalid_argument("ensemble.meta_kernel_scale must be a positive number or \"auto\"");
    }
    cfg.max_models = e.value("max_models", cfg.max_models);
    if (cfg.max_models < 1) throw std::invalid_argument("ensemble.max_models must be at least 1");
    if (e.contains("metric")) cfg.metric = metric_from_string(e.at("metric").get<std::string>());
    if (e.contains("vote_mode")) cfg.vote_mode = vote_mode_from_string(e.at("vote_mode").get<std::string>());
    if (e.contains("stack_bases")) {
      cfg.stack_bases.clear();
      for (const auto& b : e.at("stack_bases")) cfg.stack_bases.push_back(baseline_kind_from_string(b.get<std::string>()));
      if (cfg.stack_bases.size() < 2) throw std::invalid_argument("ensemble.stack_bases needs at least two models");
    }
    const auto data = e.value("stack_data", std::string("train"));
    if (data == "train") cfg.stack_data = StackData::train;
    else if (data == "pool") cfg.stack_data = StackData::pool;
    else throw std::invalid_argument("ensemble.stack_data must be \"train\" or \"pool\"");
  }

  if (j.contains("roster")) cfg.roster = j.at("roster").get<std::vector<std::string>>();
  if (cfg.roster.empty()) throw std::invalid_argument("roster must list at least one model");
  for (const auto& name : cfg.roster) parse_roster_entry(name, cfg);
  if (j.contains("output")) cfg.output = j.at("output").get<std::string>();
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

json to_json(const ExperimentConfig& cfg) {
  std::vector<std::string> bases;
  for (auto b : cfg.stack_bases) bases.push_back(to_string(b));
  return {{"dataset",
           {{"path", cfg.dataset.path.string()},
            {"label_column", cfg.dataset.label_column},
            {"positive_label", cfg.dataset.positive_label}}},
          {"split",
           {{"pool_fraction", cfg.split.pool_fraction},
            {"train_size", cfg.split.train_size},
            {"train_sizes", cfg.train_sizes},
            {"repeats", cfg.split.repeats},
            {"repeat", cfg.repeat},
            {"stratified", cfg.split.stratified}}},
          {"encoding", encoding_to_config_json(cfg)},
          {"backend", to_json(cfg.backend)},
          {"baselines", to_json(cfg.baselines)},
          {"ensemble",
           {{"max_models", cfg.max_models},
            {"metric", to_string(cfg.metric)},
            {"vote_mode", to_string(cfg.vote_mode)},
            {"stack_bases", bases},
            {"stack_data", cfg.stack_data == StackData::train ? "train" : "pool"},
            {"meta_kernel_scale", cfg.meta_kernel_scale > 0.0 ? json(cfg.meta_kernel_scale) : json("auto")}}},
          {"roster", cfg.roster},
          {"output", cfg.output.string()},
          {"seed", cfg.seed}};
}

EncodingConfig resolved_encoding(const ExperimentConfig& cfg, Eigen::Index features) {
  EncodingConfig e = cfg.encoding;
  if (cfg.kernel_scale_auto && e.kernel.kind == KernelKind::linear && features > 0) {
    e.kernel.scale = 1.0 / static_cast<double>(features);
  }
  return e;
}

EncodingConfig resolved_meta_encoding(const ExperimentConfig& cfg, std::size_t base_models) {
  EncodingConfig e = cfg.encoding;
  e.kernel = Kernel{};
  e.kernel.scale = cfg.meta_kernel_scale > 0.0 ? cfg.meta_kernel_scale : 1.0 / (2.0 * static_cast<double>(base_models));
  return e;
}

RosterEntry parse_roster_entry(const std::string& name, const ExperimentConfig& cfg) {
  static const std::map<std::string, BaselineKind> kClassical = {
      {"knn", BaselineKind::knn},
      {"k nearest neighbors", BaselineKind::knn},
      {"random forest", BaselineKind::random_forest},
      {"decision tree", BaselineKind::decision_tree},
      {"decision trees", BaselineKind::decision_tree},
      {"naive bayes", BaselineKind::gaussian_nb},
      {"gaussian nb", BaselineKind::gaussian_nb},
      {"logistic regression", BaselineKind::logistic_regression},
      {"svm linear", BaselineKind::svm_linear},
      {"linear svm", BaselineKind::svm_linear},
      {"svm with linear kernel", BaselineKind::svm_linear},
      {"svm rbf", BaselineKind::svm_rbf},
      {"rbf svm", BaselineKind::svm_rbf},
      {"svm with rbf kernel", BaselineKind::svm_rbf},
  };
  const auto norm = normalize(name);
  RosterEntry e;
  e.name = name;
  if (auto it = kClassical.find(norm); it != kClassical.end()) {
    e.family = RosterEntry::Family::classical;
    e.classical = it->second;
    return e;
  }

  auto bad = [&](const std::string& why) {
    return std::invalid_argument("roster entry '" + name + "': " + why +
                                 ". Use a classical model (knn, random_forest, decision_tree, gaussian_nb, "
                                 "logistic_regression, svm_linear, svm_rbf) or QUBO SVM suffixes such as "
                                 "\"i\", \"i opt\", \"N 1000\", \"N opt 500\", \"i stack\", \"N stack\", \"qubo_svm\"");
  };
  auto toks = tokens(norm);
  bool prefixed = false;
  while (!toks.empty() && (toks.front() == "qubo" || toks.front() == "svm")) {
    prefixed = true;
    toks.erase(toks.begin());
  }
  std::optional<BackendKind> backend;
  bool opt = false, stack = false;
  std::optional<long> shots;
  auto set_backend = [&](BackendKind k) {
    if (backend) throw bad("more than one backend suffix");
    backend = k;
  };
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const auto& t = toks[i];
    if (t == "i") set_backend(BackendKind::analog_ideal);
    else if (t == "n") set_backend(BackendKind::analog_noisy);
    else if (t == "bruteforce") set_backend(BackendKind::brute_force);
    else if (t == "brute" && i + 1 < toks.size() && toks[i + 1] == "force") {
      set_backend(BackendKind::brute_force);
      ++i;
    } else if (t == "anneal" || t == "sa") set_backend(BackendKind::simulated_anneal);
    else if (t == "simulated" && i + 1 < toks.size() && toks[i + 1] == "anneal") {
      set_backend(BackendKind::simulated_anneal);
      ++i;
    } else if (t == "opt") {
      if (opt) throw bad("repeated 'opt'");
      opt = true;
    } else if (t == "stack") {
      if (stack) throw bad("repeated 'stack'");
      stack = true;
    } else if (!t.empty() && std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      if (shots) throw bad("more than one shot count");
      shots = std::stol(t);
      if (*shots < 1) throw bad("shot count must be positive");
    } else {
      throw bad("unrecognised token '" + t + "'");
    }
  }
  if (!prefixed && !backend) throw bad("not a known model name");
  if (opt && stack) throw bad("'opt' and 'stack' cannot be combined");

  e.family = RosterEntry::Family::qubo;
  e.backend = backend.value_or(cfg.backend.kind);
  e.strategy = stack ? RosterEntry::Strategy::stack : opt ? RosterEntry::Strategy::vote : RosterEntry::Strategy::single;
  if (shots) e.shots = *shots;
  else if (e.backend == BackendKind::analog_noisy) e.shots = stack ? 500 : 1000;
  else e.shots = cfg.backend.shots;
  return e;
}

Dataset load_dataset(const ExperimentConfig& cfg) {
  return load_csv(cfg.dataset.path, cfg.dataset.label_column, cfg.dataset.positive_label);
}

FormulatedProblem formulate(const Dataset& data, const ExperimentConfig& cfg, int train_size, int repeat) {
  SplitSpec spec = cfg.split;
  spec.train_size = train_size;
  spec.seed = cfg.seed;
  if (repeat < 0) throw std::invalid_argument("repeat must be non-negative");
  FormulatedProblem p;
  p.prepared = prepare_split(data, make_split(data, spec, repeat));
  p.encoding = resolved_encoding(cfg, data.features());
  p.q = build_qubo(p.prepared.train.training_set(), p.encoding);
  p.train_size = train_size;
  return p;
}

json provenance(const FormulatedProblem& p, const ExperimentConfig& cfg) {
  auto indices = [](const std::vector<Eigen::Index>& v) { return std::vector<long long>(v.begin(), v.end()); };
  return {{"dataset", cfg.dataset.path.string()},
          {"seed", cfg.seed},
          {"train_size", p.train_size},
          {"repeat", p.prepared.split.repeat},
          {"encoding", to_json(p.encoding)},
          {"train_indices", indices(p.prepared.split.train)},
          {"validation_indices", indices(p.prepared.split.validation)},
          {"test_indices", indices(p.prepared.split.test)},
          {"standardizer_mean", vector_to_json(p.prepared.standardizer.mean.transpose())},
          {"standardizer_scale", vector_to_json(p.prepared.standardizer.scale.transpose())}};
}

std::optional<MetricsReport> ExperimentResult::summary(const std::string& model, int train_size) const {
  std::vector<SplitMetrics> ok;
  for (const auto& c : cells)
    if (c.ok && c.model == model && c.train_size == train_size) ok.push_back(c.test);
  if (ok.empty()) return std::nullopt;
  return aggregate(ok);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const Dataset& data, const ProgressFn& progress) {
  ExperimentResult result;
  result.models = cfg.roster;
  result.train_sizes = cfg.train_sizes;
  std::vector<RosterEntry> entries;
  for (const auto& name : cfg.roster) entries.push_back(parse_roster_entry(name, cfg));

  for (int ts : cfg.train_sizes) {
    for (int r = 0; r < cfg.split.repeats; ++r) {
      const auto seed = cell_seed(cfg, ts, r);
      std::optional<FormulatedProblem> problem;
      std::string setup_error;
      try {
        problem = formulate(data, cfg, ts, r);
      } catch (const std::exception& e) {
        setup_error = e.what();
      }
      TrainingCache cache(cfg, seed);
      for (const auto& entry : entries) {
        if (progress) progress("train_size " + std::to_string(ts) + " repeat " + std::to_string(r) + ": " + entry.name);
        CellResult cell;
        cell.model = entry.name;
        cell.train_size = ts;
        cell.repeat = r;
        if (!problem) {
          cell.error = setup_error;
        } else {
          try {
            cell = run_cell(entry, *problem, cache, cfg, seed);
          } catch (const std::exception& e) {
            cell.ok = false;
            cell.error = e.what();
          }
        }
        result.cells.push_back(std::move(cell));
      }
    }
  }
  return result;
}

void write_experiment_outputs(const ExperimentResult& result, const ExperimentConfig& cfg,
                              std::vector<fs::path>* written_out) {
  std::vector<fs::path> written;
  fs::create_directories(cfg.output);
  write_json(cfg.output / "config.json", to_json(cfg), written);

  std::ostringstream cells_csv;
  cells_csv << "model,train_size,repeat,status,accuracy,precision,recall,f1,tp,fp,tn,fn,k,validation_top_model,"
               "validation_selected,error\n";
  json cells = json::array();
  for (const auto& c : result.cells) {
    cells_csv << csv_field(c.model) << ',' << c.train_size << ',' << c.repeat << ',' << (c.ok ? "ok" : "error") << ',';
    if (c.ok) {
      const auto& m = c.test.metrics;
      const auto& k = c.test.confusion;
      cells_csv << fmt(m.accuracy) << ',' << fmt(m.precision) << ',' << fmt(m.recall) << ',' << fmt(m.f1) << ',' << k.tp
                << ',' << k.fp << ',' << k.tn << ',' << k.fn << ',';
    } else {
      cells_csv << ",,,,,,,,";
    }
    if (c.details.contains("k")) {
      cells_csv << c.details["k"].get<std::size_t>() << ',' << fmt(c.details["validation_top_model"].get<double>()) << ','
                << fmt(c.details["validation_selected"].get<double>()) << ',';
    } else {
      cells_csv << ",,,";
    }
    cells_csv << csv_field(c.error) << '\n';
    json cj = {{"model", c.model}, {"train_size", c.train_size}, {"repeat", c.repeat}, {"ok", c.ok}};
    if (c.ok) {
      cj["metrics"] = to_json(c.test.metrics);
      cj["confusion"] = to_json(c.test.confusion);
    } else {
      cj["error"] = c.error;
    }
    if (!c.details.empty()) cj["details"] = c.details;
    cells.push_back(cj);
  }
  write_text(cfg.output / "results.csv", cells_csv.str(), written);

  std::ostringstream summary_csv;
  summary_csv << "model,train_size,repeats_ok,repeats_failed,accuracy_mean,accuracy_std,f1_mean,f1_std,precision_mean,"
                 "recall_mean\n";
  json summary = json::array();
  std::vector<BarGroup> acc_groups, f1_groups;
  for (const auto& model : result.models) {
    BarGroup acc{model, {}, {}}, f1{model, {}, {}};
    for (int ts : result.train_sizes) {
      long failed = 0;
      for (const auto& c : result.cells)
        if (!c.ok && c.model == model && c.train_size == ts) ++failed;
      const auto rep = result.summary(model, ts);
      summary_csv << csv_field(model) << ',' << ts << ',' << (rep ? rep->per_split.size() : 0) << ',' << failed << ',';
      json sj = {{"model", model}, {"train_size", ts}, {"repeats_failed", failed}};
      if (rep) {
        summary_csv << fmt(rep->mean.accuracy) << ',' << fmt(rep->std.accuracy) << ',' << fmt(rep->mean.f1) << ','
                    << fmt(rep->std.f1) << ',' << fmt(rep->mean.precision) << ',' << fmt(rep->mean.recall) << '\n';
        sj["repeats_ok"] = rep->per_split.size();
        sj["mean"] = to_json(rep->mean);
        sj["std"] = to_json(rep->std);
        acc.means.push_back(rep->mean.accuracy);
        acc.stds.push_back(rep->std.accuracy);
        f1.means.push_back(rep->mean.f1);
        f1.stds.push_back(rep->std.f1);
      } else {
        summary_csv << ",,,,,\n";
        sj["repeats_ok"] = 0;
        acc.means.push_back(std::nan(""));
        acc.stds.push_back(0.0);
        f1.means.push_back(std::nan(""));
        f1.stds.push_back(0.0);
      }
      summary.push_back(sj);
    }
    acc_groups.push_back(acc);
    f1_groups.push_back(f1);
  }
  write_text(cfg.output / "summary.csv", summary_csv.str(), written);
  write_json(cfg.output / "results.json", {{"cells", cells}, {"summary", summary}}, written);

  std::vector<std::string> series;
  for (int ts : result.train_sizes) series.push_back(std::to_string(ts) + " samples");
  write_text(cfg.output / "accuracy.svg", grouped_bar_svg("Test accuracy", series, acc_groups), written);
  write_text(cfg.output / "f1.svg", grouped_bar_svg("Test F1 score", series, f1_groups), written);
  if (written_out) *written_out = std::move(written);
}

std::vector<fs::path> cmd_formulate(const ExperimentConfig& cfg) {
  const auto data = load_dataset(cfg);
  const auto p = formulate(data, cfg, cfg.split.train_size, cfg.repeat);
  std::vector<fs::path> written;
  fs::create_directories(cfg.output);
  write_json(cfg.output / "config.json", to_json(cfg), written);
  json q = qubo_to_json(p.q);
  q["provenance"] = provenance(p, cfg);
  write_json(cfg.output / "qubo.json", q, written);
  std::ostringstream text;
  write_qubo_text(text, p.q);
  write_text(cfg.output / "qubo.txt", text.str(), written);
  return written;
}

std::vector<fs::path> cmd_embed(const fs::path& qubo_file, const ExperimentConfig& cfg) {
  const auto q = load_qubo(qubo_file);
  const auto seed = derive_seed(cfg.seed, fnv1a("embed"));
  std::vector<fs::path> written;
  fs::create_directories(cfg.output);
  const auto report = embed(q, cfg.backend.constraints, cfg.backend.embedding, seed);
  write_json(cfg.output / "config.json", to_json(cfg), written);
  write_json(cfg.output / "register.json", to_json(report.reg), written);
  write_json(cfg.output / "embedding_report.json", to_json(report), written);
  write_text(cfg.output / "register.svg", register_svg(report.reg, cfg.backend.constraints), written);
  return written;
}

std::vector<fs::path> cmd_train(const ExperimentConfig& cfg) {
  const auto data = load_dataset(cfg);
  const auto p = formulate(data, cfg, cfg.split.train_size, cfg.repeat);
  const auto seed = derive_seed(cell_seed(cfg, p.train_size, cfg.repeat), fnv1a("backend:" + to_string(cfg.backend.kind)));
  std::vector<fs::path> written;
  fs::create_directories(cfg.output);
  write_json(cfg.output / "config.json", to_json(cfg), written);
  json q = qubo_to_json(p.q);
  q["provenance"] = provenance(p, cfg);
  write_json(cfg.output / "qubo.json", q, written);

  TrainingRun run;
  if (is_analog(cfg.backend.kind)) {
    AnalogSession session(p.q, cfg.backend, seed);
    run = session.run(cfg.backend.shots);
    write_json(cfg.output / "payload.json", to_json(*run.payload), written);
    write_json(cfg.output / "register.json", to_json(run.payload->reg), written);
    write_json(cfg.output / "schedule.json", to_json(run.payload->schedule), written);
    write_json(cfg.output / "embedding_report.json", to_json(*run.embedding), written);
    write_text(cfg.output / "register.svg", register_svg(run.payload->reg, cfg.backend.constraints), written);
    if (cfg.backend.kind == BackendKind::analog_ideal) {
      write_json(cfg.output / "state.json", to_json(session.evolved().states.front()), written);
    }
  } else {
    run = solve_qubo(p.q, cfg.backend, seed);
  }
  write_json(cfg.output / "histogram.json", to_json(run.histogram), written);
  const auto ranked = rank_models(run.histogram, p.prepared.train.training_set(), p.encoding, cfg.max_models);
  write_json(cfg.output / "model.json", to_json(ranked.entries.front().model), written);
  write_json(cfg.output / "ranked_models.json", to_json(ranked), written);
  return written;
}

std::vector<fs::path> cmd_evaluate(const ExperimentConfig& cfg, const std::optional<fs::path>& model_file) {
  const auto data = load_dataset(cfg);
  const auto p = formulate(data, cfg, cfg.split.train_size, cfg.repeat);
  const fs::path model_path = model_file.value_or(cfg.output / "model.json");
  if (!fs::exists(model_path)) {
    throw std::invalid_argument("no model at " + model_path.string() + "; run 'train' first or pass --model");
  }
  const auto model = svm_model_from_json(json::parse(read_file(model_path)));
  if (model.support.features() != data.features()) {
    throw std::invalid_argument("model " + model_path.string() + " expects " + std::to_string(model.support.features()) +
                                " features, dataset has " + std::to_string(data.features()));
  }
  const auto& test = p.prepared.test;
  json out = {{"train_size", p.train_size}, {"repeat", cfg.repeat}, {"test_size", test.size()}};
  const auto single = score(predict_all([&](const Eigen::VectorXd& x) { return predict(model, x); }, test), test);
  out["top_model"] = {{"metrics", to_json(single.metrics)}, {"confusion", to_json(single.confusion)}};

  const auto ranked_path = model_path.parent_path() / "ranked_models.json";
  if (!model_file && fs::exists(ranked_path)) {
    const auto ranked = ranked_models_from_json(json::parse(read_file(ranked_path)));
    if (!ranked.entries.empty()) {
      const auto validation = p.prepared.validation.training_set();
      const auto scores = prefix_scores(ranked, validation, cfg.metric, cfg.vote_mode);
      const auto ens = optimize_ensemble_size(ranked, validation, cfg.metric, cfg.vote_mode);
      const auto voted = score(predict_all([&](const Eigen::VectorXd& x) { return vote_predict(ens, x); }, test), test);
      out["voting_ensemble"] = {{"k", ens.size()},
                                {"validation_metric", to_string(cfg.metric)},
                                {"validation_scores", scores},
                                {"metrics", to_json(voted.metrics)},
                                {"confusion", to_json(voted.confusion)}};
    }
  }
  std::vector<fs::path> written;
  fs::create_directories(cfg.output);
  write_json(cfg.output / "metrics.json", out, written);
  return written;
}

std::vector<fs::path> cmd_experiment(const ExperimentConfig& cfg, const ProgressFn& progress) {
  const auto data = load_dataset(cfg);
  const auto result = run_experiment(cfg, data, progress);
  std::vector<fs::path> written;
  write_experiment_outputs(result, cfg, &written);
  return written;
}

std::vector<fs::path> cmd_oracle(const fs::path& qubo_file, std::size_t top_k, const fs::path& output) {
  const auto q = load_qubo(qubo_file);
  const auto result = brute_force_solve(q, top_k);
  std::vector<fs::path> written;
  fs::create_directories(output);
  write_json(output / "spectrum.json", solve_result_to_json(result), written);
  return written;
}

}  // namespace qsvm
