#include "spog/serialize.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "spog/error.hpp"

namespace spog {
namespace fs = std::filesystem;

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ValidationError(where + ": unknown key \"" + it.key() + "\"");
  }
}

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    if constexpr (std::is_unsigned_v<T>) {
      if (!j.at(key).is_number_unsigned()) throw ValidationError(where + "." + key + ": expected a nonnegative integer");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!j.at(key).is_boolean()) throw ValidationError(where + "." + key + ": expected a boolean");
    } else if constexpr (std::is_arithmetic_v<T>) {
      if (!j.at(key).is_number()) throw ValidationError(where + "." + key + ": expected a number");
    }
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(where + "." + key + ": " + e.what());
  }
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vec(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(finite_or_null(x));
  return a;
}

json matrix(const DenseMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (std::size_t k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
    rows.push_back(std::move(r));
  }
  return rows;
}

DenseMatrix matrix_from(const json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + ": expected an array of rows");
  std::vector<std::vector<double>> rows;
  for (const auto& r : j) {
    if (!r.is_array()) throw ValidationError(where + ": expected an array of rows");
    rows.push_back(r.get<std::vector<double>>());
  }
  if (rows.empty()) return DenseMatrix();
  for (const auto& r : rows)
    if (r.size() != rows.front().size()) throw ValidationError(where + ": ragged matrix");
  return DenseMatrix::from_rows(rows);
}

}  // namespace

InitScheme init_from_json(const json& j) {
  check_keys(j, {"family", "distribution", "sigma2", "seed"}, "init");
  InitScheme s;
  s.family = parse_init_family(get_or<std::string>(j, "family", "xavier", "init"));
  if (j.contains("distribution")) s.distribution = parse_distribution(get_or<std::string>(j, "distribution", "", "init"));
  if (j.contains("sigma2")) {
    const auto& v = j.at("sigma2");
    if (v.is_number()) s.sigma2 = {v.get<double>()};
    else if (v.is_array()) s.sigma2 = get_or<std::vector<double>>(j, "sigma2", {}, "init");
    else throw ValidationError("init.sigma2: expected a number or an array");
    if (s.family != InitFamily::CustomSigma) throw ValidationError("init.sigma2 is only valid with family \"custom\"");
  }
  s.seed = get_or<std::uint64_t>(j, "seed", 0, "init");
  s.validate();
  return s;
}

json to_json(const InitScheme& s) {
  json j = {{"family", to_string(s.family)}, {"distribution", to_string(s.resolved_distribution())}, {"seed", s.seed}};
  if (s.family == InitFamily::CustomSigma) j["sigma2"] = s.sigma2;
  return j;
}

Activation activation_from_json(const json& j, const std::string& where) {
  const std::string name = get_or<std::string>(j, "activation", "relu", where);
  return parse_activation(name, get_or<double>(j, "act_alpha", 1.0, where), get_or<double>(j, "act_beta", 0.0, where));
}

ModelSpec model_from_json(const json& j, std::size_t input_dim, std::size_t num_classes) {
  check_keys(j, {"arch", "depth", "hidden_dim", "activation", "act_alpha", "act_beta", "res_alpha", "res_beta"}, "model");
  ModelSpec m;
  m.arch = parse_arch(get_or<std::string>(j, "arch", "vanilla", "model"));
  m.depth = get_or<std::size_t>(j, "depth", 2, "model");
  m.hidden_dim = get_or<std::size_t>(j, "hidden_dim", 64, "model");
  m.activation = activation_from_json(j, "model");
  m.res_alpha = get_or<double>(j, "res_alpha", 1.0, "model");
  m.res_beta = get_or<double>(j, "res_beta", 1.0, "model");
  m.input_dim = input_dim;
  m.num_classes = num_classes;
  m.validate();
  return m;
}

json to_json(const ModelSpec& m) {
  json j = {{"arch", to_string(m.arch)},        {"depth", m.depth},
            {"hidden_dim", m.hidden_dim},       {"input_dim", m.input_dim},
            {"num_classes", m.num_classes},     {"activation", m.activation.name()},
            {"res_alpha", m.res_alpha},         {"res_beta", m.res_beta}};
  if (m.activation.kind == Activation::Kind::AbRelu) {
    j["act_alpha"] = m.activation.alpha;
    j["act_beta"] = m.activation.beta;
  }
  return j;
}

SpogConfig spog_from_json(const json& j, Arch arch) {
  check_keys(j,
             {"w1", "w2", "w3", "lr", "iterations", "patience", "fd_step", "mc_directions", "shared_scale", "clamp_min",
              "max_step", "seed", "return_best", "gradient_mode"},
             "spog");
  SpogConfig c = SpogConfig::defaults_for(arch);
  c.w1 = get_or(j, "w1", c.w1, "spog");
  c.w2 = get_or(j, "w2", c.w2, "spog");
  c.w3 = get_or(j, "w3", c.w3, "spog");
  c.lr = get_or(j, "lr", c.lr, "spog");
  c.iterations = get_or(j, "iterations", c.iterations, "spog");
  c.patience = get_or(j, "patience", c.patience, "spog");
  c.fd_step = get_or(j, "fd_step", c.fd_step, "spog");
  c.mc_directions = get_or(j, "mc_directions", c.mc_directions, "spog");
  c.shared_scale = get_or(j, "shared_scale", c.shared_scale, "spog") || has_skip(arch);
  c.clamp_min = get_or(j, "clamp_min", c.clamp_min, "spog");
  c.max_step = get_or(j, "max_step", c.max_step, "spog");
  c.seed = get_or(j, "seed", c.seed, "spog");
  c.return_best = get_or(j, "return_best", c.return_best, "spog");
  if (j.contains("gradient_mode")) c.gradient_mode = parse_gradient_mode(get_or<std::string>(j, "gradient_mode", "", "spog"));
  c.validate();
  return c;
}

json to_json(const SpogConfig& c) {
  return {{"w1", c.w1},
          {"w2", c.w2},
          {"w3", c.w3},
          {"lr", c.lr},
          {"iterations", c.iterations},
          {"patience", c.patience},
          {"fd_step", c.fd_step},
          {"mc_directions", c.mc_directions},
          {"shared_scale", c.shared_scale},
          {"clamp_min", c.clamp_min},
          {"max_step", c.max_step},
          {"seed", c.seed},
          {"return_best", c.return_best},
          {"gradient_mode", to_string(c.gradient_mode)}};
}

TrainConfig train_from_json(const json& j, std::size_t depth) {
  check_keys(j, {"lr", "epochs", "weight_decay", "dropout", "patience", "seed"}, "train");
  TrainConfig c = TrainConfig::defaults_for_depth(depth);
  c.lr = get_or(j, "lr", c.lr, "train");
  c.epochs = get_or(j, "epochs", c.epochs, "train");
  c.patience = get_or(j, "patience", j.contains("epochs") ? std::max<std::size_t>(1, c.epochs / 4) : c.patience, "train");
  c.weight_decay = get_or(j, "weight_decay", c.weight_decay, "train");
  c.dropout_rate = get_or(j, "dropout", c.dropout_rate, "train");
  c.seed = get_or(j, "seed", c.seed, "train");
  c.validate();
  return c;
}

json to_json(const TrainConfig& c) {
  return {{"lr", c.lr},           {"epochs", c.epochs},     {"weight_decay", c.weight_decay},
          {"dropout", c.dropout_rate}, {"patience", c.patience}, {"seed", c.seed}};
}

SynthParams synth_from_json(const json& j) {
  check_keys(j,
             {"kind", "block_sizes", "p_in", "p_out", "num_nodes", "num_classes", "num_caves", "cave_size",
              "feature_dim", "class_separation", "noise", "train_fraction", "val_fraction"},
             "synth");
  SynthParams p;
  p.kind = parse_synth_kind(get_or<std::string>(j, "kind", "sbm", "synth"));
  p.block_sizes = get_or(j, "block_sizes", p.block_sizes, "synth");
  p.p_in = get_or(j, "p_in", p.p_in, "synth");
  p.p_out = get_or(j, "p_out", p.p_out, "synth");
  p.num_nodes = get_or(j, "num_nodes", p.num_nodes, "synth");
  p.num_classes = get_or(j, "num_classes", p.num_classes, "synth");
  p.num_caves = get_or(j, "num_caves", p.num_caves, "synth");
  p.cave_size = get_or(j, "cave_size", p.cave_size, "synth");
  p.feature_dim = get_or(j, "feature_dim", p.feature_dim, "synth");
  p.class_separation = get_or(j, "class_separation", p.class_separation, "synth");
  p.noise = get_or(j, "noise", p.noise, "synth");
  p.train_fraction = get_or(j, "train_fraction", p.train_fraction, "synth");
  p.val_fraction = get_or(j, "val_fraction", p.val_fraction, "synth");
  return p;
}

json to_json(const SynthParams& p) {
  return {{"kind", to_string(p.kind)},
          {"block_sizes", p.block_sizes},
          {"p_in", p.p_in},
          {"p_out", p.p_out},
          {"num_nodes", p.num_nodes},
          {"num_classes", p.num_classes},
          {"num_caves", p.num_caves},
          {"cave_size", p.cave_size},
          {"feature_dim", p.feature_dim},
          {"class_separation", p.class_separation},
          {"noise", p.noise},
          {"train_fraction", p.train_fraction},
          {"val_fraction", p.val_fraction}};
}

json to_json(const MetricSummary& s) {
  return {{"mean", finite_or_null(s.mean)},
          {"log10_mean", finite_or_null(s.log10_mean)},
          {"log10_std_error", finite_or_null(s.log10_std_error)},
          {"std_error", finite_or_null(s.std_error)},
          {"saturated_seeds", s.saturated_seeds},
          {"log_domain", s.log_domain}};
}

json to_json(const SpReport& r) {
  json depths = json::array();
  for (const auto& d : r.depths)
    depths.push_back({{"depth", d.depth},
                      {"fsp", to_json(d.fsp)},
                      {"bsp", to_json(d.bsp)},
                      {"gev", to_json(d.gev)},
                      {"log10_fsp_values", vec(d.fsp_values)},
                      {"log10_bsp_values", vec(d.bsp_values)},
                      {"gev_values", vec(d.gev_values)}});
  return {{"scheme", r.scheme_id}, {"num_seeds", r.num_seeds}, {"depths", depths}};
}

json to_json(const SpogResult& r) {
  json gammas = json::array();
  for (const auto& g : r.gamma_trace) gammas.push_back(g);
  std::vector<bool> sat(r.saturated_trace.begin(), r.saturated_trace.end());
  return {{"gamma", r.gamma},
          {"best_gamma", r.best_gamma},
          {"last_gamma", r.last_gamma},
          {"gamma_trace", gammas},
          {"objective_trace", vec(r.objective_trace)},
          {"best_objective_trace", vec(r.best_objective_trace)},
          {"term_traces", {{"v_fsp", vec(r.v_fsp_trace)}, {"v_bsp", vec(r.v_bsp_trace)}, {"gev", vec(r.gev_trace)}}},
          {"saturated_trace", sat},
          {"iterations", r.iterations},
          {"stop_reason", to_string(r.stop_reason)},
          {"config", to_json(r.config)}};
}

json to_json(const TrainResult& r) {
  return {{"train_loss", vec(r.train_loss)},
          {"train_acc", vec(r.train_acc)},
          {"val_loss", vec(r.val_loss)},
          {"val_acc", vec(r.val_acc)},
          {"best_val_epoch", r.best_val_epoch},
          {"best_val_acc", r.best_val_acc},
          {"test_acc", r.test_acc},
          {"epochs_run", r.epochs_run},
          {"diverged", r.diverged},
          {"diverged_epoch", r.diverged_epoch}};
}

json to_json(const VerificationReport& r) {
  return {{"theorem", to_string(r.theorem)},
          {"pass", r.pass},
          {"hypothesis_met", r.hypothesis_met},
          {"branch", r.branch},
          {"message", r.message},
          {"per_layer_margins", vec(r.per_layer_margins)},
          {"bound_margins", vec(r.bound_margins)},
          {"max_relative_deviation", finite_or_null(r.max_relative_deviation)},
          {"growth_factors", vec(r.growth_factors)}};
}

json to_json(const ModelParams& p) {
  json w = json::array();
  for (const auto& m : p.weights) w.push_back(matrix(m));
  return {{"weights", w},
          {"biases", p.biases},
          {"input_proj", matrix(p.input_proj)},
          {"output_proj", matrix(p.output_proj)},
          {"gate_alpha", p.gate_alpha},
          {"gate_beta", p.gate_beta}};
}

ModelParams params_from_json(const json& j) {
  check_keys(j, {"weights", "biases", "input_proj", "output_proj", "gate_alpha", "gate_beta"}, "params");
  try {
    ModelParams p;
    for (const auto& w : j.at("weights")) p.weights.push_back(matrix_from(w, "params.weights"));
    p.biases = j.at("biases").get<std::vector<std::vector<double>>>();
    p.input_proj = matrix_from(j.at("input_proj"), "params.input_proj");
    p.output_proj = matrix_from(j.at("output_proj"), "params.output_proj");
    p.gate_alpha = j.at("gate_alpha").get<std::vector<double>>();
    p.gate_beta = j.at("gate_beta").get<std::vector<double>>();
    return p;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("params: ") + e.what());
  }
}

void write_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace spog
