#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "spog/cli.hpp"
#include "spog/error.hpp"
#include "spog/serialize.hpp"

namespace spog {
namespace fs = std::filesystem;

namespace {

struct Flags {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  std::optional<std::string> theorem;
  std::optional<std::size_t> iterations;
};

struct Context {
  Flags flags;
  json config;
  fs::path config_dir;
  std::ostream& out;
};

const json kEmpty = json::object();

const json& section(const json& cfg, const char* key) { return cfg.contains(key) ? cfg.at(key) : kEmpty; }

json envelope(const std::string& command, const json& resolved) {
  return {{"schema_version", kSchemaVersion}, {"command", command}, {"config", resolved}};
}

std::string fmt_value(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// ---- dataset ----------------------------------------------------------------

struct LoadedDataset {
  Dataset ds;
  json resolved;
};

LoadedDataset load_data(const Context& ctx) {
  if (!ctx.config.contains("dataset")) throw ValidationError("config: missing \"dataset\" section");
  const json& j = ctx.config.at("dataset");
  check_keys(j, {"manifest", "synth", "seed"}, "dataset");
  if (j.contains("manifest") == j.contains("synth"))
    throw ValidationError("dataset: give exactly one of \"manifest\" or \"synth\"");
  LoadedDataset out;
  if (j.contains("manifest")) {
    if (!j.at("manifest").is_string()) throw ValidationError("dataset.manifest: expected a path");
    fs::path p = j.at("manifest").get<std::string>();
    if (p.is_relative()) p = ctx.config_dir / p;
    out.ds = load_dataset(p);
    out.resolved = {{"manifest", p.string()}};
  } else {
    const SynthParams sp = synth_from_json(j.at("synth"));
    std::uint64_t seed = 0;
    if (j.contains("seed")) {
      if (!j.at("seed").is_number_unsigned()) throw ValidationError("dataset.seed: expected a nonnegative integer");
      seed = j.at("seed").get<std::uint64_t>();
    }
    out.ds = synth_dataset(sp, seed);
    out.resolved = {{"synth", to_json(sp)}, {"seed", seed}};
  }
  validate_dataset(out.ds);
  for (const auto& w : out.ds.warnings) ctx.out << "warning: " << w << "\n";
  return out;
}

InitScheme load_init(const Context& ctx) {
  InitScheme s = init_from_json(section(ctx.config, "init"));
  if (ctx.flags.seed) s.seed = *ctx.flags.seed;
  return s;
}

std::vector<std::size_t> index_list(const json& j, const char* key, const std::string& where,
                                    std::vector<std::size_t> fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_array() || v.empty()) throw ValidationError(where + "." + key + ": expected a nonempty array");
  std::vector<std::size_t> out;
  for (const auto& e : v) {
    if (!e.is_number_unsigned()) throw ValidationError(where + "." + key + ": expected nonnegative integers");
    out.push_back(e.get<std::size_t>());
  }
  return out;
}

// Runs job(i) for i < n on up to `threads` workers.
template <typename F>
void parallel_for(std::size_t n, std::size_t threads, F&& job) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += workers) job(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---- analyze ----------------------------------------------------------------

int cmd_analyze(const Context& ctx) {
  const auto data = load_data(ctx);
  const ModelSpec spec = model_from_json(section(ctx.config, "model"), data.ds.feature_dim(), data.ds.num_classes);
  const InitScheme scheme = load_init(ctx);
  const json& a = section(ctx.config, "analyze");
  check_keys(a, {"depths", "seeds", "gev_target"}, "analyze");
  const auto depths = index_list(a, "depths", "analyze", {spec.depth});
  const std::size_t seeds = a.contains("seeds") && a.at("seeds").is_number_unsigned() ? a.at("seeds").get<std::size_t>()
                                                                                      : (a.contains("seeds") ? 0 : 10);
  if (seeds < 1) throw ValidationError("analyze.seeds must be a positive integer");
  ProfileOptions opts;
  const std::string target = a.value("gev_target", std::string("deep"));
  if (target == "output") opts.gev_target = GevTarget::Output;
  else if (target != "deep") throw ValidationError("analyze.gev_target must be \"deep\" or \"output\"");

  const SpReport report = sp_report(spec, scheme, data.ds, depths, seeds, opts, ctx.flags.threads);

  json resolved = {{"dataset", data.resolved},
                   {"model", to_json(spec)},
                   {"init", to_json(scheme)},
                   {"analyze", {{"depths", depths}, {"seeds", seeds}, {"gev_target", target}}}};
  json doc = envelope("analyze", resolved);
  doc["report"] = to_json(report);

  std::ostringstream csv;
  csv << "arch,depth,scheme,seed,metric,value\n";
  for (const auto& d : report.depths)
    for (std::size_t s = 0; s < seeds; ++s) {
      const std::string prefix = to_string(spec.arch) + "," + std::to_string(d.depth) + "," + report.scheme_id + "," +
                                 std::to_string(scheme.seed + s) + ",";
      csv << prefix << "log10_fsp," << fmt_value(d.fsp_values[s]) << "\n";
      csv << prefix << "log10_bsp," << fmt_value(d.bsp_values[s]) << "\n";
      csv << prefix << "gev," << fmt_value(d.gev_values[s]) << "\n";
    }
  const fs::path dir = ctx.flags.out;
  write_atomic(dir / "report.json", doc.dump(2) + "\n");
  write_atomic(dir / "curves.csv", csv.str());
  for (const auto& d : report.depths)
    ctx.out << "depth " << d.depth << ": log10 fsp " << fmt_value(d.fsp.log10_mean) << ", log10 bsp "
            << fmt_value(d.bsp.log10_mean) << ", gev " << fmt_value(d.gev.mean) << "\n";
  return 0;
}

// ---- nngp -------------------------------------------------------------------

int cmd_nngp(const Context& ctx) {
  const auto data = load_data(ctx);
  const json& j = section(ctx.config, "nngp");
  check_keys(j,
             {"theorem", "sigma2", "sigma2_alt", "activation", "act_alpha", "act_beta", "res_alpha", "res_beta",
              "depth", "method", "nodes", "samples", "seed", "gev_draws"},
             "nngp");
  TheoremInput in;
  in.sigma2 = j.value("sigma2", in.sigma2);
  in.sigma2_alt = j.value("sigma2_alt", in.sigma2_alt);
  in.activation = activation_from_json(j, "nngp");
  in.res_alpha = j.value("res_alpha", in.res_alpha);
  in.res_beta = j.value("res_beta", in.res_beta);
  in.depth = j.value("depth", in.depth);
  in.num_classes = data.ds.num_classes;
  std::optional<std::string> theorem = ctx.flags.theorem;
  if (!theorem && j.contains("theorem")) theorem = j.at("theorem").get<std::string>();

  json resolved = {{"dataset", data.resolved},
                   {"nngp",
                    {{"sigma2", in.sigma2},
                     {"sigma2_alt", in.sigma2_alt},
                     {"activation", in.activation.name()},
                     {"res_alpha", in.res_alpha},
                     {"res_beta", in.res_beta},
                     {"depth", in.depth}}}};
  const fs::path dir = ctx.flags.out;

  if (theorem) {
    std::string id = *theorem;
    std::transform(id.begin(), id.end(), id.begin(), [](unsigned char c) { return std::tolower(c); });
    const TheoremId tid = parse_theorem(id);
    resolved["nngp"]["theorem"] = id;
    const auto report = verify_theorem(tid, data.ds.graph, data.ds.features, in);
    json doc = envelope("nngp", resolved);
    doc["verification"] = to_json(report);
    write_atomic(dir / "verification.json", doc.dump(2) + "\n");
    ctx.out << id << ": " << (report.hypothesis_met ? (report.pass ? "pass" : "FAIL") : "hypothesis unmet");
    if (!report.branch.empty()) ctx.out << " (branch " << report.branch << ")";
    ctx.out << " - " << report.message << "\n";
    return report.pass || !report.hypothesis_met ? 0 : 2;
  }

  KernelMethod method = KernelMethod::default_for(in.activation);
  const std::string m = j.value("method", std::string("default"));
  if (m == "closed_form") method = KernelMethod::closed_form();
  else if (m == "gauss_hermite") method = KernelMethod::gauss_hermite(j.value("nodes", std::size_t{64}));
  else if (m == "monte_carlo")
    method = KernelMethod::monte_carlo(j.value("samples", std::size_t{100000}), j.value("seed", std::uint64_t{0}));
  else if (m != "default") throw ValidationError("nngp.method: unknown method '" + m + "'");
  resolved["nngp"]["method"] = m;

  const auto a_hat = normalized_adjacency(data.ds.graph);
  const auto seq = nngp_vanilla(a_hat, data.ds.features, in.sigma2, in.activation, in.depth, method);
  std::optional<GevSampling> sampling;
  const std::size_t draws = j.value("gev_draws", std::size_t{0});
  if (draws > 0) sampling = GevSampling{draws, j.value("seed", std::uint64_t{0})};
  resolved["nngp"]["gev_draws"] = draws;
  const auto metrics =
      nngp_metrics(seq.states, data.ds.graph, a_hat, data.ds.num_classes, squared_norm(data.ds.features), sampling);
  json doc = envelope("nngp", resolved);
  json gp = json::array();
  for (double v : metrics.gev_proxy) gp.push_back(std::isfinite(v) ? json(v) : json(nullptr));
  doc["nngp"] = {{"fsp", metrics.fsp},
                 {"gev_proxy", gp},
                 {"gev_sampled", metrics.gev_sampled},
                 {"saturated", seq.saturated},
                 {"saturated_at", seq.saturated_at}};
  write_atomic(dir / "nngp.json", doc.dump(2) + "\n");
  ctx.out << "nngp: " << seq.states.size() << " layers" << (seq.saturated ? " (saturated)" : "") << "\n";
  return 0;
}

// ---- spog -------------------------------------------------------------------

int cmd_spog(const Context& ctx) {
  const auto data = load_data(ctx);
  const ModelSpec spec = model_from_json(section(ctx.config, "model"), data.ds.feature_dim(), data.ds.num_classes);
  const InitScheme scheme = load_init(ctx);
  SpogConfig cfg = spog_from_json(section(ctx.config, "spog"), spec.arch);
  if (ctx.flags.seed) cfg.seed = *ctx.flags.seed;
  if (ctx.flags.iterations) cfg.iterations = *ctx.flags.iterations;

  const SpogResult res = spog_search(spec, scheme, data.ds, cfg);
  json resolved = {
      {"dataset", data.resolved}, {"model", to_json(spec)}, {"init", to_json(scheme)}, {"spog", to_json(res.config)}};
  json doc = envelope("spog", resolved);
  doc["result"] = to_json(res);
  json params = envelope("spog", resolved);
  params["params"] = to_json(res.params);
  const fs::path dir = ctx.flags.out;
  write_atomic(dir / "spog.json", doc.dump(2) + "\n");
  write_atomic(dir / "params.json", params.dump() + "\n");
  ctx.out << "spog: " << res.iterations << " iterations (" << to_string(res.stop_reason) << "), objective "
          << fmt_value(res.objective_trace.front()) << " -> " << fmt_value(res.best_objective_trace.back()) << "\n";
  return 0;
}

// ---- train / sweep ----------------------------------------------------------

ModelParams load_params_file(const Context& ctx, const ModelSpec& spec) {
  fs::path p = ctx.config.at("params").get<std::string>();
  if (p.is_relative()) p = ctx.config_dir / p;
  json j = read_json_file(p);
  if (j.contains("params")) j = j.at("params");
  ModelParams params = params_from_json(j);
  if (params.num_scalars() != ModelParams::zeros_like(spec).num_scalars())
    throw ValidationError(p.string() + ": parameters do not match the model");
  return params;
}

int cmd_train(const Context& ctx) {
  const auto data = load_data(ctx);
  const ModelSpec spec = model_from_json(section(ctx.config, "model"), data.ds.feature_dim(), data.ds.num_classes);
  const InitScheme scheme = load_init(ctx);
  TrainConfig cfg = train_from_json(section(ctx.config, "train"), spec.depth);
  if (ctx.flags.seed) cfg.seed = *ctx.flags.seed;
  if (ctx.config.contains("params") && !ctx.config.at("params").is_string())
    throw ValidationError("params: expected a path");
  ModelParams params = ctx.config.contains("params") ? load_params_file(ctx, spec) : initialize_params(spec, scheme);

  const TrainResult res = train(spec, std::move(params), data.ds, cfg);
  json resolved = {
      {"dataset", data.resolved}, {"model", to_json(spec)}, {"init", to_json(scheme)}, {"train", to_json(cfg)}};
  if (ctx.config.contains("params")) resolved["params"] = ctx.config.at("params");
  json doc = envelope("train", resolved);
  doc["result"] = to_json(res);
  write_atomic(fs::path(ctx.flags.out) / "train.json", doc.dump(2) + "\n");
  ctx.out << "train: test accuracy " << fmt_value(res.test_acc) << " at epoch " << res.best_val_epoch
          << (res.diverged ? " (diverged)" : "") << "\n";
  return 0;
}

struct SchemeEntry {
  std::string name;
  InitScheme init;
  std::optional<json> spog;
};

int cmd_sweep(const Context& ctx) {
  const auto data = load_data(ctx);
  const json& model_j = section(ctx.config, "model");
  const ModelSpec base_spec = model_from_json(model_j, data.ds.feature_dim(), data.ds.num_classes);
  const json& sw = section(ctx.config, "sweep");
  check_keys(sw, {"depths", "seeds", "schemes"}, "sweep");
  const auto depths = index_list(sw, "depths", "sweep", {base_spec.depth});
  std::vector<std::size_t> seeds = index_list(sw, "seeds", "sweep", {0});
  if (ctx.flags.seed) seeds = {static_cast<std::size_t>(*ctx.flags.seed)};
  if (!sw.contains("schemes") || !sw.at("schemes").is_array() || sw.at("schemes").empty())
    throw ValidationError("sweep.schemes: expected a nonempty array");

  std::vector<SchemeEntry> schemes;
  for (const auto& s : sw.at("schemes")) {
    check_keys(s, {"name", "init", "spog"}, "sweep.schemes[]");
    SchemeEntry e;
    e.name = s.value("name", std::string());
    if (e.name.empty() || e.name.find(',') != std::string::npos)
      throw ValidationError("sweep.schemes[].name must be a nonempty string without commas");
    e.init = init_from_json(s.contains("init") ? s.at("init") : kEmpty);
    if (s.contains("spog")) {
      e.spog = s.at("spog");
      spog_from_json(*e.spog, base_spec.arch);  // validate early
    }
    schemes.push_back(std::move(e));
  }
  const json& train_j = section(ctx.config, "train");
  for (std::size_t d : depths) {
    ModelSpec spec = base_spec;
    spec.depth = d;
    spec.validate();
    train_from_json(train_j, d);
  }

  struct Job {
    std::size_t depth, scheme, seed;
    TrainResult result;
  };
  std::vector<Job> jobs;
  for (std::size_t d : depths)
    for (std::size_t s = 0; s < schemes.size(); ++s)
      for (std::size_t seed : seeds) jobs.push_back({d, s, seed, {}});

  parallel_for(jobs.size(), ctx.flags.threads, [&](std::size_t i) {
    Job& job = jobs[i];
    ModelSpec spec = base_spec;
    spec.depth = job.depth;
    const SchemeEntry& e = schemes[job.scheme];
    InitScheme init = e.init;
    init.seed = job.seed;
    ModelParams params;
    if (e.spog) {
      SpogConfig sc = spog_from_json(*e.spog, spec.arch);
      sc.seed = job.seed;
      if (ctx.flags.iterations) sc.iterations = *ctx.flags.iterations;
      params = spog_search(spec, init, data.ds, sc).params;
    } else {
      params = initialize_params(spec, init);
    }
    TrainConfig tc = train_from_json(train_j, job.depth);
    tc.seed = job.seed;
    job.result = train(spec, std::move(params), data.ds, tc);
  });

  std::ostringstream csv;
  csv << "arch,depth,scheme,seed,metric,value\n";
  json runs = json::array();
  for (const auto& job : jobs) {
    csv << to_string(base_spec.arch) << "," << job.depth << "," << schemes[job.scheme].name << "," << job.seed
        << ",test_acc," << fmt_value(job.result.test_acc) << "\n";
    runs.push_back({{"arch", to_string(base_spec.arch)},
                    {"depth", job.depth},
                    {"scheme", schemes[job.scheme].name},
                    {"seed", job.seed},
                    {"test_acc", job.result.test_acc},
                    {"best_val_epoch", job.result.best_val_epoch},
                    {"diverged", job.result.diverged}});
  }
  const std::size_t shallow = *std::min_element(depths.begin(), depths.end());
  const std::size_t deep = *std::max_element(depths.begin(), depths.end());
  json degradation = json::object();
  for (std::size_t s = 0; s < schemes.size(); ++s) {
    double lo = 0.0, hi = 0.0;
    std::size_t nlo = 0, nhi = 0;
    for (const auto& job : jobs) {
      if (job.scheme != s) continue;
      if (job.depth == shallow) lo += job.result.test_acc, ++nlo;
      if (job.depth == deep) hi += job.result.test_acc, ++nhi;
    }
    degradation[schemes[s].name] = {{"shallow_depth", shallow},
                                    {"deep_depth", deep},
                                    {"shallow_acc", lo / static_cast<double>(nlo)},
                                    {"deep_acc", hi / static_cast<double>(nhi)},
                                    {"degradation", lo / static_cast<double>(nlo) - hi / static_cast<double>(nhi)}};
    ctx.out << schemes[s].name << ": acc(" << shallow << ") - acc(" << deep << ") = "
            << fmt_value(degradation[schemes[s].name]["degradation"].get<double>()) << "\n";
  }

  json scheme_j = json::array();
  for (const auto& e : schemes) {
    json s = {{"name", e.name}, {"init", to_json(e.init)}};
    if (e.spog) s["spog"] = to_json(spog_from_json(*e.spog, base_spec.arch));
    scheme_j.push_back(s);
  }
  ModelSpec shown = base_spec;
  json resolved = {{"dataset", data.resolved},
                   {"model", to_json(shown)},
                   {"train", train_j},
                   {"sweep", {{"depths", depths}, {"seeds", seeds}, {"schemes", scheme_j}}}};
  json doc = envelope("sweep", resolved);
  doc["runs"] = runs;
  doc["degradation"] = degradation;
  const fs::path dir = ctx.flags.out;
  write_atomic(dir / "sweep.json", doc.dump(2) + "\n");
  write_atomic(dir / "sweep.csv", csv.str());
  return 0;
}

// ---- gen --------------------------------------------------------------------

int cmd_gen(const Context& ctx) {
  const json& j = section(ctx.config, "dataset");
  check_keys(j, {"synth", "seed"}, "dataset");
  if (!j.contains("synth")) throw ValidationError("gen: dataset.synth is required");
  const SynthParams sp = synth_from_json(j.at("synth"));
  std::uint64_t seed = j.value("seed", std::uint64_t{0});
  if (ctx.flags.seed) seed = *ctx.flags.seed;
  const Dataset ds = synth_dataset(sp, seed);
  for (const auto& w : ds.warnings) ctx.out << "warning: " << w << "\n";
  save_dataset(ds, ctx.flags.out);
  ctx.out << "gen: " << ds.num_nodes() << " nodes, " << ds.graph.num_edges() << " edges -> " << ctx.flags.out << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Signal-propagation analysis and initialization search for deep GCNs", "spoginit"};
  app.require_subcommand(1);
  Flags flags;
  std::uint64_t seed = 0;
  std::string theorem;
  std::size_t iterations = 0;
  std::map<std::string, int (*)(const Context&)> handlers = {{"analyze", cmd_analyze}, {"nngp", cmd_nngp},
                                                             {"spog", cmd_spog},       {"train", cmd_train},
                                                             {"sweep", cmd_sweep},     {"gen", cmd_gen}};
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, fn] : handlers) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", flags.config, "JSON config file")->required();
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--seed", seed, "seed override");
    sub->add_option("--threads", flags.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--theorem", theorem, "theorem id (t1, t2, t3, t5, t6)");
    sub->add_option("--iterations", iterations, "search iterations override");
    subs[name] = sub;
  }

  std::vector<std::string> argv_store = {"spoginit"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  std::string command;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) command = name;
  const auto* sub = subs.at(command);
  if (sub->count("--seed")) flags.seed = seed;
  if (sub->count("--theorem")) flags.theorem = theorem;
  if (sub->count("--iterations")) flags.iterations = iterations;

  try {
    const fs::path cfg_path = flags.config;
    json cfg = read_json_file(cfg_path);
    check_keys(cfg, {"dataset", "model", "init", "spog", "train", "analyze", "nngp", "sweep", "params"}, "config");
    Context ctx{flags, cfg, cfg_path.parent_path(), out};
    return handlers.at(command)(ctx);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    err << "error: config: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace spog
