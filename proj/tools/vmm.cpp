// Command-line driver: gen, run, classify, advise, sweep.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "vmm/experiment.hpp"

namespace fs = std::filesystem;
using namespace vmm;

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kRuntime = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes every file or none: on failure the files already written are
/// removed again.
void write_outputs(const fs::path& dir, const std::map<std::string, std::string>& files) {
  std::vector<fs::path> written;
  try {
    fs::create_directories(dir);
    for (const auto& [name, content] : files) {
      const fs::path p = dir / name;
      std::ofstream out(p, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + p.string());
      written.push_back(p);
      out << content;
      out.close();
      if (!out) throw std::runtime_error("I/O error while writing " + p.string());
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
    throw;
  }
}

struct Common {
  std::string config;
  std::string policy;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool with_policy) {
  cmd->add_option("--config", c.config, "Experiment config (JSON)");
  if (with_policy) cmd->add_option("--policy", c.policy, "interleave, bank-only, a-vp, b-vp, c-vp, random or auto");
  cmd->add_option("--seed", c.seed, "Seed replacing the config's");
  cmd->add_option("--out", c.out, "Output directory");
}

ExperimentConfig resolve(const Common& c) {
  if (c.config.empty()) throw UsageError("--config is required");
  ExperimentConfig cfg = load_config(c.config, c.seed);
  if (!c.policy.empty()) {
    if (c.policy == "auto") {
      cfg.policy.reset();
    } else {
      const auto k = parse_policy(c.policy);
      if (!k) throw UsageError("unknown policy '" + c.policy + "'");
      cfg.policy = *k;
    }
  }
  if (!c.out.empty()) cfg.out = c.out;
  if (cfg.workload.empty()) throw UsageError("workload list is empty");
  return cfg;
}

struct GenArgs {
  std::string kind;
  bool pingpong = false;
  std::optional<std::uint64_t> pages, accesses, seed, base;
  std::optional<std::string> reuse, app;
  std::optional<double> zipf_s;
  std::optional<std::uint32_t> stride;
  std::string output;
};

void cmd_gen(const GenArgs& a) {
  Trace t;
  if (a.pingpong) {
    if (!a.kind.empty()) throw UsageError("--pingpong and --kind are exclusive");
    t = gen_bank_pingpong(a.pages.value_or(2048));
  } else {
    if (a.kind.empty()) throw UsageError("--kind is required");
    const auto kind = parse_archetype(a.kind);
    if (!kind) throw UsageError("unknown kind '" + a.kind + "'");
    ArchetypeParams p = canonical_params(*kind, a.seed.value_or(1));
    if (a.pages) p.working_set_pages = *a.pages;
    if (a.accesses) p.access_count = *a.accesses;
    if (a.reuse) {
      const auto r = parse_reuse(*a.reuse);
      if (!r) throw UsageError("unknown reuse '" + *a.reuse + "'");
      p.reuse = *r;
    }
    if (a.zipf_s) p.zipf_s = *a.zipf_s;
    if (a.stride) p.stride_bytes = *a.stride;
    if (a.app) p.app = *a.app;
    if (a.base) p.base_vaddr = *a.base;
    try {
      validate(p);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    t = gen(p);
  }
  std::ostringstream text;
  write_trace(text, t);
  const fs::path out(a.output);
  write_outputs(out.parent_path().empty() ? fs::path(".") : out.parent_path(),
                {{out.filename().string(), text.str()}});
}

void cmd_run(const Common& c) {
  const ExperimentConfig cfg = resolve(c);
  const Trace trace = load_workload(cfg);
  const RunResult r = run_experiment(cfg, trace);
  std::map<std::string, std::string> files;
  files["metrics.json"] = metrics_json(r.metrics, cfg.hierarchy.latency, trace.apps, r.decision.policy);
  files["epochs.csv"] = epochs_csv(r.metrics, cfg.hierarchy.latency);
  files["alloc.csv"] = alloc_csv(r.allocations);
  files["decision.json"] = decision_json(r.decision, r.advice ? r.advice->evidence : std::vector<AppEvidence>{});
  write_outputs(cfg.out, files);
  std::cout << files["metrics.json"];
}

void cmd_classify(const Common& c, bool offline) {
  const ExperimentConfig cfg = resolve(c);
  const Trace trace = load_workload(cfg);
  const Advice a = advise(trace, cfg.mapping, advise_options(cfg, trace.apps.size()));
  std::vector<std::optional<OfflineResult>> off(trace.apps.size());
  if (offline) {
    for (std::uint32_t i = 0; i < trace.apps.size(); ++i) {
      off[i] = classify_offline(project_app(trace, i), cfg.mapping, cfg.hierarchy, cfg.thresholds);
    }
  }
  const std::string json = classification_json(a.evidence, cfg.thresholds, off);
  write_outputs(cfg.out, {{"classification.json", json}});
  std::cout << json;
}

struct AdviseArgs {
  std::string profile;
  bool multithreaded = false;
  std::optional<unsigned> cores;
};

void cmd_advise(const Common& c, const AdviseArgs& a) {
  std::string json;
  fs::path out = c.out;
  if (!a.profile.empty()) {
    if (!c.config.empty()) throw UsageError("--profile and --config are exclusive");
    WorkloadProfile p;
    std::stringstream list(a.profile);
    std::string item;
    while (std::getline(list, item, ',')) {
      const auto cat = parse_category(item);
      if (!cat) throw UsageError("unknown category '" + item + "'");
      const auto id = static_cast<AppId>(p.apps.size());
      p.apps.push_back({id, "app" + std::to_string(id), *cat});
    }
    if (p.apps.empty()) throw UsageError("--profile lists no category");
    p.multithreaded = a.multithreaded;
    p.core_count = a.cores.value_or(p.apps.size() <= 4 ? 4 : 8);
    try {
      p.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    const Advice adv = advise(p, AddressMapping{});
    std::vector<AppEvidence> ev;
    for (const auto& app : p.apps) ev.push_back({app.app, app.name, app.category, {}, 0.0});
    json = decision_json(adv.decision, ev);
  } else {
    ExperimentConfig cfg = resolve(c);
    if (a.multithreaded) cfg.multithreaded = true;
    if (a.cores) cfg.core_count = *a.cores;
    cfg.validate();
    const Trace trace = load_workload(cfg);
    const Advice adv = advise(trace, cfg.mapping, advise_options(cfg, trace.apps.size()));
    json = decision_json(adv.decision, adv.evidence);
    out = cfg.out;
  }
  if (!out.empty()) write_outputs(out, {{"decision.json", json}});
  std::cout << json;
}

void cmd_sweep(const Common& c, std::optional<unsigned> threads) {
  ExperimentConfig cfg = resolve(c);
  if (threads) cfg.threads = *threads;
  const Trace trace = load_workload(cfg);
  const SweepReport r = run_sweep(cfg, trace);
  const std::string csv = sweep_csv(r);
  write_outputs(cfg.out, {{"sweep.csv", csv}, {"sweep.json", sweep_json(r)}});
  std::cout << csv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vertical memory partitioning simulator"};
  app.require_subcommand(1);

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic trace");
  gen->add_option("--kind", gen_args.kind, "ccf, llct, llcm or llch");
  gen->add_flag("--pingpong", gen_args.pingpong, "Two-app bank ping-pong trace");
  gen->add_option("--pages", gen_args.pages, "Working-set pages");
  gen->add_option("--accesses", gen_args.accesses, "Trace length for loop and zipf reuse");
  gen->add_option("--reuse", gen_args.reuse, "none, loop or zipf");
  gen->add_option("--zipf-s", gen_args.zipf_s, "Zipf exponent");
  gen->add_option("--stride", gen_args.stride, "Bytes between accesses within a page");
  gen->add_option("--seed", gen_args.seed, "Generator seed");
  gen->add_option("--app", gen_args.app, "App name");
  gen->add_option("--base", gen_args.base, "Base virtual address");
  gen->add_option("-o,--output", gen_args.output, "Trace file")->required();

  Common run_c, cls_c, adv_c, sweep_c;
  auto* run = app.add_subcommand("run", "Simulate a workload under one policy");
  add_common(run, run_c, true);

  bool offline = false;
  auto* cls = app.add_subcommand("classify", "Classify each app of a workload");
  add_common(cls, cls_c, false);
  cls->add_flag("--offline", offline, "Also run the offline quota probe");

  AdviseArgs adv_args;
  auto* adv = app.add_subcommand("advise", "Choose a policy and plan quotas");
  add_common(adv, adv_c, false);
  adv->add_option("--profile", adv_args.profile, "Comma-separated categories, e.g. LLCH,LLCM");
  adv->add_flag("--multithreaded", adv_args.multithreaded, "Workload is one multithreaded program");
  adv->add_option("--cores", adv_args.cores, "Core count, 4 or 8");

  std::optional<unsigned> threads;
  auto* sweep = app.add_subcommand("sweep", "Run every policy on one workload");
  add_common(sweep, sweep_c, false);
  sweep->add_option("--threads", threads, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) cmd_gen(gen_args);
    if (*run) cmd_run(run_c);
    if (*cls) cmd_classify(cls_c, offline);
    if (*adv) cmd_advise(adv_c, adv_args);
    if (*sweep) cmd_sweep(sweep_c, threads);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}
