#include "vmm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "vmm/simulate.hpp"

namespace vmm {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

json counters_json(const Counters& c, const LatencyTable& lat) {
  return {{"accesses", c.accesses},
          {"private_hits", c.private_hits},
          {"llc_hits", c.llc_hits},
          {"llc_misses", c.llc_misses},
          {"row_hits", c.row_hits},
          {"row_misses", c.row_misses},
          {"row_conflicts", c.row_conflicts},
          {"cross_app_conflicts", c.cross_app_conflicts},
          {"cross_app_llc_evictions", c.cross_app_llc_evictions},
          {"llc_miss_rate", c.llc_miss_rate()},
          {"row_hit_rate", c.row_hit_rate()},
          {"proxy_cycles", proxy_cycles(c, lat)}};
}

json evidence_json(const AppEvidence& e) {
  return {{"app", e.app},
          {"name", e.name},
          {"category", category_name(e.category)},
          {"hot_pages", e.hot_pages},
          {"wpd", e.wpd}};
}

json thresholds_json(const Thresholds& t) {
  return {{"hot_page_low", t.hot_page_low}, {"hot_page_high", t.hot_page_high},
          {"wpd_low", t.wpd_low},           {"wpd_high", t.wpd_high},
          {"d_ccf_llct", t.d_ccf_llct},     {"d_llch", t.d_llch},
          {"footprint_pages", t.footprint_pages}};
}

json decision_body(const PolicyDecision& d) {
  json groups = json::array();
  for (const auto& g : d.groups) {
    groups.push_back({{"apps", g.apps},
                      {"tag", group_tag_name(g.tag)},
                      {"llc_groups", g.llc_groups},
                      {"colors", g.colors},
                      {"shared_pool", g.shared_pool}});
  }
  json quotas = json::object();
  for (const auto& [app, colors] : d.quotas) quotas[std::to_string(app)] = colors;
  return {{"policy", policy_name(d.policy)}, {"groups", groups}, {"quotas", quotas}};
}

std::vector<AppId> app_ids(const Trace& trace) {
  std::vector<AppId> ids(trace.apps.size());
  for (AppId i = 0; i < ids.size(); ++i) ids[i] = i;
  return ids;
}

}  // namespace

Trace load_workload(const ExperimentConfig& cfg) {
  if (cfg.workload.empty()) throw ConfigError("workload is empty");
  std::vector<Trace> traces;
  for (const auto& src : cfg.workload) {
    if (const auto* t = std::get_if<TraceSource>(&src)) {
      traces.push_back(read_trace(t->path));
    } else if (const auto* pp = std::get_if<PingPongSource>(&src)) {
      traces.push_back(gen_bank_pingpong(pp->pages, cfg.mapping.page_bytes(), cfg.mapping.line_bytes()));
    } else {
      traces.push_back(gen(std::get<ArchetypeParams>(src)));
    }
  }
  if (traces.size() == 1) return std::move(traces.front());
  for (const auto& t : traces) {
    if (t.apps.size() != 1) throw ConfigError("only single-app traces can be mixed");
  }
  return mix(traces, cfg.schedule_k, cfg.hierarchy.cores,
             cfg.schedule_shuffle ? std::optional<std::uint64_t>(cfg.seed) : std::nullopt);
}

unsigned effective_core_count(const ExperimentConfig& cfg, std::size_t apps) {
  if (cfg.core_count) return *cfg.core_count;
  return apps <= 4 ? 4 : 8;
}

AdviseOptions advise_options(const ExperimentConfig& cfg, std::size_t apps) {
  AdviseOptions o;
  o.sampler = cfg.sampler;
  o.thresholds = cfg.thresholds;
  o.plan.small_share_llc_groups = cfg.small_share_llc_groups;
  o.overrides = cfg.overrides;
  o.multithreaded = cfg.multithreaded;
  o.core_count = effective_core_count(cfg, apps);
  return o;
}

RunResult run_decision(const Trace& trace, const PolicySpec& spec, const PolicyDecision& decision,
                       const ExperimentConfig& cfg) {
  RunResult r;
  r.spec = spec;
  r.decision = decision;
  PageAllocator alloc(cfg.mapping.total_pages(), spec, cfg.mapping, {cfg.allow_fallback, cfg.seed});
  apply_decision(decision, alloc);
  Hierarchy h(cfg.hierarchy, cfg.mapping);
  r.metrics = run_trace(trace, alloc, h);
  r.allocations = alloc.log();
  return r;
}

RunResult run_experiment(const ExperimentConfig& cfg, const Trace& trace) {
  if (cfg.policy) {
    const PolicySpec spec = policy_spec(*cfg.policy, cfg.mapping, cfg.overrides);
    return run_decision(trace, spec, even_split(app_ids(trace), *cfg.policy, spec), cfg);
  }
  Advice advice = advise(trace, cfg.mapping, advise_options(cfg, trace.apps.size()));
  const PolicySpec spec = policy_spec(advice.decision.policy, cfg.mapping, cfg.overrides);
  RunResult r = run_decision(trace, spec, advice.decision, cfg);
  r.advice = std::move(advice);
  return r;
}

SweepReport run_sweep(const ExperimentConfig& cfg, const Trace& trace) {
  SweepReport report;
  report.apps = trace.apps;
  report.advice = advise(trace, cfg.mapping, advise_options(cfg, trace.apps.size()));
  report.pdt_policy = report.advice.decision.policy;

  PlanOptions plan;
  plan.small_share_llc_groups = cfg.small_share_llc_groups;
  report.cells.resize(kAllPolicies.size());
  auto run_cell = [&](std::size_t i) {
    SweepCell& cell = report.cells[i];
    cell.policy = kAllPolicies[i];
    try {
      const PolicySpec spec = policy_spec(cell.policy, cfg.mapping, cfg.overrides);
      PolicyDecision d;
      try {
        d = plan_quotas(report.advice.profile, cell.policy, spec, plan);
        cell.planned = true;
      } catch (const PlanningError&) {
        d = even_split(app_ids(trace), cell.policy, spec);
      }
      const RunResult r = run_decision(trace, spec, d, cfg);
      cell.global = r.metrics.global;
      cell.proxy_cycles = proxy_cycles(cell.global, cfg.hierarchy.latency);
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  };

  unsigned workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(report.cells.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < report.cells.size(); ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < report.cells.size(); i = next++) run_cell(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  const SweepCell* best = nullptr;
  const SweepCell* pdt = nullptr;
  for (const auto& c : report.cells) {
    if (!c.ok) continue;
    if (!best || c.proxy_cycles < best->proxy_cycles) best = &c;
    if (c.policy == report.pdt_policy) pdt = &c;
  }
  if (best) report.best_policy = best->policy;
  if (best && pdt) {
    report.agreement = pdt->proxy_cycles <= best->proxy_cycles;
    report.pdt_gap = best->proxy_cycles > 0 ? (pdt->proxy_cycles - best->proxy_cycles) / best->proxy_cycles : 0.0;
  }
  return report;
}

std::string metrics_json(const Metrics& m, const LatencyTable& lat, const std::vector<std::string>& apps,
                         PolicyKind policy) {
  json j = counters_json(m.global, lat);
  j["policy"] = policy_name(policy);
  json per_app = json::array();
  for (std::size_t i = 0; i < m.per_app.size(); ++i) {
    json a = counters_json(m.per_app[i], lat);
    a["app"] = i;
    a["name"] = i < apps.size() ? apps[i] : std::to_string(i);
    per_app.push_back(std::move(a));
  }
  j["per_app"] = per_app;
  j["epochs"] = m.epochs.size();
  return j.dump(2) + "\n";
}

std::string epochs_csv(const Metrics& m, const LatencyTable& lat) {
  std::ostringstream out;
  out << "epoch,accesses,private_hits,llc_hits,llc_misses,row_hits,row_misses,row_conflicts,"
         "cross_app_conflicts,cross_app_llc_evictions,proxy_cycles\n";
  for (std::size_t i = 0; i < m.epochs.size(); ++i) {
    const Counters& c = m.epochs[i];
    out << i << ',' << c.accesses << ',' << c.private_hits << ',' << c.llc_hits << ',' << c.llc_misses << ','
        << c.row_hits << ',' << c.row_misses << ',' << c.row_conflicts << ',' << c.cross_app_conflicts << ','
        << c.cross_app_llc_evictions << ',' << num(proxy_cycles(c, lat)) << '\n';
  }
  return out.str();
}

std::string alloc_csv(const std::vector<AllocationRecord>& log) {
  std::ostringstream out;
  out << "app_id,vpn,pfn,color,llc_group,bank_group\n";
  for (const auto& r : log) {
    out << r.app << ',' << r.vpn << ',' << r.frame.pfn << ',' << r.color << ',' << r.groups.llc_group << ','
        << r.groups.bank_group << '\n';
  }
  return out.str();
}

std::string decision_json(const PolicyDecision& d, const std::vector<AppEvidence>& evidence) {
  json j = decision_body(d);
  json ev = json::array();
  for (const auto& e : evidence) ev.push_back(evidence_json(e));
  j["evidence"] = ev;
  return j.dump(2) + "\n";
}

std::string classification_json(const std::vector<AppEvidence>& evidence, const Thresholds& t,
                                 const std::vector<std::optional<OfflineResult>>& offline) {
  json apps = json::array();
  for (std::size_t i = 0; i < evidence.size(); ++i) {
    json a = evidence_json(evidence[i]);
    a["thresholds_used"] = thresholds_json(t);
    if (i < offline.size() && offline[i]) {
      const OfflineResult& o = *offline[i];
      a["offline"] = {{"category", category_name(o.category)},
                      {"degradation", o.degradation},
                      {"cycles_full", o.cycles_full},
                      {"cycles_eighth", o.cycles_eighth},
                      {"footprint_pages", o.footprint_pages}};
    }
    apps.push_back(std::move(a));
  }
  return json{{"apps", apps}}.dump(2) + "\n";
}

std::string sweep_json(const SweepReport& r) {
  json cells = json::array();
  for (const auto& c : r.cells) {
    json cell = {{"policy", policy_name(c.policy)}, {"ok", c.ok}};
    if (c.ok) {
      cell["planned"] = c.planned;
      cell["metrics"] = counters_json(c.global, LatencyTable{});
      cell["proxy_cycles"] = c.proxy_cycles;
      cell["metrics"]["proxy_cycles"] = c.proxy_cycles;
    } else {
      cell["error"] = c.error;
    }
    cells.push_back(std::move(cell));
  }
  json ev = json::array();
  for (const auto& e : r.advice.evidence) ev.push_back(evidence_json(e));
  json j = {{"apps", r.apps},
            {"cells", cells},
            {"pdt_policy", policy_name(r.pdt_policy)},
            {"agreement", r.agreement},
            {"decision", decision_body(r.advice.decision)},
            {"evidence", ev}};
  j["best_policy"] = r.best_policy ? json(policy_name(*r.best_policy)) : json(nullptr);
  j["pdt_gap"] = r.pdt_gap ? json(*r.pdt_gap) : json(nullptr);
  return j.dump(2) + "\n";
}

std::string sweep_csv(const SweepReport& r) {
  std::ostringstream out;
  out << "policy,status,planned,private_hits,llc_hits,llc_misses,row_hits,row_misses,row_conflicts,"
         "cross_app_conflicts,cross_app_llc_evictions,proxy_cycles,best,pdt\n";
  for (const auto& c : r.cells) {
    out << policy_name(c.policy) << ',' << (c.ok ? "ok" : "failed") << ',' << (c.planned ? 1 : 0) << ','
        << c.global.private_hits << ',' << c.global.llc_hits << ',' << c.global.llc_misses << ','
        << c.global.row_hits << ',' << c.global.row_misses << ',' << c.global.row_conflicts << ','
        << c.global.cross_app_conflicts << ',' << c.global.cross_app_llc_evictions << ','
        << (c.ok ? num(c.proxy_cycles) : "") << ',' << (r.best_policy == c.policy ? 1 : 0) << ','
        << (r.pdt_policy == c.policy ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace vmm
