#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vmm/advisor.hpp"
#include "vmm/config.hpp"
#include "vmm/hierarchy.hpp"

namespace vmm {

/// Builds the trace the config describes. Single-app sources are mixed
/// round-robin (schedule_k records per turn); a lone multi-app source is used
/// as-is.
Trace load_workload(const ExperimentConfig& cfg);

/// Core count for the decision tree: the configured value, else 4 for up to
/// four apps and 8 beyond.
unsigned effective_core_count(const ExperimentConfig& cfg, std::size_t apps);

AdviseOptions advise_options(const ExperimentConfig& cfg, std::size_t apps);

struct RunResult {
  PolicySpec spec;
  PolicyDecision decision;
  std::optional<Advice> advice;  // set when the policy was chosen automatically
  Metrics metrics;
  std::vector<AllocationRecord> allocations;
};

/// Allocates and replays `trace` under a fixed decision.
RunResult run_decision(const Trace& trace, const PolicySpec& spec, const PolicyDecision& decision,
                       const ExperimentConfig& cfg);

/// With an explicit policy the colors are split evenly among the apps;
/// otherwise the apps are classified online and the advisor's plan is used.
RunResult run_experiment(const ExperimentConfig& cfg, const Trace& trace);

struct SweepCell {
  PolicyKind policy;
  bool ok = false;
  std::string error;
  bool planned = false;  // quotas from the advisor's plan rather than an even split
  Counters global;
  double proxy_cycles = 0;
};

struct SweepReport {
  std::vector<std::string> apps;
  Advice advice;
  std::vector<SweepCell> cells;  // one per policy, in kAllPolicies order
  std::optional<PolicyKind> best_policy;
  PolicyKind pdt_policy = PolicyKind::Interleaving;
  bool agreement = false;          // PDT picked the best policy
  std::optional<double> pdt_gap;   // relative proxy-cycle excess over the best
};

/// Runs every policy on the same trace. Each policy gets the advisor's plan
/// for the classified profile, or an even split when the plan does not fit.
/// Cells run on up to cfg.threads workers; a failing cell is reported, not
/// thrown.
SweepReport run_sweep(const ExperimentConfig& cfg, const Trace& trace);

// Report serialization. All outputs are deterministic for equal inputs.
std::string metrics_json(const Metrics& m, const LatencyTable& lat, const std::vector<std::string>& apps,
                         PolicyKind policy);
std::string epochs_csv(const Metrics& m, const LatencyTable& lat);
std::string alloc_csv(const std::vector<AllocationRecord>& log);
std::string decision_json(const PolicyDecision& d, const std::vector<AppEvidence>& evidence);
std::string classification_json(const std::vector<AppEvidence>& evidence, const Thresholds& t,
                                 const std::vector<std::optional<OfflineResult>>& offline = {});
std::string sweep_json(const SweepReport& r);
std::string sweep_csv(const SweepReport& r);

}  // namespace vmm
