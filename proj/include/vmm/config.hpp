#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "vmm/classifier.hpp"
#include "vmm/hierarchy.hpp"
#include "vmm/mapping.hpp"
#include "vmm/policies.hpp"
#include "vmm/workloads.hpp"

namespace vmm {

/// Invalid or unreadable experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TraceSource {
  std::filesystem::path path;
};

struct PingPongSource {
  std::uint64_t pages = 2048;
};

using WorkloadSource = std::variant<TraceSource, ArchetypeParams, PingPongSource>;

struct ExperimentConfig {
  AddressMapping mapping;
  HierarchyConfig hierarchy;
  SamplerConfig sampler;
  Thresholds thresholds = Thresholds::defaults();
  std::vector<WorkloadSource> workload;
  unsigned schedule_k = 1;        // records per turn when mixing
  bool schedule_shuffle = true;   // draw a fresh app order every round
  std::optional<PolicyKind> policy;  // empty means "auto"
  std::uint64_t seed = 1;
  std::optional<unsigned> core_count;  // 4 or 8; derived from app count if unset
  bool multithreaded = false;
  bool allow_fallback = false;
  PolicyOverrides overrides;
  std::uint32_t small_share_llc_groups = 1;
  unsigned threads = 0;  // sweep workers; 0 picks the hardware concurrency
  std::filesystem::path out = "out";

  /// Throws ConfigError on any inconsistency.
  void validate() const;
};

/// Parses a JSON document. Relative trace paths resolve against `base_dir`.
/// Every key is optional; unknown keys are rejected. `seed` replaces the
/// document's seed before archetype seeds are derived from it.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {},
                              std::optional<std::uint64_t> seed = {});
ExperimentConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed = {});

/// The fully expanded configuration, every default written out.
std::string dump_config(const ExperimentConfig& cfg);

}  // namespace vmm
