#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vmm/allocator.hpp"
#include "vmm/classifier.hpp"
#include "vmm/policies.hpp"

namespace vmm {

struct AppProfile {
  AppId app = 0;
  std::string name;
  Category category = Category::CCF;
};

struct WorkloadProfile {
  std::vector<AppProfile> apps;
  bool multithreaded = false;
  unsigned core_count = 4;

  void validate() const;
};

enum class GroupTag { CacheShare, SmallShareLlct, SmallShareCcf, None };
std::string_view group_tag_name(GroupTag tag);  // cache-share, small-share-llct, ...

struct QuotaGroup {
  GroupTag tag = GroupTag::None;
  std::vector<AppId> apps;
  std::vector<std::uint32_t> llc_groups;
  std::vector<ColorId> colors;  // union of the members' quotas
  /// True when every member holds the same colors, so the allocator can
  /// coalesce them into one shared pool.
  bool shared_pool = true;
};

struct PolicyDecision {
  PolicyKind policy = PolicyKind::Interleaving;
  std::map<AppId, std::vector<ColorId>> quotas;
  std::vector<QuotaGroup> groups;

  /// Checks the decision's structural invariants against `spec`; returns an
  /// empty string when they hold.
  std::string check(const PolicySpec& spec) const;
};

/// Ordered rules, first match wins:
///   multithreaded     -> random
///   any LLCT          -> a-vp on 4 cores, c-vp on 8
///   any LLCH          -> bank-only
///   any LLCM          -> a-vp on 4 cores, b-vp on 8
///   otherwise (CCF)   -> interleave
PolicyKind decide_policy(const WorkloadProfile& p);

struct PlanOptions {
  /// LLC color groups granted to each small-share group.
  std::uint32_t small_share_llc_groups = 1;
};

class PlanningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Coalesces LLCH and LLCM apps into one cache-share group and LLCT and CCF
/// apps into their own small-share groups. Small shares take LLC groups from
/// the top (LLCT first), the cache share takes the rest. Under policies that
/// split banks (b-vp, bank-only) cache-share members get disjoint bank groups
/// round-robin. Non-partitioning policies get one untagged group with every
/// color.
PolicyDecision plan_quotas(const WorkloadProfile& p, PolicyKind policy, const PolicySpec& spec,
                           const PlanOptions& opts = {});

/// Splits the colors round-robin among the apps in profile order; used when
/// a policy is forced without a plan.
PolicyDecision even_split(const std::vector<AppId>& apps, PolicyKind policy, const PolicySpec& spec);

/// Loads a decision into an allocator built for the same policy.
void apply_decision(const PolicyDecision& d, PageAllocator& alloc);

struct AppEvidence {
  AppId app = 0;
  std::string name;
  Category category = Category::CCF;
  std::vector<std::uint64_t> hot_pages;
  double wpd = 0.0;
};

struct Advice {
  WorkloadProfile profile;
  PolicyDecision decision;
  std::vector<AppEvidence> evidence;  // empty for profile-only input
};

struct AdviseOptions {
  SamplerConfig sampler;
  Thresholds thresholds = Thresholds::defaults();
  PlanOptions plan;
  PolicyOverrides overrides;
  bool multithreaded = false;
  unsigned core_count = 4;
};

/// decide_policy followed by plan_quotas.
Advice advise(const WorkloadProfile& profile, const AddressMapping& m,
              const PolicyOverrides& overrides = {}, const PlanOptions& plan = {});

/// Classifies every app of `trace` online from its own reference stream,
/// then advises on the resulting profile.
Advice advise(const Trace& trace, const AddressMapping& m, const AdviseOptions& opts);

}  // namespace vmm
