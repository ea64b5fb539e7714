#include "vmm/advisor.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "vmm/workloads.hpp"

namespace vmm {

namespace {

bool any_of_category(const WorkloadProfile& p, Category c) {
  return std::any_of(p.apps.begin(), p.apps.end(), [c](const AppProfile& a) { return a.category == c; });
}

std::vector<ColorId> colors_in_llc_groups(const PolicySpec& spec, const std::vector<std::uint32_t>& groups) {
  std::vector<ColorId> out;
  for (ColorId c = 0; c < spec.page_colors; ++c) {
    if (std::find(groups.begin(), groups.end(), project(spec, c).llc_group) != groups.end()) {
      out.push_back(c);
    }
  }
  return out;
}

std::vector<std::uint32_t> iota_groups(std::uint32_t first, std::uint32_t count) {
  std::vector<std::uint32_t> out(count);
  for (std::uint32_t i = 0; i < count; ++i) out[i] = first + i;
  return out;
}

std::vector<std::uint32_t> llc_groups_of(const PolicySpec& spec, const std::vector<ColorId>& colors) {
  std::set<std::uint32_t> groups;
  for (ColorId c : colors) groups.insert(project(spec, c).llc_group);
  return {groups.begin(), groups.end()};
}

PolicyDecision unconstrained(const std::vector<AppId>& apps, PolicyKind policy, const PolicySpec& spec) {
  PolicyDecision d;
  d.policy = policy;
  QuotaGroup g;
  g.tag = GroupTag::None;
  g.apps = apps;
  for (ColorId c = 0; c < spec.page_colors; ++c) g.colors.push_back(c);
  g.llc_groups = iota_groups(0, spec.llc_groups);
  for (AppId a : apps) d.quotas[a] = g.colors;
  d.groups.push_back(std::move(g));
  return d;
}

}  // namespace

void WorkloadProfile::validate() const {
  if (apps.empty()) throw std::invalid_argument("workload profile has no apps");
  if (core_count != 4 && core_count != 8) throw std::invalid_argument("core_count must be 4 or 8");
  std::set<AppId> ids;
  for (const auto& a : apps) {
    if (!ids.insert(a.app).second) throw std::invalid_argument("duplicate app id in profile");
  }
}

std::string_view group_tag_name(GroupTag tag) {
  switch (tag) {
    case GroupTag::CacheShare: return "cache-share";
    case GroupTag::SmallShareLlct: return "small-share-llct";
    case GroupTag::SmallShareCcf: return "small-share-ccf";
    case GroupTag::None: return "none";
  }
  return "?";
}

PolicyKind decide_policy(const WorkloadProfile& p) {
  p.validate();
  const bool eight = p.core_count == 8;
  if (p.multithreaded) return PolicyKind::RandomInterleave;
  if (any_of_category(p, Category::LLCT)) return eight ? PolicyKind::CVP : PolicyKind::AVP;
  if (any_of_category(p, Category::LLCH)) return PolicyKind::BankOnly;
  if (any_of_category(p, Category::LLCM)) return eight ? PolicyKind::BVP : PolicyKind::AVP;
  return PolicyKind::Interleaving;
}

PolicyDecision plan_quotas(const WorkloadProfile& p, PolicyKind policy, const PolicySpec& spec,
                           const PlanOptions& opts) {
  p.validate();
  if (spec.kind != policy) throw std::invalid_argument("policy spec does not match the policy");
  std::vector<AppId> all;
  for (const auto& a : p.apps) all.push_back(a.app);
  if (!spec.partitioning) return unconstrained(all, policy, spec);
  if (opts.small_share_llc_groups == 0) throw std::invalid_argument("small share must hold an LLC group");

  QuotaGroup cache{GroupTag::CacheShare, {}, {}, {}, true};
  QuotaGroup llct{GroupTag::SmallShareLlct, {}, {}, {}, true};
  QuotaGroup ccf{GroupTag::SmallShareCcf, {}, {}, {}, true};
  for (const auto& a : p.apps) {
    switch (a.category) {
      case Category::LLCH:
      case Category::LLCM: cache.apps.push_back(a.app); break;
      case Category::LLCT: llct.apps.push_back(a.app); break;
      case Category::CCF: ccf.apps.push_back(a.app); break;
    }
  }

  const std::uint32_t k = opts.small_share_llc_groups;
  const std::uint32_t n_small = (llct.apps.empty() ? 0 : 1) + (ccf.apps.empty() ? 0 : 1);
  const std::uint32_t needed = n_small * k + (cache.apps.empty() ? 0 : 1);
  if (needed > spec.llc_groups) {
    throw PlanningError(std::string(policy_name(policy)) + " has " + std::to_string(spec.llc_groups) +
                        " LLC groups but the plan needs " + std::to_string(needed));
  }

  PolicyDecision d;
  d.policy = policy;
  std::uint32_t next = spec.llc_groups - n_small * k;
  if (!cache.apps.empty()) cache.llc_groups = iota_groups(0, next);
  for (QuotaGroup* g : {&llct, &ccf}) {
    if (g->apps.empty()) continue;
    g->llc_groups = iota_groups(next, k);
    next += k;
  }

  for (QuotaGroup* g : {&cache, &llct, &ccf}) {
    if (g->apps.empty()) continue;
    g->colors = colors_in_llc_groups(spec, g->llc_groups);
    for (AppId a : g->apps) d.quotas[a] = g->colors;
  }

  const bool split_banks = policy == PolicyKind::BVP || policy == PolicyKind::BankOnly;
  if (split_banks && cache.apps.size() > 1) {
    std::set<std::uint32_t> bank_set;
    for (ColorId c : cache.colors) bank_set.insert(project(spec, c).bank_group);
    const std::vector<std::uint32_t> banks(bank_set.begin(), bank_set.end());
    const std::size_t n = cache.apps.size();
    for (std::size_t i = 0; i < n; ++i) {
      std::set<std::uint32_t> mine;
      if (banks.size() >= n) {
        for (std::size_t j = i; j < banks.size(); j += n) mine.insert(banks[j]);
      } else {
        mine.insert(banks[i % banks.size()]);
      }
      std::vector<ColorId> colors;
      for (ColorId c : cache.colors) {
        if (mine.count(project(spec, c).bank_group)) colors.push_back(c);
      }
      d.quotas[cache.apps[i]] = std::move(colors);
    }
    cache.shared_pool = false;
  }

  for (QuotaGroup* g : {&cache, &llct, &ccf}) {
    if (!g->apps.empty()) d.groups.push_back(std::move(*g));
  }
  return d;
}

PolicyDecision even_split(const std::vector<AppId>& apps, PolicyKind policy, const PolicySpec& spec) {
  if (apps.empty()) throw std::invalid_argument("no apps to split colors among");
  if (!spec.partitioning) return unconstrained(apps, policy, spec);
  PolicyDecision d;
  d.policy = policy;
  const std::size_t n = apps.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<ColorId> colors;
    if (n <= spec.page_colors) {
      for (ColorId c = static_cast<ColorId>(i); c < spec.page_colors; c += static_cast<ColorId>(n)) {
        colors.push_back(c);
      }
    } else {
      colors.push_back(static_cast<ColorId>(i % spec.page_colors));
    }
    QuotaGroup g{GroupTag::None, {apps[i]}, llc_groups_of(spec, colors), colors, true};
    d.quotas[apps[i]] = colors;
    d.groups.push_back(std::move(g));
  }
  return d;
}

std::string PolicyDecision::check(const PolicySpec& spec) const {
  std::ostringstream err;
  std::set<AppId> grouped;
  for (const auto& g : groups) {
    for (AppId a : g.apps) {
      if (!grouped.insert(a).second) err << "app " << a << " in several groups; ";
      if (!quotas.count(a)) err << "grouped app " << a << " has no quota; ";
    }
    if (g.shared_pool) {
      for (AppId a : g.apps) {
        if (quotas.count(a) && quotas.at(a) != g.colors) err << "app " << a << " differs from its pool; ";
      }
    }
  }
  for (const auto& [app, colors] : quotas) {
    if (colors.empty()) err << "app " << app << " has an empty quota; ";
    for (ColorId c : colors) {
      if (c >= spec.page_colors) err << "app " << app << " holds unknown color " << c << "; ";
    }
    if (!grouped.count(app)) err << "app " << app << " belongs to no group; ";
  }
  return err.str();
}

void apply_decision(const PolicyDecision& d, PageAllocator& alloc) {
  if (alloc.spec().kind != d.policy) throw std::invalid_argument("allocator runs a different policy");
  for (const auto& [app, colors] : d.quotas) alloc.assign_quota(app, colors);
  std::vector<std::vector<AppId>> pools;
  for (const auto& g : d.groups) {
    if (g.shared_pool && g.apps.size() > 1) pools.push_back(g.apps);
  }
  if (!pools.empty()) alloc.coalesce(pools);
}

Advice advise(const WorkloadProfile& profile, const AddressMapping& m, const PolicyOverrides& overrides,
              const PlanOptions& plan) {
  Advice a;
  a.profile = profile;
  const PolicyKind k = decide_policy(profile);
  a.decision = plan_quotas(profile, k, policy_spec(k, m, overrides), plan);
  return a;
}

Advice advise(const Trace& trace, const AddressMapping& m, const AdviseOptions& opts) {
  if (trace.apps.empty()) throw std::invalid_argument("no apps to advise on");
  WorkloadProfile profile;
  profile.multithreaded = opts.multithreaded;
  profile.core_count = opts.core_count;
  std::vector<AppEvidence> evidence;
  for (std::uint32_t app = 0; app < trace.apps.size(); ++app) {
    const OnlineEvidence ev = sample_trace(project_app(trace, app), opts.sampler, m);
    const Category c = classify_online(ev, opts.thresholds);
    profile.apps.push_back({app, trace.apps[app], c});
    evidence.push_back({app, trace.apps[app], c, ev.hot_pages, ev.wpd});
  }
  Advice a = advise(profile, m, opts.overrides, opts.plan);
  a.evidence = std::move(evidence);
  return a;
}

}  // namespace vmm
