#include "vmm/hierarchy.hpp"

#include <bit>
#include <stdexcept>
#include <string>

namespace vmm {

void CacheConfig::validate() const {
  auto pow2 = [](std::uint64_t v) { return v != 0 && std::has_single_bit(v); };
  if (!pow2(size_bytes) || !pow2(ways) || !pow2(line_bytes)) {
    throw std::invalid_argument("cache size, associativity and line size must be powers of two");
  }
  if (size_bytes < ways * line_bytes) {
    throw std::invalid_argument("cache smaller than one set");
  }
}

SetAssocCache::SetAssocCache(CacheConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  sets_ = cfg_.sets();
  ways_.resize(sets_ * cfg_.ways);
}

SetAssocCache::Result SetAssocCache::access(std::uint64_t set, std::uint64_t tag, AppId owner) {
  Way* row = &ways_[set * cfg_.ways];
  ++clock_;
  Way* victim = nullptr;
  for (std::uint64_t w = 0; w < cfg_.ways; ++w) {
    Way& way = row[w];
    if (way.valid && way.tag == tag) {
      way.stamp = clock_;
      return Result{true, static_cast<std::uint32_t>(w), std::nullopt};
    }
    if (!way.valid) {
      if (!victim || victim->valid) victim = &way;
    } else if (!victim || (victim->valid && way.stamp < victim->stamp)) {
      victim = &way;
    }
  }
  Result r;
  r.way = static_cast<std::uint32_t>(victim - row);
  if (victim->valid) r.evicted = Victim{victim->tag, victim->owner};
  *victim = Way{tag, clock_, owner, true};
  return r;
}

bool SetAssocCache::contains(std::uint64_t set, std::uint64_t tag) const {
  const Way* row = &ways_[set * cfg_.ways];
  for (std::uint64_t w = 0; w < cfg_.ways; ++w) {
    if (row[w].valid && row[w].tag == tag) return true;
  }
  return false;
}

std::vector<AppId> SetAssocCache::owners(std::uint64_t set) const {
  std::vector<AppId> out;
  const Way* row = &ways_[set * cfg_.ways];
  for (std::uint64_t w = 0; w < cfg_.ways; ++w) {
    if (row[w].valid) out.push_back(row[w].owner);
  }
  return out;
}

Counters& Counters::operator+=(const Counters& o) {
  accesses += o.accesses;
  private_hits += o.private_hits;
  llc_hits += o.llc_hits;
  llc_misses += o.llc_misses;
  row_hits += o.row_hits;
  row_misses += o.row_misses;
  row_conflicts += o.row_conflicts;
  cross_app_conflicts += o.cross_app_conflicts;
  cross_app_llc_evictions += o.cross_app_llc_evictions;
  return *this;
}

double Counters::llc_miss_rate() const {
  const auto lookups = llc_hits + llc_misses;
  return lookups ? static_cast<double>(llc_misses) / static_cast<double>(lookups) : 0.0;
}

double Counters::row_hit_rate() const {
  const auto dram = row_hits + row_misses + row_conflicts;
  return dram ? static_cast<double>(row_hits) / static_cast<double>(dram) : 0.0;
}

double proxy_cycles(const Counters& c, const LatencyTable& lat) {
  return static_cast<double>(c.private_hits) * lat.private_hit +
         static_cast<double>(c.llc_hits) * lat.llc_hit +
         static_cast<double>(c.row_hits) * lat.row_hit +
         static_cast<double>(c.row_misses) * lat.row_miss +
         static_cast<double>(c.row_conflicts) * lat.row_conflict;
}

Hierarchy::Hierarchy(HierarchyConfig cfg, AddressMapping m)
    : cfg_(std::move(cfg)), mapping_(std::move(m)), llc_(cfg_.llc) {
  require_valid(mapping_);
  if (cfg_.cores == 0) throw std::invalid_argument("hierarchy needs at least one core");
  if (llc_.sets() != mapping_.set_count()) {
    throw std::invalid_argument("LLC has " + std::to_string(llc_.sets()) +
                                " sets but the mapping indexes " +
                                std::to_string(mapping_.set_count()));
  }
  if (cfg_.llc.line_bytes != mapping_.line_bytes() ||
      cfg_.private_cache.line_bytes != mapping_.line_bytes()) {
    throw std::invalid_argument("cache line size disagrees with the mapping's line offset");
  }
  private_.reserve(cfg_.cores);
  for (unsigned c = 0; c < cfg_.cores; ++c) private_.emplace_back(cfg_.private_cache);
  banks_.resize(mapping_.bank_count());
}

AccessOutcome Hierarchy::access(unsigned core, AppId app, PhysAddr a) {
  if (core >= private_.size()) {
    throw std::out_of_range("core " + std::to_string(core) + " has no private cache");
  }
  const Decomposed d = decompose(a, mapping_);
  if (metrics_.per_app.size() <= app) metrics_.per_app.resize(app + 1);
  Counters& mine = metrics_.per_app[app];
  Counters& all = metrics_.global;
  auto bump = [&](std::uint64_t Counters::*field) {
    ++(mine.*field);
    ++(all.*field);
  };

  AccessOutcome out;
  out.llc_set = d.set_id;
  out.bank = d.bank_id;
  bump(&Counters::accesses);

  SetAssocCache& pc = private_[core];
  if (pc.access(d.line_tag & (pc.sets() - 1), d.line_tag, app).hit) {
    out.private_hit = true;
    bump(&Counters::private_hits);
  } else {
    const auto llc = llc_.access(d.set_id, d.line_tag, app);
    if (llc.evicted) {
      out.llc_victim_owner = llc.evicted->owner;
      if (llc.evicted->owner != app) {
        out.cross_app_eviction = true;
        bump(&Counters::cross_app_llc_evictions);
      }
    }
    if (llc.hit) {
      out.llc_hit = true;
      bump(&Counters::llc_hits);
    } else {
      bump(&Counters::llc_misses);
      BankState& bank = banks_[d.bank_id];
      if (!bank.open_row) {
        out.dram = DramOutcome::RowMiss;
        bump(&Counters::row_misses);
      } else if (*bank.open_row == d.row_id) {
        out.dram = DramOutcome::RowHit;
        bump(&Counters::row_hits);
      } else {
        out.dram = DramOutcome::RowConflict;
        bump(&Counters::row_conflicts);
        if (bank.last_app && *bank.last_app != app) {
          out.cross_app_conflict = true;
          bump(&Counters::cross_app_conflicts);
        }
      }
      bank.open_row = d.row_id;
      bank.last_app = app;
    }
  }

  if (cfg_.epoch_accesses && all.accesses % cfg_.epoch_accesses == 0) {
    metrics_.epochs.push_back(all);
  }
  return out;
}

}  // namespace vmm
