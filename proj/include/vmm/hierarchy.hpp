#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "vmm/allocator.hpp"
#include "vmm/mapping.hpp"

namespace vmm {

struct CacheConfig {
  std::uint64_t size_bytes = 0;
  std::uint64_t ways = 0;
  std::uint64_t line_bytes = 64;

  std::uint64_t sets() const { return size_bytes / (ways * line_bytes); }
  /// Throws std::invalid_argument unless every field is a power of two and
  /// the size divides evenly into sets.
  void validate() const;
};

/// Set-associative cache with true LRU replacement. Invalid ways are filled
/// first, lowest index first; among valid ways the least recently used one
/// is evicted (ties cannot occur since stamps are unique).
class SetAssocCache {
 public:
  struct Victim {
    std::uint64_t tag;
    AppId owner;
  };
  struct Result {
    bool hit = false;
    std::uint32_t way = 0;
    std::optional<Victim> evicted;
  };

  explicit SetAssocCache(CacheConfig cfg);

  const CacheConfig& config() const { return cfg_; }
  std::uint64_t sets() const { return sets_; }

  /// Looks up `tag` in `set`; on a miss the line is filled for `owner`.
  Result access(std::uint64_t set, std::uint64_t tag, AppId owner);
  bool contains(std::uint64_t set, std::uint64_t tag) const;
  /// Owners of the valid lines currently held in `set`.
  std::vector<AppId> owners(std::uint64_t set) const;

 private:
  struct Way {
    std::uint64_t tag = 0;
    std::uint64_t stamp = 0;
    AppId owner = 0;
    bool valid = false;
  };

  CacheConfig cfg_;
  std::uint64_t sets_;
  std::uint64_t clock_ = 0;
  std::vector<Way> ways_;
};

enum class DramOutcome : std::uint8_t { None, RowHit, RowMiss, RowConflict };

struct AccessOutcome {
  bool private_hit = false;
  bool llc_hit = false;
  DramOutcome dram = DramOutcome::None;
  bool cross_app_conflict = false;
  bool cross_app_eviction = false;
  std::uint64_t llc_set = 0;
  std::uint64_t bank = 0;
  std::optional<AppId> llc_victim_owner;
};

struct Counters {
  std::uint64_t accesses = 0;
  std::uint64_t private_hits = 0;
  std::uint64_t llc_hits = 0;
  std::uint64_t llc_misses = 0;
  std::uint64_t row_hits = 0;
  std::uint64_t row_misses = 0;
  std::uint64_t row_conflicts = 0;
  std::uint64_t cross_app_conflicts = 0;
  std::uint64_t cross_app_llc_evictions = 0;

  Counters& operator+=(const Counters& o);
  friend bool operator==(const Counters&, const Counters&) = default;

  double llc_miss_rate() const;
  double row_hit_rate() const;
};

/// Cycle cost per terminal outcome. The defaults are a declared convention;
/// only relative comparisons between policies are meaningful.
struct LatencyTable {
  double private_hit = 4;
  double llc_hit = 40;
  double row_hit = 120;
  double row_miss = 200;
  double row_conflict = 300;
};

double proxy_cycles(const Counters& c, const LatencyTable& lat);

struct Metrics {
  Counters global;
  std::vector<Counters> per_app;  // indexed by AppId
  std::vector<Counters> epochs;   // cumulative snapshots
};

struct HierarchyConfig {
  CacheConfig private_cache{256 * 1024, 8, 64};
  CacheConfig llc{8 * 1024 * 1024, 16, 64};
  unsigned cores = 8;
  LatencyTable latency;
  std::uint64_t epoch_accesses = 100000;

  /// Private-cache capacity in pages of the given mapping.
  std::uint64_t private_pages(const AddressMapping& m) const {
    return private_cache.size_bytes / m.page_bytes();
  }
};

/// Per-core private caches, a shared physically indexed LLC and open-row DRAM
/// banks. Fills are non-inclusive: an LLC eviction does not back-invalidate
/// private copies.
class Hierarchy {
 public:
  Hierarchy(HierarchyConfig cfg, AddressMapping m);

  AccessOutcome access(unsigned core, AppId app, PhysAddr a);

  const Metrics& metrics() const { return metrics_; }
  const HierarchyConfig& config() const { return cfg_; }
  const AddressMapping& mapping() const { return mapping_; }
  const SetAssocCache& llc() const { return llc_; }

 private:
  struct BankState {
    std::optional<std::uint64_t> open_row;
    std::optional<AppId> last_app;
  };

  HierarchyConfig cfg_;
  AddressMapping mapping_;
  std::vector<SetAssocCache> private_;
  SetAssocCache llc_;
  std::vector<BankState> banks_;
  Metrics metrics_;
};

}  // namespace vmm
