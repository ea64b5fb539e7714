#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "vmm/mapping.hpp"
#include "vmm/policies.hpp"

namespace vmm {

using AppId = std::uint32_t;

struct ColorQuota {
  AppId app = 0;
  std::vector<ColorId> allowed_colors;  // sorted, non-empty
  std::optional<std::uint32_t> shared_group;
};

struct AllocationRecord {
  AppId app;
  std::uint64_t vpn;
  PageFrame frame;
  ColorId color;
  GroupPair groups;
};

struct AllocatorOptions {
  bool allow_fallback = false;
  std::uint64_t seed = 0;
};

/// Raised when every color pool an application may draw from is empty.
class OutOfMemory : public std::runtime_error {
 public:
  OutOfMemory(AppId app, std::vector<ColorId> empty_colors);
  AppId app() const { return app_; }
  const std::vector<ColorId>& empty_colors() const { return empty_colors_; }

 private:
  AppId app_;
  std::vector<ColorId> empty_colors_;
};

/// Color-indexed page frame pools plus per-application page tables.
///
/// Partitioning policies keep one pool per color and hand out the lowest free
/// frame of a color, rotating round-robin over the app's allowed colors.
/// Interleaving hands out the lowest free frame overall; RandomInterleave a
/// uniformly random free frame. Frames are never returned to the pools.
class PageAllocator {
 public:
  PageAllocator(std::uint64_t total_pages, PolicySpec spec, AddressMapping m,
                AllocatorOptions options = {});

  const PolicySpec& spec() const { return spec_; }
  const AddressMapping& mapping() const { return mapping_; }
  std::uint64_t total_pages() const { return total_pages_; }

  /// Registers an app with no color constraint (all colors allowed).
  void register_app(AppId app);
  bool has_app(AppId app) const { return apps_.count(app) != 0; }

  void assign_quota(AppId app, std::span<const ColorId> colors);
  void coalesce(const std::vector<std::vector<AppId>>& groups);
  std::optional<ColorQuota> quota(AppId app) const;

  /// First-touch translation. Sets the access bit of the entry.
  PageFrame touch(AppId app, std::uint64_t vpn);

  /// Counts entries whose access bit is set and clears them all.
  std::uint64_t access_bit_scan_and_clear(AppId app);

  ColorId color_of(PageFrame f) const;
  std::size_t pool_count() const { return pools_.size(); }
  std::uint64_t free_frames() const;
  std::uint64_t free_frames(ColorId color) const;
  std::uint64_t allocated_frames() const { return log_.size(); }
  std::size_t page_count(AppId app) const;
  std::vector<PageFrame> frames_of(AppId app) const;
  const std::vector<AllocationRecord>& log() const { return log_; }

  /// Conservation and single-ownership check over every frame. Returns an
  /// empty string when all invariants hold.
  std::string check_invariants() const;

 private:
  struct Pte {
    std::uint32_t pfn;
    bool accessed;
  };
  struct AppState {
    std::vector<ColorId> allowed;
    std::optional<std::uint32_t> shared_group;
    std::size_t next = 0;
    bool quota_set = false;
    std::unordered_map<std::uint64_t, Pte> page_table;
  };
  struct Pool {
    std::vector<std::uint32_t> frames;  // ascending, or unordered for random
    std::size_t cursor = 0;
    std::uint64_t remaining() const { return frames.size() - cursor; }
  };

  AppState& app_state(AppId app);
  const AppState& app_state(AppId app) const;
  std::uint32_t take(AppState& st, AppId app);
  std::uint32_t take_from(ColorId color);

  std::uint64_t total_pages_;
  PolicySpec spec_;
  AddressMapping mapping_;
  AllocatorOptions options_;
  std::mt19937_64 rng_;
  std::vector<Pool> pools_;
  std::unordered_map<AppId, AppState> apps_;
  std::vector<AllocationRecord> log_;
  std::uint32_t next_group_ = 0;
};

}  // namespace vmm
