#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vmm/allocator.hpp"
#include "vmm/hierarchy.hpp"
#include "vmm/mapping.hpp"
#include "vmm/trace.hpp"

namespace vmm {

enum class Category { CCF, LLCT, LLCM, LLCH };

inline constexpr std::array<Category, 4> kAllCategories = {Category::CCF, Category::LLCT,
                                                           Category::LLCM, Category::LLCH};

std::string_view category_name(Category c);  // CCF, LLCT, LLCM, LLCH
std::optional<Category> parse_category(std::string_view name);

/// Page-access sampling setup. Counter values fall into geometric buckets
/// [1,2), [2,4), ..., with the last bucket open-ended; bucket i carries
/// bucket_weights[i].
struct SamplerConfig {
  std::uint64_t period = 100000;  // app accesses per sampling interval
  std::vector<double> bucket_weights = default_weights();

  static std::vector<double> default_weights();
  void validate() const;
};

struct Thresholds {
  // Online rule.
  double hot_page_low = 0;
  double hot_page_high = 0;
  double wpd_low = 0;
  double wpd_high = 0;
  // Offline quota probe.
  double d_ccf_llct = 0.05;
  double d_llch = 0.20;
  /// Footprint cutoff in pages; 0 means the private cache capacity.
  std::uint64_t footprint_pages = 0;

  static Thresholds defaults();
  void validate() const;
};

struct OnlineEvidence {
  std::vector<std::uint64_t> hot_pages;  // JOB1, one entry per interval
  std::unordered_map<std::uint64_t, std::uint64_t> access_counters;  // JOB2, vpn -> count
  std::uint64_t touched_pages = 0;
  double wpd = 0.0;

  double mean_hot_pages() const;
};

/// Bucket index (0-based) of a nonzero counter value.
std::size_t wpd_bucket(std::uint64_t count, std::size_t buckets);

/// Weighted page distribution: mean bucket weight over touched pages. Zero
/// counters are skipped; throws std::invalid_argument if none is nonzero.
double job2_wpd(std::span<const std::uint64_t> counters, const SamplerConfig& cfg);

/// Scans and clears the app's access bits, recording the hot-page count.
std::uint64_t job1_step(PageAllocator& alloc, AppId app, OnlineEvidence& evidence);

/// Drives JOB1 and JOB2 for one app as its accesses stream by.
class OnlineSampler {
 public:
  OnlineSampler(SamplerConfig cfg, AppId app);

  /// Call after each access of the sampled app has been translated.
  void on_access(PageAllocator& alloc, std::uint64_t vpn);
  /// Computes the WPD and returns the evidence gathered so far.
  OnlineEvidence finish() const;

 private:
  SamplerConfig cfg_;
  AppId app_;
  std::uint64_t in_interval_ = 0;
  OnlineEvidence evidence_;
};

/// Samples a single-app trace by replaying it through the allocator alone.
OnlineEvidence sample_trace(const Trace& trace, const SamplerConfig& cfg,
                            const AddressMapping& m = {});

/// Pure decision over mean hot pages h and WPD w:
///   h <= hot_page_low                     -> CCF
///   h >= hot_page_high and w <= wpd_low   -> LLCT
///   h >= hot_page_high and w >= wpd_high  -> LLCH
///   otherwise                             -> LLCM
/// Throws std::invalid_argument when no interval completed.
Category classify_online(const OnlineEvidence& evidence, const Thresholds& t);

struct OfflineResult {
  Category category;
  double degradation;
  double cycles_full;
  double cycles_eighth;
  std::uint64_t footprint_pages;
};

/// Runs the single-app trace once with all eight LLC color groups and once
/// confined to one, and labels the app from the relative proxy-cycle growth.
OfflineResult classify_offline(const Trace& trace, const AddressMapping& m,
                               const HierarchyConfig& hcfg, const Thresholds& t);

struct LabeledEvidence {
  double hot_pages;
  double wpd;
  Category label;
};

struct Calibration {
  Thresholds thresholds;
  std::size_t agreeing = 0;
  std::size_t total = 0;
};

/// Grid search over the online thresholds maximizing agreement with the
/// labels. Candidate cut points are midpoints between observed values; ties
/// prefer the widest margin to the nearest sample.
Calibration calibrate_thresholds(std::span<const LabeledEvidence> samples, Thresholds base);

}  // namespace vmm
