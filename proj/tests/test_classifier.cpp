#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

#include "vmm/classifier.hpp"
#include "vmm/workloads.hpp"

using namespace vmm;

namespace {

const AddressMapping kMap;

// Histogram reference: geometric buckets [1,2), [2,4), ... built by repeated
// doubling, weight = bucket index + 1.
double reference_wpd(const std::vector<std::uint64_t>& counts, std::size_t buckets) {
  std::map<std::size_t, std::size_t> hist;
  std::size_t n = 0;
  for (std::uint64_t c : counts) {
    if (c == 0) continue;
    std::size_t b = 0;
    for (std::uint64_t lo = 2; lo <= c && b + 1 < buckets; lo *= 2) ++b;
    ++hist[b];
    ++n;
  }
  double sum = 0;
  for (const auto& [b, k] : hist) sum += static_cast<double>((b + 1) * k);
  return sum / static_cast<double>(n);
}

OnlineEvidence evidence(double h, double w) {
  OnlineEvidence e;
  e.hot_pages = {static_cast<std::uint64_t>(h)};
  e.wpd = w;
  return e;
}

}  // namespace

TEST_CASE("category names") {
  for (Category c : kAllCategories) CHECK(parse_category(category_name(c)) == c);
  CHECK_FALSE(parse_category("llch").has_value());
}

TEST_CASE("wpd examples") {
  const SamplerConfig cfg;
  const std::vector<std::uint64_t> once = {1, 1, 1, 1};
  CHECK(job2_wpd(once, cfg) == 1.0);
  const std::vector<std::uint64_t> split = {1, 1, 4, 7};
  CHECK(job2_wpd(split, cfg) == 2.0);
  const std::vector<std::uint64_t> mixed = {1, 1, 5, 9};
  CHECK(job2_wpd(mixed, cfg) == doctest::Approx(reference_wpd(mixed, 32)));
  CHECK(job2_wpd(mixed, cfg) == doctest::Approx(2.25));
  const std::vector<std::uint64_t> zeros = {0, 0};
  CHECK_THROWS_AS(job2_wpd(zeros, cfg), std::invalid_argument);
  CHECK(wpd_bucket(1, 32) == 0);
  CHECK(wpd_bucket(3, 32) == 1);
  CHECK(wpd_bucket(std::uint64_t{1} << 40, 32) == 31);
}

TEST_CASE("wpd matches the histogram reference and is order and scale free") {
  const SamplerConfig cfg;
  std::mt19937_64 rng(17);
  for (int n = 0; n < 500; ++n) {
    std::vector<std::uint64_t> c(1 + rng() % 200);
    for (auto& v : c) v = 1 + (rng() % 2 ? rng() % 100 : rng() % 100000);
    const double w = job2_wpd(c, cfg);
    REQUIRE(w == doctest::Approx(reference_wpd(c, 32)));
    std::shuffle(c.begin(), c.end(), rng);
    REQUIRE(job2_wpd(c, cfg) == doctest::Approx(w));
    std::vector<std::uint64_t> twice = c;
    twice.insert(twice.end(), c.begin(), c.end());
    REQUIRE(job2_wpd(twice, cfg) == doctest::Approx(w));
  }
}

TEST_CASE("sampler config validation") {
  SamplerConfig cfg;
  cfg.period = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.bucket_weights = {3, 2};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("job1 counts hot pages") {
  PageAllocator alloc(1024, policy_spec(PolicyKind::Interleaving, kMap), kMap);
  alloc.register_app(0);
  OnlineEvidence ev;
  for (int v = 0; v < 7; ++v) alloc.touch(0, v);
  CHECK(job1_step(alloc, 0, ev) == 7);
  CHECK(job1_step(alloc, 0, ev) == 0);
  CHECK(ev.hot_pages == std::vector<std::uint64_t>{7, 0});
  CHECK_THROWS_AS(job1_step(alloc, 3, ev), std::invalid_argument);
}

TEST_CASE("streaming app shows about sixteen hot pages per thousand lines") {
  ArchetypeParams p = canonical_params(ArchetypeKind::Llct, 1);
  p.working_set_pages = 512;
  SamplerConfig cfg;
  cfg.period = 1000;
  const OnlineEvidence ev = sample_trace(gen(p), cfg, kMap);
  REQUIRE(ev.hot_pages.size() == 32);
  for (std::uint64_t h : ev.hot_pages) {
    CHECK(h >= 15);
    CHECK(h <= 17);
  }
  CHECK(ev.wpd == doctest::Approx(7.0));  // 64 accesses per page, bucket [64,128)
  for (std::uint64_t h : ev.hot_pages) CHECK(h <= ev.touched_pages);
}

TEST_CASE("online rule and its boundaries") {
  Thresholds t;
  t.hot_page_low = 50;
  t.hot_page_high = 500;
  t.wpd_low = 7;
  t.wpd_high = 9;
  CHECK(classify_online(evidence(10, 20), t) == Category::CCF);
  CHECK(classify_online(evidence(50, 20), t) == Category::CCF);
  CHECK(classify_online(evidence(500, 7), t) == Category::LLCT);
  CHECK(classify_online(evidence(500, 9), t) == Category::LLCH);
  CHECK(classify_online(evidence(500, 8), t) == Category::LLCM);
  CHECK(classify_online(evidence(499, 9), t) == Category::LLCM);
  CHECK(classify_online(evidence(51, 1), t) == Category::LLCM);
  CHECK_THROWS_AS(classify_online(OnlineEvidence{}, t), std::invalid_argument);
}

TEST_CASE("default thresholds are ordered") {
  const Thresholds t = Thresholds::defaults();
  CHECK_NOTHROW(t.validate());
  CHECK(t.hot_page_low <= t.hot_page_high);
  CHECK(t.wpd_low <= t.wpd_high);
  Thresholds bad = t;
  bad.d_llch = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("offline probe labels the archetypes") {
  const HierarchyConfig h;
  const Thresholds t = Thresholds::defaults();
  SUBCASE("tight loop") {
    ArchetypeParams p = canonical_params(ArchetypeKind::Ccf, 1);
    p.access_count = 10000;
    const auto r = classify_offline(gen(p), kMap, h, t);
    CHECK(r.category == Category::CCF);
    CHECK(std::abs(r.degradation) < 0.01);
    CHECK(r.footprint_pages == 8);
  }
  SUBCASE("long stream") {
    ArchetypeParams p = canonical_params(ArchetypeKind::Llct, 1);
    p.working_set_pages = 100000;
    const auto r = classify_offline(gen(p), kMap, h, t);
    CHECK(r.category == Category::LLCT);
    CHECK(r.degradation < 0.05);
  }
  SUBCASE("llc-sized loop") {
    const auto r = classify_offline(gen(canonical_params(ArchetypeKind::Llch, 1)), kMap, h, t);
    CHECK(r.category == Category::LLCH);
    CHECK(r.degradation >= 0.20);
  }
  SUBCASE("empty trace") {
    Trace e;
    e.apps = {"x"};
    CHECK_THROWS_AS(classify_offline(e, kMap, h, t), std::invalid_argument);
  }
}

TEST_CASE("offline degradation grows with the llch working set") {
  const HierarchyConfig h;
  const Thresholds t = Thresholds::defaults();
  double last = -1;
  for (std::uint64_t ws : {256, 512, 1024}) {
    ArchetypeParams p = canonical_params(ArchetypeKind::Llch, 3);
    p.working_set_pages = ws;
    p.access_count = ws * 64 * 10;  // same number of sweeps, so cold misses weigh the same
    const double d = classify_offline(gen(p), kMap, h, t).degradation;
    CAPTURE(ws);
    CHECK(d >= last);
    last = d;
  }
}

TEST_CASE("online agrees with offline on the canonical archetypes") {
  const HierarchyConfig h;
  const Thresholds t = Thresholds::defaults();
  for (auto kind : {ArchetypeKind::Ccf, ArchetypeKind::Llct, ArchetypeKind::Llcm, ArchetypeKind::Llch}) {
    const Trace tr = gen(canonical_params(kind, 42));
    const auto off = classify_offline(tr, kMap, h, t).category;
    const auto on = classify_online(sample_trace(tr, {}, kMap), t);
    CAPTURE(archetype_name(kind));
    CHECK(on == off);
  }
}

TEST_CASE("calibration separates well-spaced samples") {
  const std::vector<LabeledEvidence> s = {
      {5, 15, Category::CCF},     {10, 16, Category::CCF},    {200, 7.3, Category::LLCM},
      {250, 7.4, Category::LLCM}, {1500, 7, Category::LLCT},  {1600, 7, Category::LLCT},
      {1400, 10, Category::LLCH}, {1500, 11, Category::LLCH},
  };
  const Calibration c = calibrate_thresholds(s, Thresholds::defaults());
  CHECK(c.agreeing == 8);
  CHECK(c.total == 8);
  CHECK(c.thresholds.hot_page_low > 10);
  CHECK(c.thresholds.hot_page_low < 200);
  CHECK(c.thresholds.hot_page_high > 250);
  CHECK(c.thresholds.hot_page_high < 1400);
  CHECK(c.thresholds.wpd_low >= 7);
  CHECK(c.thresholds.wpd_high <= 10);
  CHECK_THROWS_AS(calibrate_thresholds({}, Thresholds::defaults()), std::invalid_argument);
}
