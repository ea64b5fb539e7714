#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "vmm/allocator.hpp"

using namespace vmm;

namespace {

const AddressMapping kMap;

PageAllocator avp(std::uint64_t pages = 1 << 12, AllocatorOptions o = {}) {
  return PageAllocator(pages, policy_spec(PolicyKind::AVP, kMap), kMap, o);
}

}  // namespace

TEST_CASE("init balances colors") {
  PageAllocator full(kMap.total_pages(), policy_spec(PolicyKind::AVP, kMap), kMap);
  CHECK(full.pool_count() == 4);
  for (ColorId c = 0; c < 4; ++c) CHECK(full.free_frames(c) == (std::uint64_t{1} << 19));

  PageAllocator inter(1024, policy_spec(PolicyKind::Interleaving, kMap), kMap);
  CHECK(inter.pool_count() == 1);
  CHECK(inter.free_frames() == 1024);

  PageAllocator toy = avp(16);
  std::vector<ColorId> colors;
  for (std::uint64_t pfn = 0; pfn < 16; ++pfn) colors.push_back(toy.color_of({pfn}));
  CHECK(colors == std::vector<ColorId>{0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2, 3, 3, 3, 3});
}

TEST_CASE("quota round robin") {
  PageAllocator a = avp();
  a.register_app(0);
  SUBCASE("single color") {
    const std::vector<ColorId> q = {0};
    a.assign_quota(0, q);
    for (int v = 0; v < 3; ++v) CHECK(a.color_of(a.touch(0, v)) == 0);
  }
  SUBCASE("alternating") {
    const std::vector<ColorId> q = {0, 1};
    a.assign_quota(0, q);
    std::vector<ColorId> seen;
    for (int v = 0; v < 4; ++v) seen.push_back(a.color_of(a.touch(0, v)));
    CHECK(seen == std::vector<ColorId>{0, 1, 0, 1});
  }
  SUBCASE("unknown color") {
    const std::vector<ColorId> q = {5};
    CHECK_THROWS_AS(a.assign_quota(0, q), std::invalid_argument);
  }
  SUBCASE("empty quota") {
    CHECK_THROWS_AS(a.assign_quota(0, {}), std::invalid_argument);
  }
  SUBCASE("quota change with live pages") {
    a.touch(0, 1);
    const std::vector<ColorId> q = {2};
    CHECK_THROWS_AS(a.assign_quota(0, q), std::logic_error);
  }
}

TEST_CASE("lowest frame of a color first") {
  PageAllocator a = avp();
  a.register_app(0);
  const std::vector<ColorId> q = {2};
  a.assign_quota(0, q);
  CHECK(a.touch(0, 0).pfn == 8);
  CHECK(a.touch(0, 1).pfn == 9);
  CHECK(a.touch(0, 0).pfn == 8);
  CHECK(a.page_count(0) == 2);
}

TEST_CASE("coalesce shares the union") {
  PageAllocator a = avp();
  a.register_app(0);
  a.register_app(1);
  a.register_app(2);
  const std::vector<ColorId> q0 = {0}, q1 = {1}, q2 = {3};
  a.assign_quota(0, q0);
  a.assign_quota(1, q1);
  a.assign_quota(2, q2);
  a.coalesce({{0, 1}, {2}});
  CHECK(a.quota(0)->allowed_colors == std::vector<ColorId>{0, 1});
  CHECK(a.quota(1)->allowed_colors == std::vector<ColorId>{0, 1});
  CHECK(a.quota(0)->shared_group == a.quota(1)->shared_group);
  CHECK(a.quota(0)->shared_group.has_value());
  CHECK(a.quota(2)->allowed_colors == std::vector<ColorId>{3});
  std::set<ColorId> seen;
  for (int v = 0; v < 4; ++v) seen.insert(a.color_of(a.touch(0, v)));
  CHECK(seen.count(1) == 1);
  CHECK_THROWS_AS(a.coalesce({{0}, {0, 2}}), std::invalid_argument);
}

TEST_CASE("strict out of memory") {
  PageAllocator a = avp(16);
  a.register_app(0);
  const std::vector<ColorId> q = {1};
  a.assign_quota(0, q);
  for (int v = 0; v < 4; ++v) a.touch(0, v);
  try {
    a.touch(0, 99);
    FAIL("expected OutOfMemory");
  } catch (const OutOfMemory& e) {
    CHECK(e.app() == 0);
    CHECK(e.empty_colors() == std::vector<ColorId>{1});
  }
  CHECK(a.free_frames() == 12);

  PageAllocator b = avp(16, {true, 0});
  b.register_app(0);
  b.assign_quota(0, q);
  for (int v = 0; v < 5; ++v) b.touch(0, v);
  CHECK(b.page_count(0) == 5);
}

TEST_CASE("interleave hands out the next free frame") {
  PageAllocator a(64, policy_spec(PolicyKind::Interleaving, kMap), kMap);
  a.register_app(0);
  a.register_app(1);
  CHECK(a.touch(0, 5).pfn == 0);
  CHECK(a.touch(1, 5).pfn == 1);
  CHECK(a.touch(0, 6).pfn == 2);
}

TEST_CASE("random placement is seeded") {
  auto run = [](std::uint64_t seed) {
    PageAllocator a(4096, policy_spec(PolicyKind::RandomInterleave, kMap), kMap, {false, seed});
    a.register_app(0);
    std::vector<std::uint64_t> pfns;
    for (int v = 0; v < 200; ++v) pfns.push_back(a.touch(0, v).pfn);
    return pfns;
  };
  CHECK(run(4) == run(4));
  CHECK(run(4) != run(5));
  const auto p = run(4);
  CHECK(std::set<std::uint64_t>(p.begin(), p.end()).size() == p.size());
}

TEST_CASE("access bits") {
  PageAllocator a = avp();
  a.register_app(0);
  CHECK(a.access_bit_scan_and_clear(0) == 0);
  for (int v = 0; v < 5; ++v) a.touch(0, v);
  CHECK(a.access_bit_scan_and_clear(0) == 5);
  CHECK(a.access_bit_scan_and_clear(0) == 0);
  for (int v = 5; v < 10; ++v) a.touch(0, v);
  a.access_bit_scan_and_clear(0);
  for (int v : {1, 7, 9}) a.touch(0, v);
  CHECK(a.access_bit_scan_and_clear(0) == 3);
  CHECK_THROWS_AS(a.access_bit_scan_and_clear(42), std::invalid_argument);
}

TEST_CASE("isolation and conservation under random requests") {
  std::mt19937_64 rng(21);
  for (PolicyKind k : {PolicyKind::BankOnly, PolicyKind::AVP, PolicyKind::BVP, PolicyKind::CVP}) {
    CAPTURE(policy_name(k));
    const PolicySpec s = policy_spec(k, kMap);
    PageAllocator a(1 << 14, s, kMap);
    // Each app gets the colors of one llc group so that their group pairs
    // cannot meet.
    const std::uint32_t apps = std::min<std::uint32_t>(s.llc_groups, 4);
    std::map<AppId, std::set<GroupPair>> owned;
    for (AppId app = 0; app < apps; ++app) {
      a.register_app(app);
      std::vector<ColorId> q;
      for (ColorId c = 0; c < s.page_colors; ++c) {
        if (project(s, c).llc_group == app) q.push_back(c);
      }
      a.assign_quota(app, q);
    }
    for (int i = 0; i < 3000; ++i) {
      const AppId app = static_cast<AppId>(rng() % apps);
      const PageFrame f = a.touch(app, rng() % 600);
      owned[app].insert(project(s, a.color_of(f)));
      REQUIRE(a.free_frames() + a.allocated_frames() == a.total_pages());
    }
    for (AppId x = 0; x < apps; ++x) {
      for (AppId y = x + 1; y < apps; ++y) {
        for (const GroupPair& g : owned[x]) CHECK(owned[y].count(g) == 0);
      }
    }
    CHECK(a.check_invariants().empty());
  }
}

TEST_CASE("identical requests give identical frames") {
  auto run = [] {
    PageAllocator a(1 << 12, policy_spec(PolicyKind::CVP, kMap), kMap);
    std::mt19937_64 rng(2);
    for (AppId app = 0; app < 3; ++app) {
      a.register_app(app);
      const std::vector<ColorId> q = {app, app + 3};
      a.assign_quota(app, q);
    }
    std::vector<std::uint64_t> out;
    for (int i = 0; i < 500; ++i) out.push_back(a.touch(rng() % 3, rng() % 100).pfn);
    return out;
  };
  CHECK(run() == run());
}
