#include <doctest.h>

#include <set>
#include <stdexcept>

#include "vmm/policies.hpp"

using namespace vmm;

TEST_CASE("policy names round trip") {
  for (PolicyKind k : kAllPolicies) CHECK(parse_policy(policy_name(k)) == k);
  CHECK(parse_policy("b-vp") == PolicyKind::BVP);
  CHECK_FALSE(parse_policy("avp").has_value());
}

TEST_CASE("table rows on the default mapping") {
  const AddressMapping m;
  struct Row {
    PolicyKind k;
    BitList bits;
    std::uint32_t llc, bank;
  };
  const Row rows[] = {{PolicyKind::BankOnly, {15, 21, 22}, 2, 8},
                      {PolicyKind::AVP, {14, 15}, 4, 4},
                      {PolicyKind::BVP, {14, 15, 22}, 4, 8},
                      {PolicyKind::CVP, {14, 15, 16}, 8, 4}};
  for (const auto& r : rows) {
    CAPTURE(policy_name(r.k));
    const PolicySpec s = policy_spec(r.k, m);
    CHECK(s.color_bits == r.bits);
    CHECK(s.llc_groups == r.llc);
    CHECK(s.bank_groups == r.bank);
    CHECK(s.page_colors == (1u << r.bits.size()));
    CHECK(s.partitioning);
  }
  for (PolicyKind k : {PolicyKind::Interleaving, PolicyKind::RandomInterleave}) {
    const PolicySpec s = policy_spec(k, m);
    CHECK_FALSE(s.partitioning);
    CHECK(s.color_bits.empty());
    CHECK_THROWS_AS(page_color_under(s, {0}, m), std::logic_error);
  }
}

TEST_CASE("enumerating every frame yields the table's group counts") {
  const AddressMapping m;
  for (PolicyKind k : {PolicyKind::BankOnly, PolicyKind::AVP, PolicyKind::BVP, PolicyKind::CVP}) {
    CAPTURE(policy_name(k));
    const PolicySpec s = policy_spec(k, m);
    std::set<ColorId> colors;
    std::set<std::uint32_t> llc, bank;
    for (std::uint64_t pfn = 0; pfn < m.total_pages(); ++pfn) {
      const ColorId c = page_color_under(s, {pfn}, m);
      colors.insert(c);
    }
    for (ColorId c : colors) {
      const GroupPair g = project(s, c);
      llc.insert(g.llc_group);
      bank.insert(g.bank_group);
    }
    CHECK(colors.size() == s.page_colors);
    CHECK(llc.size() == s.llc_groups);
    CHECK(bank.size() == s.bank_groups);
  }
}

TEST_CASE("page color under policy examples") {
  const AddressMapping m;
  const PolicySpec avp = policy_spec(PolicyKind::AVP, m);
  CHECK(page_color_under(avp, {0}, m) == 0);

  const PolicySpec bvp = policy_spec(PolicyKind::BVP, m);
  const ColorId c = page_color_under(bvp, {std::uint64_t{1} << 10}, m);  // address bit 22
  CHECK(c == 4);
  CHECK(project(bvp, c).llc_group == 0);
  CHECK(project(bvp, c).bank_group != 0);

  const PolicySpec bank = policy_spec(PolicyKind::BankOnly, m);
  const ColorId b = page_color_under(bank, {std::uint64_t{1} << 3}, m);  // address bit 15
  CHECK(project(bank, b).llc_group == 1);
  CHECK((project(bank, b).bank_group & 1) == 1);
}

TEST_CASE("a-vp projects each color onto the same llc and bank group") {
  const PolicySpec s = policy_spec(PolicyKind::AVP, AddressMapping{});
  for (ColorId c = 0; c < s.page_colors; ++c) {
    CHECK(project(s, c) == GroupPair{c, c});
  }
  CHECK_THROWS_AS(project(s, 4), std::out_of_range);
}

TEST_CASE("b-vp image is coupled through the o component") {
  const PolicySpec s = policy_spec(PolicyKind::BVP, AddressMapping{});
  std::set<std::uint32_t> llc, bank;
  std::set<GroupPair> pairs;
  for (ColorId c = 0; c < s.page_colors; ++c) {
    const GroupPair g = project(s, c);
    llc.insert(g.llc_group);
    bank.insert(g.bank_group);
    pairs.insert(g);
    CHECK((g.bank_group & 3) == g.llc_group);
  }
  CHECK(llc.size() == 4);
  CHECK(bank.size() == 8);
  CHECK(pairs.size() == 8);
}

TEST_CASE("overrides replace the built-in bits") {
  const AddressMapping m;
  PolicyOverrides o{{PolicyKind::CVP, {14, 16, 17}}};
  const PolicySpec s = policy_spec(PolicyKind::CVP, m, o);
  CHECK(s.llc_groups == 8);
  CHECK(s.bank_groups == 2);
  CHECK_THROWS_AS(make_policy_spec(PolicyKind::AVP, {19}, m), std::invalid_argument);
  CHECK_THROWS_AS(make_policy_spec(PolicyKind::AVP, {14, 14}, m), std::invalid_argument);
  CHECK_THROWS_AS(make_policy_spec(PolicyKind::Interleaving, {14}, m), std::invalid_argument);
}

TEST_CASE("short mappings cannot build the table") {
  AddressMapping m;
  m.o_bits = {14};
  m.bank_index_bits = {14, 15, 19, 20, 21, 22};
  CHECK_THROWS_AS(policy_spec(PolicyKind::AVP, m), std::invalid_argument);
}
