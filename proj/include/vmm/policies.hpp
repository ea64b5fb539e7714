#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vmm/mapping.hpp"

namespace vmm {

enum class PolicyKind { Interleaving, BankOnly, AVP, BVP, CVP, RandomInterleave };

inline constexpr std::array<PolicyKind, 6> kAllPolicies = {
    PolicyKind::Interleaving, PolicyKind::BankOnly, PolicyKind::AVP,
    PolicyKind::BVP,          PolicyKind::CVP,      PolicyKind::RandomInterleave};

/// CLI/config spelling: interleave, bank-only, a-vp, b-vp, c-vp, random.
std::string_view policy_name(PolicyKind k);
std::optional<PolicyKind> parse_policy(std::string_view name);

/// Explicit color bit positions per policy, replacing the built-in table.
using PolicyOverrides = std::map<PolicyKind, BitList>;

struct GroupPair {
  std::uint32_t llc_group = 0;
  std::uint32_t bank_group = 0;
  friend bool operator==(GroupPair, GroupPair) = default;
  friend auto operator<=>(GroupPair, GroupPair) = default;
};

/// One row of the policy table, resolved against a mapping.
struct PolicySpec {
  PolicyKind kind = PolicyKind::Interleaving;
  BitList color_bits;  // ascending
  std::uint32_t llc_groups = 1;
  std::uint32_t bank_groups = 1;
  std::uint32_t page_colors = 1;
  bool partitioning = false;
  // Indices into color_bits whose address bit reaches the LLC set index
  // (C and O) or the bank index (B and O).
  std::vector<unsigned> llc_components;
  std::vector<unsigned> bank_components;
};

/// Built-in table, picking bits per class from the mapping:
///   bank-only  two lowest B-bits + highest O-bit   (default {15,21,22})
///   a-vp       two lowest O-bits                   (default {14,15})
///   b-vp       highest B-bit + two lowest O-bits   (default {14,15,22})
///   c-vp       lowest C-bit + two lowest O-bits    (default {14,15,16})
///   interleave, random: no color bits
/// Throws std::invalid_argument when the mapping lacks enough bits of a class.
PolicySpec policy_spec(PolicyKind k, const AddressMapping& m);
PolicySpec policy_spec(PolicyKind k, const AddressMapping& m, const PolicyOverrides& overrides);

/// Builds a spec from explicit positions. Every position must belong to one
/// of the mapping's color classes.
PolicySpec make_policy_spec(PolicyKind k, BitList color_bits, const AddressMapping& m);

/// Throws std::logic_error for non-partitioning policies.
ColorId page_color_under(const PolicySpec& spec, PageFrame f, const AddressMapping& m);

/// Splits a color into its LLC-group and bank-group components. O-bits land
/// in both, which couples the two coordinates.
GroupPair project(const PolicySpec& spec, ColorId color);

}  // namespace vmm
