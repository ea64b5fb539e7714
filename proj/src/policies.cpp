#include "vmm/policies.hpp"

#include <algorithm>
#include <stdexcept>

namespace vmm {

namespace {

enum class ColorClass { B, C, O };
enum class Pick { Lowest, Highest };

struct BitPick {
  ColorClass cls;
  Pick from;
  unsigned count;
};

struct PolicyRow {
  PolicyKind kind;
  std::vector<BitPick> picks;
};

const std::vector<PolicyRow>& default_table() {
  static const std::vector<PolicyRow> table = {
      {PolicyKind::Interleaving, {}},
      {PolicyKind::BankOnly, {{ColorClass::B, Pick::Lowest, 2}, {ColorClass::O, Pick::Highest, 1}}},
      {PolicyKind::AVP, {{ColorClass::O, Pick::Lowest, 2}}},
      {PolicyKind::BVP, {{ColorClass::B, Pick::Highest, 1}, {ColorClass::O, Pick::Lowest, 2}}},
      {PolicyKind::CVP, {{ColorClass::C, Pick::Lowest, 1}, {ColorClass::O, Pick::Lowest, 2}}},
      {PolicyKind::RandomInterleave, {}},
  };
  return table;
}

const BitList& class_bits(ColorClass cls, const AddressMapping& m) {
  switch (cls) {
    case ColorClass::B: return m.b_bits;
    case ColorClass::C: return m.c_bits;
    case ColorClass::O: return m.o_bits;
  }
  throw std::logic_error("unknown color class");
}

const char* class_name(ColorClass cls) {
  switch (cls) {
    case ColorClass::B: return "B";
    case ColorClass::C: return "C";
    case ColorClass::O: return "O";
  }
  return "?";
}

bool in(const BitList& list, unsigned bit) {
  return std::find(list.begin(), list.end(), bit) != list.end();
}

bool is_partitioning(PolicyKind k) {
  return k != PolicyKind::Interleaving && k != PolicyKind::RandomInterleave;
}

}  // namespace

std::string_view policy_name(PolicyKind k) {
  switch (k) {
    case PolicyKind::Interleaving: return "interleave";
    case PolicyKind::BankOnly: return "bank-only";
    case PolicyKind::AVP: return "a-vp";
    case PolicyKind::BVP: return "b-vp";
    case PolicyKind::CVP: return "c-vp";
    case PolicyKind::RandomInterleave: return "random";
  }
  return "?";
}

std::optional<PolicyKind> parse_policy(std::string_view name) {
  for (PolicyKind k : kAllPolicies) {
    if (policy_name(k) == name) return k;
  }
  return std::nullopt;
}

PolicySpec make_policy_spec(PolicyKind k, BitList color_bits, const AddressMapping& m) {
  std::sort(color_bits.begin(), color_bits.end());
  if (std::adjacent_find(color_bits.begin(), color_bits.end()) != color_bits.end()) {
    throw std::invalid_argument("duplicate color bit in policy " + std::string(policy_name(k)));
  }
  if (!is_partitioning(k) && !color_bits.empty()) {
    throw std::invalid_argument(std::string(policy_name(k)) + " takes no color bits");
  }
  if (color_bits.size() > 16) {
    throw std::invalid_argument("too many color bits in policy " + std::string(policy_name(k)));
  }

  PolicySpec spec;
  spec.kind = k;
  spec.partitioning = is_partitioning(k);
  for (unsigned i = 0; i < color_bits.size(); ++i) {
    const unsigned bit = color_bits[i];
    if (bit < m.page_offset_bits) {
      throw std::invalid_argument("color bit " + std::to_string(bit) + " below page offset");
    }
    const bool is_b = in(m.b_bits, bit);
    const bool is_c = in(m.c_bits, bit);
    const bool is_o = in(m.o_bits, bit);
    if (!is_b && !is_c && !is_o) {
      throw std::invalid_argument("bit " + std::to_string(bit) + " is not a color bit");
    }
    if (is_c || is_o) spec.llc_components.push_back(i);
    if (is_b || is_o) spec.bank_components.push_back(i);
  }
  spec.color_bits = std::move(color_bits);
  spec.page_colors = 1u << spec.color_bits.size();
  spec.llc_groups = 1u << spec.llc_components.size();
  spec.bank_groups = 1u << spec.bank_components.size();
  return spec;
}

PolicySpec policy_spec(PolicyKind k, const AddressMapping& m) {
  return policy_spec(k, m, {});
}

PolicySpec policy_spec(PolicyKind k, const AddressMapping& m, const PolicyOverrides& overrides) {
  if (auto it = overrides.find(k); it != overrides.end()) {
    return make_policy_spec(k, it->second, m);
  }
  const auto& table = default_table();
  auto row = std::find_if(table.begin(), table.end(), [k](const PolicyRow& r) { return r.kind == k; });
  BitList bits;
  for (const BitPick& pick : row->picks) {
    BitList pool = class_bits(pick.cls, m);
    std::sort(pool.begin(), pool.end());
    if (pool.size() < pick.count) {
      throw std::invalid_argument("policy " + std::string(policy_name(k)) + " needs " +
                                  std::to_string(pick.count) + " " + class_name(pick.cls) +
                                  "-bits, mapping has " + std::to_string(pool.size()));
    }
    if (pick.from == Pick::Lowest) {
      bits.insert(bits.end(), pool.begin(), pool.begin() + pick.count);
    } else {
      bits.insert(bits.end(), pool.end() - pick.count, pool.end());
    }
  }
  return make_policy_spec(k, std::move(bits), m);
}

ColorId page_color_under(const PolicySpec& spec, PageFrame f, const AddressMapping& m) {
  if (!spec.partitioning) {
    throw std::logic_error("policy " + std::string(policy_name(spec.kind)) +
                           " does not color pages");
  }
  return page_color(f, spec.color_bits, m);
}

GroupPair project(const PolicySpec& spec, ColorId color) {
  if (color >= spec.page_colors) throw std::out_of_range("color out of range for policy");
  GroupPair g;
  for (unsigned i = 0; i < spec.llc_components.size(); ++i) {
    g.llc_group |= ((color >> spec.llc_components[i]) & 1u) << i;
  }
  for (unsigned i = 0; i < spec.bank_components.size(); ++i) {
    g.bank_group |= ((color >> spec.bank_components[i]) & 1u) << i;
  }
  return g;
}

}  // namespace vmm
