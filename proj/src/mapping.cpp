#include "vmm/mapping.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace vmm {

namespace {

bool contains(const BitList& list, unsigned bit) {
  return std::find(list.begin(), list.end(), bit) != list.end();
}

void check_duplicates(const BitList& list, const char* name, std::vector<MappingViolation>& out) {
  BitList sorted = list;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] == sorted[i - 1]) {
      out.push_back({sorted[i], std::string("duplicate ") + name + " bit"});
    }
  }
}

}  // namespace

bool ValidationReport::has(std::string_view what) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const MappingViolation& v) { return v.what == what; });
}

std::string ValidationReport::to_string() const {
  if (ok()) return "ok";
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i].what << " (bit " << violations[i].position << ")";
  }
  return os.str();
}

ValidationReport validate_mapping(const AddressMapping& m) {
  ValidationReport r;
  auto& out = r.violations;

  const auto all_lists = {&m.set_index_bits, &m.bank_index_bits, &m.b_bits, &m.c_bits, &m.o_bits};
  for (const BitList* list : all_lists) {
    for (unsigned bit : *list) {
      if (bit >= 64) out.push_back({bit, "bit position out of range"});
    }
  }
  check_duplicates(m.set_index_bits, "set-index", out);
  check_duplicates(m.bank_index_bits, "bank-index", out);

  for (unsigned bit : m.set_index_bits) {
    if (bit < m.line_offset_bits) out.push_back({bit, "set-index bit inside line offset"});
  }
  if (m.page_offset_bits < m.line_offset_bits) {
    out.push_back({m.page_offset_bits, "page offset smaller than line offset"});
  }
  if (m.memory_bytes == 0 || (m.memory_bytes & (m.page_bytes() - 1)) != 0) {
    out.push_back({m.page_offset_bits, "memory size not a multiple of the page size"});
  }

  for (unsigned bit : m.o_bits) {
    if (bit < m.page_offset_bits) out.push_back({bit, "o-bit below page offset"});
    if (!contains(m.set_index_bits, bit)) out.push_back({bit, "o-bit does not index sets"});
    if (!contains(m.bank_index_bits, bit)) out.push_back({bit, "o-bit does not index banks"});
  }
  for (unsigned bit : m.b_bits) {
    if (bit < m.page_offset_bits) out.push_back({bit, "b-bit below page offset"});
    if (!contains(m.bank_index_bits, bit)) out.push_back({bit, "b-bit does not index banks"});
    if (contains(m.set_index_bits, bit)) out.push_back({bit, "b-bit indexes sets"});
  }
  for (unsigned bit : m.c_bits) {
    if (bit < m.page_offset_bits) out.push_back({bit, "c-bit below page offset"});
    if (!contains(m.set_index_bits, bit)) out.push_back({bit, "c-bit does not index sets"});
    if (contains(m.bank_index_bits, bit)) out.push_back({bit, "c-bit indexes banks"});
  }

  const std::pair<const BitList*, const BitList*> pairs[] = {
      {&m.b_bits, &m.c_bits}, {&m.b_bits, &m.o_bits}, {&m.c_bits, &m.o_bits}};
  for (auto [lhs, rhs] : pairs) {
    for (unsigned bit : *lhs) {
      if (contains(*rhs, bit)) out.push_back({bit, "bit in more than one color class"});
    }
  }
  return r;
}

void require_valid(const AddressMapping& m) {
  auto report = validate_mapping(m);
  if (!report.ok()) throw std::invalid_argument("invalid address mapping: " + report.to_string());
}

std::uint64_t gather_bits(std::uint64_t value, std::span<const unsigned> positions) {
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    out |= ((value >> positions[i]) & 1u) << i;
  }
  return out;
}

Decomposed decompose(PhysAddr a, const AddressMapping& m) {
  if (a.value >= m.memory_bytes) {
    throw std::out_of_range("physical address beyond configured memory");
  }
  return Decomposed{
      .set_id = gather_bits(a.value, m.set_index_bits),
      .bank_id = gather_bits(a.value, m.bank_index_bits),
      .row_id = a.value >> m.row_shift,
      .line_tag = a.value >> m.line_offset_bits,
  };
}

ColorId page_color(PageFrame f, std::span<const unsigned> bits, const AddressMapping& m) {
  for (unsigned bit : bits) {
    if (bit < m.page_offset_bits) {
      throw std::invalid_argument("color bit " + std::to_string(bit) +
                                  " lies below page granularity");
    }
  }
  const std::uint64_t base = m.frame_base(f).value;
  if (std::is_sorted(bits.begin(), bits.end())) {
    return static_cast<ColorId>(gather_bits(base, bits));
  }
  BitList sorted(bits.begin(), bits.end());
  std::sort(sorted.begin(), sorted.end());
  return static_cast<ColorId>(gather_bits(base, sorted));
}

}  // namespace vmm
