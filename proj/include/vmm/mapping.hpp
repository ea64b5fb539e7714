#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace vmm {

/// Ordered list of physical-address bit positions.
using BitList = std::vector<unsigned>;

struct PhysAddr {
  std::uint64_t value = 0;
  friend bool operator==(PhysAddr, PhysAddr) = default;
};

struct PageFrame {
  std::uint64_t pfn = 0;
  friend bool operator==(PageFrame, PageFrame) = default;
  friend auto operator<=>(PageFrame, PageFrame) = default;
};

using ColorId = std::uint32_t;

/// Physical address layout as seen by the OS: which bits select the LLC set,
/// which select the DRAM bank, and how those bits split into the three color
/// classes. B-bits index only banks, C-bits only sets, O-bits both.
///
/// The defaults describe an i7-860 with 8 GiB, 64 banks and an 8 MiB 16-way
/// LLC with 64 B lines. Bank bits 19 and 20 exist in the hardware map but are
/// not colorable.
struct AddressMapping {
  unsigned page_offset_bits = 12;
  unsigned line_offset_bits = 6;
  BitList set_index_bits = {6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18};
  BitList bank_index_bits = {14, 15, 19, 20, 21, 22};
  BitList b_bits = {21, 22};
  BitList c_bits = {16, 17, 18};
  BitList o_bits = {14, 15};
  unsigned row_shift = 23;
  std::uint64_t memory_bytes = std::uint64_t{8} << 30;

  std::uint64_t page_bytes() const { return std::uint64_t{1} << page_offset_bits; }
  std::uint64_t line_bytes() const { return std::uint64_t{1} << line_offset_bits; }
  std::uint64_t total_pages() const { return memory_bytes >> page_offset_bits; }
  std::uint64_t set_count() const { return std::uint64_t{1} << set_index_bits.size(); }
  std::uint64_t bank_count() const { return std::uint64_t{1} << bank_index_bits.size(); }
  PhysAddr frame_base(PageFrame f) const { return {f.pfn << page_offset_bits}; }
};

struct MappingViolation {
  unsigned position;
  std::string what;
};

struct ValidationReport {
  std::vector<MappingViolation> violations;

  bool ok() const { return violations.empty(); }
  bool has(std::string_view what) const;
  std::string to_string() const;
};

ValidationReport validate_mapping(const AddressMapping& m);

/// Throws std::invalid_argument with the report text if `m` is invalid.
void require_valid(const AddressMapping& m);

/// Gathers the bits of `value` at `positions` into a dense integer, the first
/// listed position becoming bit 0.
std::uint64_t gather_bits(std::uint64_t value, std::span<const unsigned> positions);

struct Decomposed {
  std::uint64_t set_id = 0;
  std::uint64_t bank_id = 0;
  std::uint64_t row_id = 0;
  std::uint64_t line_tag = 0;
  friend bool operator==(const Decomposed&, const Decomposed&) = default;
};

/// Throws std::out_of_range when `a` lies beyond the configured memory.
Decomposed decompose(PhysAddr a, const AddressMapping& m);

/// Color of a frame over `bits` (sorted ascending, LSB-first). Every bit must
/// sit at or above the page offset, otherwise the page allocator cannot
/// control it and std::invalid_argument is thrown.
ColorId page_color(PageFrame f, std::span<const unsigned> bits, const AddressMapping& m);

}  // namespace vmm
