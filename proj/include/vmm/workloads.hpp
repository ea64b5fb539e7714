#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>

#include "vmm/trace.hpp"

namespace vmm {

enum class ArchetypeKind { Ccf, Llct, Llcm, Llch };
enum class Reuse { None, Loop, Zipf };

std::string_view archetype_name(ArchetypeKind k);  // ccf, llct, llcm, llch
std::optional<ArchetypeKind> parse_archetype(std::string_view name);
std::string_view reuse_name(Reuse r);  // none, loop, zipf
std::optional<Reuse> parse_reuse(std::string_view name);

/// Parameters of a synthetic single-app trace.
///
/// The trace is a sequence of page visits; a visit touches the page at
/// offsets 0, stride, 2*stride, ... up to the page end. Visit order:
///   none  each working-set page once, in address order (a stream)
///   loop  cyclic sweeps over the working set; with shuffle_sweeps every
///         sweep visits the pages in a freshly drawn random order
///   zipf  one warm-up sweep, then pages drawn from a Zipf(s) law over a
///         seeded random ranking of the working set
/// For loop and zipf, access_count is the trace length and must cover at
/// least one sweep; for none it is ignored.
struct ArchetypeParams {
  ArchetypeKind kind = ArchetypeKind::Ccf;
  std::uint64_t working_set_pages = 8;
  std::uint64_t access_count = 300000;
  Reuse reuse = Reuse::Loop;
  double zipf_s = 0.8;
  bool shuffle_sweeps = false;
  std::uint32_t stride_bytes = 64;
  std::uint64_t seed = 1;
  std::string app = "A";
  std::uint64_t base_vaddr = 0x10000000;
};

/// Default parameters of each archetype, tuned against the default hierarchy
/// so that the offline quota probe labels every seed with its own kind.
ArchetypeParams canonical_params(ArchetypeKind kind, std::uint64_t seed = 1);

/// Draws an archetype of a uniformly chosen kind with parameters jittered
/// around the canonical ones (working set, length and zipf exponent).
ArchetypeParams random_params(std::mt19937_64& rng);

/// Throws std::invalid_argument for unusable parameters.
void validate(const ArchetypeParams& p);

Trace gen(const ArchetypeParams& p);

/// Two apps alternating line accesses to pages that share banks but sit in
/// different DRAM rows once placed next-free. Each app first touches
/// `pages` pages in turn, then both walk every line of their pages in lock
/// step. With `pages` >= frames per row the two footprints land in distinct
/// rows of the same banks under interleaved placement.
Trace gen_bank_pingpong(std::uint64_t pages = 2048, std::uint64_t page_bytes = 4096,
                        std::uint64_t line_bytes = 64);

/// Interleaves traces round-robin, `k` records per turn, preserving each
/// trace's order. Trace i becomes app i on core i; app names must be unique.
/// With a shuffle seed every round still serves each app once, but in a
/// freshly drawn order, so apps do not advance in lock step.
/// Throws std::invalid_argument when there are more apps than `cores`.
Trace mix(std::span<const Trace> traces, unsigned k = 1, unsigned cores = 8,
          std::optional<std::uint64_t> shuffle_seed = std::nullopt);

/// The subsequence of records belonging to app `app`, as a one-app trace on
/// its original core.
Trace project_app(const Trace& t, std::uint32_t app);

/// Number of distinct virtual pages touched by app `app`.
std::uint64_t distinct_pages(const Trace& t, std::uint32_t app, unsigned page_offset_bits = 12);

}  // namespace vmm
