#include "vmm/workloads.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include "vmm/random.hpp"

namespace vmm {

namespace {

constexpr std::uint64_t kPageBytes = 4096;

class ZipfSampler {
 public:
  ZipfSampler(std::uint64_t n, double s) : cdf_(n) {
    double acc = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
      acc += 1.0 / std::pow(static_cast<double>(i + 1), s);
      cdf_[i] = acc;
    }
    for (double& v : cdf_) v /= acc;
  }

  std::uint64_t operator()(std::mt19937_64& rng) const {
    const double u = unit_double(rng);
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<std::uint64_t>(it - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
};

}  // namespace

std::string_view archetype_name(ArchetypeKind k) {
  switch (k) {
    case ArchetypeKind::Ccf: return "ccf";
    case ArchetypeKind::Llct: return "llct";
    case ArchetypeKind::Llcm: return "llcm";
    case ArchetypeKind::Llch: return "llch";
  }
  return "?";
}

std::optional<ArchetypeKind> parse_archetype(std::string_view name) {
  for (auto k : {ArchetypeKind::Ccf, ArchetypeKind::Llct, ArchetypeKind::Llcm, ArchetypeKind::Llch}) {
    if (archetype_name(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view reuse_name(Reuse r) {
  switch (r) {
    case Reuse::None: return "none";
    case Reuse::Loop: return "loop";
    case Reuse::Zipf: return "zipf";
  }
  return "?";
}

std::optional<Reuse> parse_reuse(std::string_view name) {
  for (auto r : {Reuse::None, Reuse::Loop, Reuse::Zipf}) {
    if (reuse_name(r) == name) return r;
  }
  return std::nullopt;
}

ArchetypeParams canonical_params(ArchetypeKind kind, std::uint64_t seed) {
  ArchetypeParams p;
  p.kind = kind;
  p.seed = seed;
  p.app = std::string(archetype_name(kind));
  switch (kind) {
    case ArchetypeKind::Ccf:
      p.working_set_pages = 8;
      p.reuse = Reuse::Loop;
      p.access_count = 300000;
      break;
    case ArchetypeKind::Llct:
      p.working_set_pages = 8192;
      p.reuse = Reuse::None;
      break;
    case ArchetypeKind::Llcm:
      p.working_set_pages = 1024;
      p.reuse = Reuse::Zipf;
      p.zipf_s = 1.8;
      p.access_count = 600000;
      break;
    case ArchetypeKind::Llch:
      p.working_set_pages = 1536;
      p.reuse = Reuse::Loop;
      p.access_count = 600000;
      break;
  }
  return p;
}

ArchetypeParams random_params(std::mt19937_64& rng) {
  auto between = [&](std::uint64_t lo, std::uint64_t hi) { return lo + uniform_below(rng, hi - lo + 1); };
  const auto kind = static_cast<ArchetypeKind>(uniform_below(rng, 4));
  ArchetypeParams p = canonical_params(kind, rng());
  switch (kind) {
    case ArchetypeKind::Ccf:
      p.working_set_pages = between(2, 24);
      p.access_count = between(200000, 400000);
      break;
    case ArchetypeKind::Llct:
      p.working_set_pages = between(6144, 12288);
      break;
    case ArchetypeKind::Llcm:
      p.working_set_pages = between(768, 1280);
      p.zipf_s = 1.7 + 0.3 * unit_double(rng);
      p.access_count = between(500000, 700000);
      break;
    case ArchetypeKind::Llch:
      p.working_set_pages = between(1280, 1792);
      p.access_count = between(500000, 700000);
      break;
  }
  return p;
}

void validate(const ArchetypeParams& p) {
  if (p.working_set_pages == 0) throw std::invalid_argument("working set must hold at least one page");
  if (p.stride_bytes == 0 || p.stride_bytes > kPageBytes || kPageBytes % p.stride_bytes != 0) {
    throw std::invalid_argument("stride must divide the 4096-byte page");
  }
  if (p.base_vaddr % kPageBytes != 0) throw std::invalid_argument("base address must be page aligned");
  if (p.reuse == Reuse::Zipf && !(p.zipf_s > 0.0)) throw std::invalid_argument("zipf exponent must be positive");
  if (p.app.empty() || p.app.find_first_of(" \t\r\n#") != std::string::npos) {
    throw std::invalid_argument("app name must be a non-empty token");
  }
  const std::uint64_t sweep = p.working_set_pages * (kPageBytes / p.stride_bytes);
  if (p.reuse != Reuse::None && p.access_count < sweep) {
    throw std::invalid_argument("access_count " + std::to_string(p.access_count) +
                                " does not cover one sweep of " + std::to_string(sweep));
  }
}

Trace gen(const ArchetypeParams& p) {
  validate(p);
  const std::uint64_t per_visit = kPageBytes / p.stride_bytes;
  const std::uint64_t ws = p.working_set_pages;
  const std::uint64_t total = p.reuse == Reuse::None ? ws * per_visit : p.access_count;

  Trace t;
  t.apps = {p.app};
  t.records.reserve(total);
  auto visit = [&](std::uint64_t page) {
    const std::uint64_t base = p.base_vaddr + page * kPageBytes;
    for (std::uint64_t j = 0; j < per_visit && t.records.size() < total; ++j) {
      t.records.push_back(TraceRecord{0, 0, base + j * p.stride_bytes, Op::Read});
    }
  };

  switch (p.reuse) {
    case Reuse::None:
      for (std::uint64_t page = 0; page < ws; ++page) visit(page);
      break;
    case Reuse::Loop: {
      std::vector<std::uint64_t> order(ws);
      std::iota(order.begin(), order.end(), 0);
      std::mt19937_64 rng(p.seed);
      while (t.records.size() < total) {
        if (p.shuffle_sweeps) {
          for (std::uint64_t i = ws; i > 1; --i) std::swap(order[i - 1], order[uniform_below(rng, i)]);
        }
        for (std::uint64_t page : order) visit(page);
      }
      break;
    }
    case Reuse::Zipf: {
      std::mt19937_64 rng(p.seed);
      std::vector<std::uint64_t> rank_to_page(ws);
      std::iota(rank_to_page.begin(), rank_to_page.end(), 0);
      for (std::uint64_t i = ws; i > 1; --i) {
        std::swap(rank_to_page[i - 1], rank_to_page[uniform_below(rng, i)]);
      }
      for (std::uint64_t page = 0; page < ws; ++page) visit(page);
      const ZipfSampler zipf(ws, p.zipf_s);
      while (t.records.size() < total) visit(rank_to_page[zipf(rng)]);
      break;
    }
  }
  return t;
}

Trace gen_bank_pingpong(std::uint64_t pages, std::uint64_t page_bytes, std::uint64_t line_bytes) {
  if (pages == 0 || line_bytes == 0 || page_bytes % line_bytes != 0) {
    throw std::invalid_argument("bad ping-pong geometry");
  }
  Trace t;
  t.apps = {"ping", "pong"};
  const std::uint64_t base = 0x10000000;
  for (std::uint32_t app = 0; app < 2; ++app) {
    for (std::uint64_t page = 0; page < pages; ++page) {
      t.records.push_back({app, app, base + page * page_bytes, Op::Read});
    }
  }
  // Line 0 of every page is now cached; walk the remaining lines.
  for (std::uint64_t page = 0; page < pages; ++page) {
    for (std::uint64_t off = line_bytes; off < page_bytes; off += line_bytes) {
      for (std::uint32_t app = 0; app < 2; ++app) {
        t.records.push_back({app, app, base + page * page_bytes + off, Op::Read});
      }
    }
  }
  return t;
}

Trace mix(std::span<const Trace> traces, unsigned k, unsigned cores, std::optional<std::uint64_t> shuffle_seed) {
  if (traces.empty()) throw std::invalid_argument("nothing to mix");
  if (k == 0) throw std::invalid_argument("round-robin quantum must be positive");
  if (traces.size() > cores) {
    throw std::invalid_argument(std::to_string(traces.size()) + " apps but only " +
                                std::to_string(cores) + " cores");
  }
  Trace out;
  std::size_t total = 0;
  for (const Trace& t : traces) {
    if (t.apps.size() != 1) throw std::invalid_argument("mix takes single-app traces");
    if (std::find(out.apps.begin(), out.apps.end(), t.apps[0]) != out.apps.end()) {
      throw std::invalid_argument("duplicate app name '" + t.apps[0] + "' in mix");
    }
    out.apps.push_back(t.apps[0]);
    total += t.records.size();
  }
  out.records.reserve(total);
  std::vector<std::size_t> pos(traces.size(), 0);
  std::vector<std::uint32_t> order(traces.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(shuffle_seed.value_or(0));
  while (out.records.size() < total) {
    if (shuffle_seed) {
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_below(rng, i)]);
    }
    for (std::uint32_t i : order) {
      const auto& recs = traces[i].records;
      for (unsigned n = 0; n < k && pos[i] < recs.size(); ++n) {
        TraceRecord r = recs[pos[i]++];
        r.app = i;
        r.core = i;
        out.records.push_back(r);
      }
    }
  }
  return out;
}

Trace project_app(const Trace& t, std::uint32_t app) {
  if (app >= t.apps.size()) throw std::out_of_range("no such app in trace");
  Trace out;
  out.apps = {t.apps[app]};
  for (const TraceRecord& r : t.records) {
    if (r.app == app) out.records.push_back({0, r.core, r.vaddr, r.op});
  }
  return out;
}

std::uint64_t distinct_pages(const Trace& t, std::uint32_t app, unsigned page_offset_bits) {
  std::unordered_set<std::uint64_t> pages;
  for (const TraceRecord& r : t.records) {
    if (r.app == app) pages.insert(r.vaddr >> page_offset_bits);
  }
  return pages.size();
}

}  // namespace vmm
