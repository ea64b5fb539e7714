#include "vmm/classifier.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "vmm/policies.hpp"
#include "vmm/simulate.hpp"

namespace vmm {

std::string_view category_name(Category c) {
  switch (c) {
    case Category::CCF: return "CCF";
    case Category::LLCT: return "LLCT";
    case Category::LLCM: return "LLCM";
    case Category::LLCH: return "LLCH";
  }
  return "?";
}

std::optional<Category> parse_category(std::string_view name) {
  for (Category c : kAllCategories) {
    if (category_name(c) == name) return c;
  }
  return std::nullopt;
}

std::vector<double> SamplerConfig::default_weights() {
  std::vector<double> w(32);
  std::iota(w.begin(), w.end(), 1.0);
  return w;
}

void SamplerConfig::validate() const {
  if (period == 0) throw std::invalid_argument("sampling period must be positive");
  if (bucket_weights.empty()) throw std::invalid_argument("need at least one WPD bucket");
  for (std::size_t i = 1; i < bucket_weights.size(); ++i) {
    if (bucket_weights[i] < bucket_weights[i - 1]) {
      throw std::invalid_argument("WPD bucket weights must be non-decreasing");
    }
  }
}

Thresholds Thresholds::defaults() {
  Thresholds t;
  // Produced by vmm_calibrate over the canonical and randomized archetype
  // corpora with the default mapping, hierarchy and sampler.
  t.hot_page_low = 69.05;
  t.hot_page_high = 605.58;
  t.wpd_low = 8.252;
  t.wpd_high = 8.252;
  return t;
}

void Thresholds::validate() const {
  if (hot_page_low > hot_page_high) throw std::invalid_argument("hot_page_low exceeds hot_page_high");
  if (wpd_low > wpd_high) throw std::invalid_argument("wpd_low exceeds wpd_high");
  if (!(d_ccf_llct > 0 && d_ccf_llct < 1) || !(d_llch > 0 && d_llch < 1)) {
    throw std::invalid_argument("degradation cutoffs must lie in (0,1)");
  }
  if (d_ccf_llct > d_llch) throw std::invalid_argument("d_ccf_llct exceeds d_llch");
}

double OnlineEvidence::mean_hot_pages() const {
  if (hot_pages.empty()) throw std::invalid_argument("no completed sampling interval");
  const double sum = std::accumulate(hot_pages.begin(), hot_pages.end(), 0.0);
  return sum / static_cast<double>(hot_pages.size());
}

std::size_t wpd_bucket(std::uint64_t count, std::size_t buckets) {
  const std::size_t b = static_cast<std::size_t>(std::bit_width(count)) - 1;
  return std::min(b, buckets - 1);
}

double job2_wpd(std::span<const std::uint64_t> counters, const SamplerConfig& cfg) {
  double weighted = 0.0;
  std::uint64_t touched = 0;
  for (std::uint64_t c : counters) {
    if (c == 0) continue;
    weighted += cfg.bucket_weights[wpd_bucket(c, cfg.bucket_weights.size())];
    ++touched;
  }
  if (touched == 0) throw std::invalid_argument("WPD needs at least one accessed page");
  return weighted / static_cast<double>(touched);
}

std::uint64_t job1_step(PageAllocator& alloc, AppId app, OnlineEvidence& evidence) {
  const std::uint64_t hot = alloc.access_bit_scan_and_clear(app);
  evidence.hot_pages.push_back(hot);
  return hot;
}

OnlineSampler::OnlineSampler(SamplerConfig cfg, AppId app) : cfg_(std::move(cfg)), app_(app) {
  cfg_.validate();
}

void OnlineSampler::on_access(PageAllocator& alloc, std::uint64_t vpn) {
  ++evidence_.access_counters[vpn];
  if (++in_interval_ == cfg_.period) {
    job1_step(alloc, app_, evidence_);
    in_interval_ = 0;
  }
}

OnlineEvidence OnlineSampler::finish() const {
  OnlineEvidence out = evidence_;
  out.touched_pages = out.access_counters.size();
  if (!out.access_counters.empty()) {
    std::vector<std::uint64_t> counts;
    counts.reserve(out.access_counters.size());
    for (const auto& [vpn, c] : out.access_counters) counts.push_back(c);
    out.wpd = job2_wpd(counts, cfg_);
  }
  return out;
}

OnlineEvidence sample_trace(const Trace& trace, const SamplerConfig& cfg, const AddressMapping& m) {
  if (trace.apps.size() != 1) throw std::invalid_argument("sampling needs a single-app trace");
  PageAllocator alloc(m.total_pages(), policy_spec(PolicyKind::Interleaving, m), m);
  alloc.register_app(0);
  OnlineSampler sampler(cfg, 0);
  for (const TraceRecord& r : trace.records) {
    const std::uint64_t vpn = r.vaddr >> m.page_offset_bits;
    alloc.touch(0, vpn);
    sampler.on_access(alloc, vpn);
  }
  return sampler.finish();
}

namespace {

Category decide(double h, double w, const Thresholds& t) {
  if (h <= t.hot_page_low) return Category::CCF;
  if (h >= t.hot_page_high) {
    if (w <= t.wpd_low) return Category::LLCT;
    if (w >= t.wpd_high) return Category::LLCH;
  }
  return Category::LLCM;
}

}  // namespace

Category classify_online(const OnlineEvidence& evidence, const Thresholds& t) {
  return decide(evidence.mean_hot_pages(), evidence.wpd, t);
}

OfflineResult classify_offline(const Trace& trace, const AddressMapping& m,
                               const HierarchyConfig& hcfg, const Thresholds& t) {
  if (trace.empty()) throw std::invalid_argument("cannot classify an empty trace");
  if (trace.apps.size() != 1) throw std::invalid_argument("offline classification needs a single-app trace");

  // Eight LLC groups from the three lowest set-indexing color bits.
  BitList llc_bits = m.c_bits;
  llc_bits.insert(llc_bits.end(), m.o_bits.begin(), m.o_bits.end());
  std::sort(llc_bits.begin(), llc_bits.end());
  if (llc_bits.size() < 3) throw std::invalid_argument("mapping has fewer than 8 LLC color groups");
  llc_bits.resize(3);
  const PolicySpec probe = make_policy_spec(PolicyKind::CVP, llc_bits, m);

  auto cycles_with = [&](std::span<const ColorId> colors) {
    PageAllocator alloc(m.total_pages(), probe, m);
    alloc.assign_quota(0, colors);
    Hierarchy h(hcfg, m);
    return proxy_cycles(run_trace(trace, alloc, h).global, hcfg.latency);
  };
  const std::vector<ColorId> all = {0, 1, 2, 3, 4, 5, 6, 7};
  const std::vector<ColorId> one = {0};

  OfflineResult r{};
  r.cycles_full = cycles_with(all);
  r.cycles_eighth = cycles_with(one);
  r.degradation = r.cycles_full > 0 ? (r.cycles_eighth - r.cycles_full) / r.cycles_full : 0.0;
  r.footprint_pages = [&] {
    std::unordered_set<std::uint64_t> pages;
    for (const TraceRecord& rec : trace.records) pages.insert(rec.vaddr >> m.page_offset_bits);
    return static_cast<std::uint64_t>(pages.size());
  }();
  const std::uint64_t cutoff = t.footprint_pages ? t.footprint_pages : hcfg.private_pages(m);

  if (r.degradation < t.d_ccf_llct) {
    r.category = r.footprint_pages <= cutoff ? Category::CCF : Category::LLCT;
  } else if (r.degradation >= t.d_llch) {
    r.category = Category::LLCH;
  } else {
    r.category = Category::LLCM;
  }
  return r;
}

namespace {

std::vector<double> cut_points(std::vector<double> values, bool geometric, std::size_t max_points) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<double> cuts;
  if (values.empty()) return cuts;
  auto mid = [&](double a, double b) {
    return geometric && a > 0 && b > 0 ? std::sqrt(a * b) : 0.5 * (a + b);
  };
  cuts.push_back(geometric && values.front() > 0 ? values.front() / 2 : values.front() - 1);
  for (std::size_t i = 1; i < values.size(); ++i) cuts.push_back(mid(values[i - 1], values[i]));
  cuts.push_back(geometric ? values.back() * 2 : values.back() + 1);
  if (cuts.size() > max_points) {
    std::vector<double> thinned;
    for (std::size_t i = 0; i < max_points; ++i) {
      thinned.push_back(cuts[i * (cuts.size() - 1) / (max_points - 1)]);
    }
    thinned.erase(std::unique(thinned.begin(), thinned.end()), thinned.end());
    cuts = std::move(thinned);
  }
  return cuts;
}

double gap(double cut, const std::vector<double>& values, bool geometric) {
  double best = std::numeric_limits<double>::infinity();
  for (double v : values) {
    const double d = geometric && v > 0 && cut > 0 ? std::abs(std::log(v / cut)) : std::abs(v - cut);
    best = std::min(best, d);
  }
  return best;
}

}  // namespace

Calibration calibrate_thresholds(std::span<const LabeledEvidence> samples, Thresholds base) {
  if (samples.empty()) throw std::invalid_argument("calibration needs samples");
  std::vector<double> hs, ws;
  for (const auto& s : samples) {
    hs.push_back(s.hot_pages);
    ws.push_back(s.wpd);
  }
  const auto hot_cuts = cut_points(hs, true, 48);
  const auto wpd_cuts = cut_points(ws, false, 48);

  auto score = [&](const Thresholds& t) {
    std::size_t ok = 0;
    for (const auto& s : samples) ok += decide(s.hot_pages, s.wpd, t) == s.label;
    return ok;
  };
  auto margin = [&](const Thresholds& t) {
    return std::min(gap(t.hot_page_low, hs, true), gap(t.hot_page_high, hs, true)) +
           std::min(gap(t.wpd_low, ws, false), gap(t.wpd_high, ws, false));
  };

  Calibration best{base, 0, samples.size()};
  double best_margin = -1;
  for (std::size_t a = 0; a < hot_cuts.size(); ++a) {
    for (std::size_t b = a; b < hot_cuts.size(); ++b) {
      for (std::size_t c = 0; c < wpd_cuts.size(); ++c) {
        for (std::size_t d = c; d < wpd_cuts.size(); ++d) {
          Thresholds t = base;
          t.hot_page_low = hot_cuts[a];
          t.hot_page_high = hot_cuts[b];
          t.wpd_low = wpd_cuts[c];
          t.wpd_high = wpd_cuts[d];
          const std::size_t s = score(t);
          if (s < best.agreeing) continue;
          const double mg = margin(t);
          if (s > best.agreeing || mg > best_margin) {
            best.thresholds = t;
            best.agreeing = s;
            best_margin = mg;
          }
        }
      }
    }
  }
  return best;
}

}  // namespace vmm
