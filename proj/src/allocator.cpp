#include "vmm/allocator.hpp"

#include <algorithm>
#include <sstream>

#include "vmm/random.hpp"

namespace vmm {

namespace {

std::string color_list(const std::vector<ColorId>& colors) {
  std::ostringstream os;
  for (std::size_t i = 0; i < colors.size(); ++i) os << (i ? "," : "") << colors[i];
  return os.str();
}

}  // namespace

OutOfMemory::OutOfMemory(AppId app, std::vector<ColorId> empty_colors)
    : std::runtime_error("out of memory for app " + std::to_string(app) +
                         ": empty color pools {" + color_list(empty_colors) + "}"),
      app_(app),
      empty_colors_(std::move(empty_colors)) {}

PageAllocator::PageAllocator(std::uint64_t total_pages, PolicySpec spec, AddressMapping m,
                             AllocatorOptions options)
    : total_pages_(total_pages),
      spec_(std::move(spec)),
      mapping_(std::move(m)),
      options_(options),
      rng_(options.seed) {
  if (total_pages_ == 0) throw std::invalid_argument("allocator needs at least one frame");
  if (total_pages_ > (std::uint64_t{1} << 32)) {
    throw std::invalid_argument("allocator supports at most 2^32 frames");
  }
  pools_.resize(spec_.partitioning ? spec_.page_colors : 1);
  if (spec_.partitioning) {
    for (auto& pool : pools_) pool.frames.reserve(total_pages_ / pools_.size() + 1);
    for (std::uint64_t pfn = 0; pfn < total_pages_; ++pfn) {
      pools_[color_of(PageFrame{pfn})].frames.push_back(static_cast<std::uint32_t>(pfn));
    }
  } else {
    auto& frames = pools_[0].frames;
    frames.resize(total_pages_);
    for (std::uint64_t pfn = 0; pfn < total_pages_; ++pfn) frames[pfn] = static_cast<std::uint32_t>(pfn);
  }
}

ColorId PageAllocator::color_of(PageFrame f) const {
  if (!spec_.partitioning) return 0;
  return static_cast<ColorId>(gather_bits(f.pfn << mapping_.page_offset_bits, spec_.color_bits));
}

void PageAllocator::register_app(AppId app) {
  if (has_app(app)) return;
  AppState st;
  st.allowed.resize(spec_.page_colors);
  for (ColorId c = 0; c < spec_.page_colors; ++c) st.allowed[c] = c;
  apps_.emplace(app, std::move(st));
}

PageAllocator::AppState& PageAllocator::app_state(AppId app) {
  auto it = apps_.find(app);
  if (it == apps_.end()) throw std::invalid_argument("unknown app " + std::to_string(app));
  return it->second;
}

const PageAllocator::AppState& PageAllocator::app_state(AppId app) const {
  auto it = apps_.find(app);
  if (it == apps_.end()) throw std::invalid_argument("unknown app " + std::to_string(app));
  return it->second;
}

void PageAllocator::assign_quota(AppId app, std::span<const ColorId> colors) {
  if (colors.empty()) throw std::invalid_argument("empty color quota");
  for (ColorId c : colors) {
    if (c >= spec_.page_colors) {
      throw std::invalid_argument("unknown color " + std::to_string(c) + " (policy has " +
                                  std::to_string(spec_.page_colors) + ")");
    }
  }
  register_app(app);
  AppState& st = app_state(app);
  if (!st.page_table.empty()) {
    throw std::logic_error("quota change for app " + std::to_string(app) + " with live pages");
  }
  st.allowed.assign(colors.begin(), colors.end());
  std::sort(st.allowed.begin(), st.allowed.end());
  st.allowed.erase(std::unique(st.allowed.begin(), st.allowed.end()), st.allowed.end());
  st.next = 0;
  st.shared_group.reset();
}

void PageAllocator::coalesce(const std::vector<std::vector<AppId>>& groups) {
  std::vector<AppId> seen;
  for (const auto& group : groups) {
    for (AppId app : group) {
      app_state(app);
      if (std::find(seen.begin(), seen.end(), app) != seen.end()) {
        throw std::invalid_argument("app " + std::to_string(app) + " in overlapping groups");
      }
      seen.push_back(app);
    }
  }
  for (const auto& group : groups) {
    if (group.size() < 2) continue;
    std::vector<ColorId> joined;
    for (AppId app : group) {
      const auto& allowed = app_state(app).allowed;
      joined.insert(joined.end(), allowed.begin(), allowed.end());
    }
    std::sort(joined.begin(), joined.end());
    joined.erase(std::unique(joined.begin(), joined.end()), joined.end());
    const std::uint32_t label = next_group_++;
    for (AppId app : group) {
      AppState& st = app_state(app);
      st.allowed = joined;
      st.shared_group = label;
    }
  }
}

std::optional<ColorQuota> PageAllocator::quota(AppId app) const {
  auto it = apps_.find(app);
  if (it == apps_.end()) return std::nullopt;
  return ColorQuota{app, it->second.allowed, it->second.shared_group};
}

std::uint32_t PageAllocator::take_from(ColorId color) {
  Pool& pool = pools_[color];
  if (spec_.kind == PolicyKind::RandomInterleave) {
    const std::uint64_t i = uniform_below(rng_, pool.frames.size());
    const std::uint32_t pfn = pool.frames[i];
    pool.frames[i] = pool.frames.back();
    pool.frames.pop_back();
    return pfn;
  }
  return pool.frames[pool.cursor++];
}

std::uint32_t PageAllocator::take(AppState& st, AppId app) {
  if (!spec_.partitioning) {
    if (pools_[0].remaining() == 0) throw OutOfMemory(app, {0});
    return take_from(0);
  }
  const std::size_t n = st.allowed.size();
  for (std::size_t tried = 0; tried < n; ++tried) {
    const ColorId color = st.allowed[st.next % n];
    st.next = (st.next + 1) % n;
    if (pools_[color].remaining() > 0) return take_from(color);
  }
  if (options_.allow_fallback) {
    for (ColorId color = 0; color < pools_.size(); ++color) {
      if (pools_[color].remaining() > 0) return take_from(color);
    }
  }
  throw OutOfMemory(app, st.allowed);
}

PageFrame PageAllocator::touch(AppId app, std::uint64_t vpn) {
  AppState& st = app_state(app);
  if (auto it = st.page_table.find(vpn); it != st.page_table.end()) {
    it->second.accessed = true;
    return PageFrame{it->second.pfn};
  }
  const std::uint32_t pfn = take(st, app);
  st.page_table.emplace(vpn, Pte{pfn, true});
  const PageFrame frame{pfn};
  const ColorId color = color_of(frame);
  log_.push_back({app, vpn, frame, color, spec_.partitioning ? project(spec_, color) : GroupPair{}});
  return frame;
}

std::uint64_t PageAllocator::access_bit_scan_and_clear(AppId app) {
  AppState& st = app_state(app);
  std::uint64_t hot = 0;
  for (auto& [vpn, pte] : st.page_table) {
    hot += pte.accessed ? 1 : 0;
    pte.accessed = false;
  }
  return hot;
}

std::uint64_t PageAllocator::free_frames() const {
  std::uint64_t total = 0;
  for (const auto& pool : pools_) total += pool.remaining();
  return total;
}

std::uint64_t PageAllocator::free_frames(ColorId color) const {
  if (color >= pools_.size()) throw std::out_of_range("color out of range");
  return pools_[color].remaining();
}

std::size_t PageAllocator::page_count(AppId app) const { return app_state(app).page_table.size(); }

std::vector<PageFrame> PageAllocator::frames_of(AppId app) const {
  std::vector<PageFrame> out;
  for (const auto& [vpn, pte] : app_state(app).page_table) out.push_back(PageFrame{pte.pfn});
  std::sort(out.begin(), out.end());
  return out;
}

std::string PageAllocator::check_invariants() const {
  std::vector<std::uint8_t> owners(total_pages_, 0);
  std::ostringstream err;
  for (ColorId c = 0; c < pools_.size(); ++c) {
    const Pool& pool = pools_[c];
    for (std::size_t i = pool.cursor; i < pool.frames.size(); ++i) {
      const std::uint32_t pfn = pool.frames[i];
      if (spec_.partitioning && color_of(PageFrame{pfn}) != c) {
        err << "frame " << pfn << " in pool of wrong color " << c << "; ";
      }
      ++owners[pfn];
    }
  }
  for (const auto& [app, st] : apps_) {
    for (const auto& [vpn, pte] : st.page_table) {
      ++owners[pte.pfn];
      if (spec_.partitioning && !options_.allow_fallback &&
          !std::binary_search(st.allowed.begin(), st.allowed.end(), color_of(PageFrame{pte.pfn}))) {
        err << "frame " << pte.pfn << " outside quota of app " << app << "; ";
      }
    }
  }
  for (std::uint64_t pfn = 0; pfn < total_pages_; ++pfn) {
    if (owners[pfn] != 1) err << "frame " << pfn << " owned " << int(owners[pfn]) << " times; ";
  }
  if (free_frames() + allocated_frames() != total_pages_) err << "frame count not conserved; ";
  return err.str();
}

}  // namespace vmm
