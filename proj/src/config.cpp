#include "vmm/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace vmm {

using nlohmann::json;

namespace {

/// Reads keys out of one JSON object and rejects leftovers.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where_ + "." + key + ": wrong type");
    }
  }

  const json& sub(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

void read_cache(const json& j, const std::string& where, CacheConfig& c) {
  ObjectReader r(j, where);
  r.get("size_bytes", c.size_bytes);
  r.get("ways", c.ways);
  r.get("line_bytes", c.line_bytes);
  r.finish();
}

void read_mapping(const json& j, AddressMapping& m) {
  ObjectReader r(j, "mapping");
  r.get("page_offset_bits", m.page_offset_bits);
  r.get("line_offset_bits", m.line_offset_bits);
  r.get("set_index_bits", m.set_index_bits);
  r.get("bank_index_bits", m.bank_index_bits);
  r.get("b_bits", m.b_bits);
  r.get("c_bits", m.c_bits);
  r.get("o_bits", m.o_bits);
  r.get("row_shift", m.row_shift);
  r.get("memory_bytes", m.memory_bytes);
  r.finish();
}

void read_hierarchy(const json& j, HierarchyConfig& h) {
  ObjectReader r(j, "hierarchy");
  if (r.has("private_cache")) read_cache(r.sub("private_cache"), "hierarchy.private_cache", h.private_cache);
  if (r.has("llc")) read_cache(r.sub("llc"), "hierarchy.llc", h.llc);
  r.get("cores", h.cores);
  r.get("epoch_accesses", h.epoch_accesses);
  if (r.has("latency")) {
    const json& lat = r.sub("latency");
    ObjectReader l(lat, "hierarchy.latency");
    for (const char* key : {"private_hit", "llc_hit", "row_hit", "row_miss", "row_conflict"}) {
      if (!l.has(key)) throw ConfigError(std::string("hierarchy.latency: missing entry '") + key + "'");
    }
    l.get("private_hit", h.latency.private_hit);
    l.get("llc_hit", h.latency.llc_hit);
    l.get("row_hit", h.latency.row_hit);
    l.get("row_miss", h.latency.row_miss);
    l.get("row_conflict", h.latency.row_conflict);
    l.finish();
  }
  r.finish();
}

void read_sampler(const json& j, SamplerConfig& s) {
  ObjectReader r(j, "sampler");
  r.get("period", s.period);
  r.get("bucket_weights", s.bucket_weights);
  r.finish();
}

void read_thresholds(const json& j, Thresholds& t) {
  ObjectReader r(j, "thresholds");
  r.get("hot_page_low", t.hot_page_low);
  r.get("hot_page_high", t.hot_page_high);
  r.get("wpd_low", t.wpd_low);
  r.get("wpd_high", t.wpd_high);
  r.get("d_ccf_llct", t.d_ccf_llct);
  r.get("d_llch", t.d_llch);
  r.get("footprint_pages", t.footprint_pages);
  r.finish();
}

ArchetypeParams read_archetype(const json& j, const std::string& where, std::uint64_t default_seed,
                               std::size_t index) {
  ObjectReader r(j, where);
  std::string kind_name;
  r.get("kind", kind_name);
  const auto kind = parse_archetype(kind_name);
  if (!kind) throw ConfigError(where + ".kind: expected ccf, llct, llcm or llch");
  std::uint64_t seed = default_seed;
  r.get("seed", seed);
  ArchetypeParams p = canonical_params(*kind, seed);
  p.app = std::string(archetype_name(*kind)) + std::to_string(index);
  r.get("pages", p.working_set_pages);
  r.get("accesses", p.access_count);
  if (r.has("reuse")) {
    std::string reuse;
    r.get("reuse", reuse);
    const auto parsed = parse_reuse(reuse);
    if (!parsed) throw ConfigError(where + ".reuse: expected none, loop or zipf");
    p.reuse = *parsed;
  }
  r.get("zipf_s", p.zipf_s);
  r.get("shuffle_sweeps", p.shuffle_sweeps);
  r.get("stride", p.stride_bytes);
  r.get("app", p.app);
  r.get("base_vaddr", p.base_vaddr);
  r.finish();
  return p;
}

WorkloadSource read_source(const json& j, const std::filesystem::path& base_dir, std::uint64_t seed,
                           std::size_t index) {
  const std::string where = "workload[" + std::to_string(index) + "]";
  if (j.is_string()) return TraceSource{base_dir / j.get<std::string>()};
  ObjectReader r(j, where);
  WorkloadSource out;
  int kinds = 0;
  if (r.has("trace")) {
    std::string path;
    r.get("trace", path);
    out = TraceSource{base_dir / path};
    ++kinds;
  }
  if (r.has("archetype")) {
    out = read_archetype(r.sub("archetype"), where + ".archetype", seed, index);
    ++kinds;
  }
  if (r.has("pingpong")) {
    PingPongSource pp;
    ObjectReader p(r.sub("pingpong"), where + ".pingpong");
    p.get("pages", pp.pages);
    p.finish();
    out = pp;
    ++kinds;
  }
  if (kinds != 1) throw ConfigError(where + ": expected exactly one of trace, archetype, pingpong");
  r.finish();
  return out;
}

json cache_json(const CacheConfig& c) {
  return {{"size_bytes", c.size_bytes}, {"ways", c.ways}, {"line_bytes", c.line_bytes}};
}

}  // namespace

void ExperimentConfig::validate() const {
  const ValidationReport report = validate_mapping(mapping);
  if (!report.ok()) throw ConfigError("invalid mapping: " + report.to_string());
  try {
    hierarchy.private_cache.validate();
    hierarchy.llc.validate();
    sampler.validate();
    thresholds.validate();
    for (const auto& [kind, bits] : overrides) policy_spec(kind, mapping, overrides);
    for (const auto& w : workload) {
      if (const auto* p = std::get_if<ArchetypeParams>(&w)) vmm::validate(*p);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (hierarchy.llc.sets() != mapping.set_count()) {
    throw ConfigError("LLC set count does not match the mapping's set-index bits");
  }
  if (hierarchy.llc.line_bytes != mapping.line_bytes() || hierarchy.private_cache.line_bytes != mapping.line_bytes()) {
    throw ConfigError("cache line size does not match the mapping's line offset");
  }
  if (hierarchy.cores == 0) throw ConfigError("hierarchy needs at least one core");
  if (hierarchy.epoch_accesses == 0) throw ConfigError("epoch_accesses must be positive");
  if (schedule_k == 0) throw ConfigError("schedule_k must be positive");
  if (core_count && *core_count != 4 && *core_count != 8) throw ConfigError("core_count must be 4 or 8");
  if (small_share_llc_groups == 0) throw ConfigError("small_share_llc_groups must be positive");
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                              std::optional<std::uint64_t> seed) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  ObjectReader r(j, "config");
  r.get("seed", cfg.seed);
  if (seed) cfg.seed = *seed;
  if (r.has("mapping")) read_mapping(r.sub("mapping"), cfg.mapping);
  if (r.has("hierarchy")) read_hierarchy(r.sub("hierarchy"), cfg.hierarchy);
  if (r.has("sampler")) read_sampler(r.sub("sampler"), cfg.sampler);
  if (r.has("thresholds")) read_thresholds(r.sub("thresholds"), cfg.thresholds);
  if (r.has("workload")) {
    const json& w = r.sub("workload");
    if (!w.is_array()) throw ConfigError("workload: expected a list");
    for (std::size_t i = 0; i < w.size(); ++i) cfg.workload.push_back(read_source(w[i], base_dir, cfg.seed, i));
  }
  r.get("schedule_k", cfg.schedule_k);
  r.get("schedule_shuffle", cfg.schedule_shuffle);
  if (r.has("policy")) {
    std::string name;
    r.get("policy", name);
    if (name != "auto") {
      const auto k = parse_policy(name);
      if (!k) throw ConfigError("unknown policy '" + name + "'");
      cfg.policy = *k;
    }
  }
  if (r.has("core_count")) {
    unsigned cores = 0;
    r.get("core_count", cores);
    cfg.core_count = cores;
  }
  r.get("multithreaded", cfg.multithreaded);
  r.get("allow_fallback", cfg.allow_fallback);
  if (r.has("policy_overrides")) {
    const json& o = r.sub("policy_overrides");
    if (!o.is_object()) throw ConfigError("policy_overrides: expected an object");
    for (const auto& [name, bits] : o.items()) {
      const auto k = parse_policy(name);
      if (!k) throw ConfigError("policy_overrides: unknown policy '" + name + "'");
      try {
        cfg.overrides[*k] = bits.get<BitList>();
      } catch (const json::exception&) {
        throw ConfigError("policy_overrides." + name + ": expected a list of bit positions");
      }
    }
  }
  r.get("small_share_llc_groups", cfg.small_share_llc_groups);
  r.get("threads", cfg.threads);
  if (r.has("out")) {
    std::string out;
    r.get("out", out);
    cfg.out = out;
  }
  r.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path(), seed);
}

std::string dump_config(const ExperimentConfig& cfg) {
  const AddressMapping& m = cfg.mapping;
  const HierarchyConfig& h = cfg.hierarchy;
  const Thresholds& t = cfg.thresholds;
  json j;
  j["mapping"] = {{"page_offset_bits", m.page_offset_bits}, {"line_offset_bits", m.line_offset_bits},
                  {"set_index_bits", m.set_index_bits},     {"bank_index_bits", m.bank_index_bits},
                  {"b_bits", m.b_bits},                     {"c_bits", m.c_bits},
                  {"o_bits", m.o_bits},                     {"row_shift", m.row_shift},
                  {"memory_bytes", m.memory_bytes}};
  j["hierarchy"] = {{"private_cache", cache_json(h.private_cache)},
                    {"llc", cache_json(h.llc)},
                    {"cores", h.cores},
                    {"epoch_accesses", h.epoch_accesses},
                    {"latency",
                     {{"private_hit", h.latency.private_hit},
                      {"llc_hit", h.latency.llc_hit},
                      {"row_hit", h.latency.row_hit},
                      {"row_miss", h.latency.row_miss},
                      {"row_conflict", h.latency.row_conflict}}}};
  j["sampler"] = {{"period", cfg.sampler.period}, {"bucket_weights", cfg.sampler.bucket_weights}};
  j["thresholds"] = {{"hot_page_low", t.hot_page_low}, {"hot_page_high", t.hot_page_high},
                     {"wpd_low", t.wpd_low},           {"wpd_high", t.wpd_high},
                     {"d_ccf_llct", t.d_ccf_llct},     {"d_llch", t.d_llch},
                     {"footprint_pages", t.footprint_pages}};
  json w = json::array();
  for (const auto& src : cfg.workload) {
    if (const auto* tr = std::get_if<TraceSource>(&src)) {
      w.push_back({{"trace", tr->path.string()}});
    } else if (const auto* pp = std::get_if<PingPongSource>(&src)) {
      w.push_back({{"pingpong", {{"pages", pp->pages}}}});
    } else {
      const auto& p = std::get<ArchetypeParams>(src);
      w.push_back({{"archetype",
                    {{"kind", archetype_name(p.kind)},
                     {"pages", p.working_set_pages},
                     {"accesses", p.access_count},
                     {"reuse", reuse_name(p.reuse)},
                     {"zipf_s", p.zipf_s},
                     {"shuffle_sweeps", p.shuffle_sweeps},
                     {"stride", p.stride_bytes},
                     {"seed", p.seed},
                     {"app", p.app},
                     {"base_vaddr", p.base_vaddr}}}});
    }
  }
  j["workload"] = w;
  j["schedule_k"] = cfg.schedule_k;
  j["schedule_shuffle"] = cfg.schedule_shuffle;
  j["policy"] = cfg.policy ? std::string(policy_name(*cfg.policy)) : "auto";
  j["seed"] = cfg.seed;
  if (cfg.core_count) j["core_count"] = *cfg.core_count;
  j["multithreaded"] = cfg.multithreaded;
  j["allow_fallback"] = cfg.allow_fallback;
  json o = json::object();
  for (const auto& [k, bits] : cfg.overrides) o[std::string(policy_name(k))] = bits;
  j["policy_overrides"] = o;
  j["small_share_llc_groups"] = cfg.small_share_llc_groups;
  j["threads"] = cfg.threads;
  j["out"] = cfg.out.string();
  return j.dump(2) + "\n";
}

}  // namespace vmm
