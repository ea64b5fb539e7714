// Fits the online classifier thresholds to the offline quota probe over a
// synthetic archetype corpus and prints them as JSON.

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

#include "vmm/classifier.hpp"
#include "vmm/workloads.hpp"

using namespace vmm;

int main(int argc, char** argv) {
  CLI::App app{"Calibrate online classification thresholds"};
  std::vector<std::uint64_t> canonical_seeds = {9001, 9002, 9003, 9004, 9005};
  std::size_t random_count = 100;
  std::uint64_t random_seed = 9100;
  bool verbose = false;
  app.add_option("--canonical-seeds", canonical_seeds, "Seeds for the canonical archetypes");
  app.add_option("--random", random_count, "Randomized corpus size");
  app.add_option("--random-seed", random_seed, "Seed of the randomized corpus");
  app.add_flag("-v,--verbose", verbose, "Print every sample");
  CLI11_PARSE(app, argc, argv);

  const AddressMapping m;
  const HierarchyConfig hcfg;
  const SamplerConfig sampler;
  const Thresholds base = Thresholds::defaults();

  std::vector<ArchetypeParams> corpus;
  for (auto kind : {ArchetypeKind::Ccf, ArchetypeKind::Llct, ArchetypeKind::Llcm, ArchetypeKind::Llch}) {
    for (std::uint64_t s : canonical_seeds) corpus.push_back(canonical_params(kind, s));
  }
  std::mt19937_64 rng(random_seed);
  for (std::size_t i = 0; i < random_count; ++i) corpus.push_back(random_params(rng));

  std::vector<LabeledEvidence> samples;
  for (const auto& p : corpus) {
    const Trace t = gen(p);
    const OfflineResult off = classify_offline(t, m, hcfg, base);
    const OnlineEvidence ev = sample_trace(t, sampler, m);
    samples.push_back({ev.mean_hot_pages(), ev.wpd, off.category});
    if (verbose) {
      std::cerr << archetype_name(p.kind) << " ws=" << p.working_set_pages << " n=" << p.access_count
                << " s=" << p.zipf_s << " -> " << category_name(off.category) << " d=" << off.degradation
                << " h=" << samples.back().hot_pages << " wpd=" << ev.wpd << "\n";
    }
  }

  const Calibration c = calibrate_thresholds(samples, base);
  nlohmann::json j = {{"hot_page_low", c.thresholds.hot_page_low},
                      {"hot_page_high", c.thresholds.hot_page_high},
                      {"wpd_low", c.thresholds.wpd_low},
                      {"wpd_high", c.thresholds.wpd_high},
                      {"agreeing", c.agreeing},
                      {"total", c.total}};
  std::cout << j.dump(2) << "\n";
  return 0;
}
