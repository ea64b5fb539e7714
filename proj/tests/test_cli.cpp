#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "vmm/trace.hpp"
#include "vmm/workloads.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kDir = fs::absolute("cli_work");

int cli(const std::string& args) {
  const std::string cmd = std::string(VMM_BIN) + " " + args + " > " + (kDir / "stdout.txt").string() +
                          " 2> " + (kDir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write(const std::string& name, const std::string& text) {
  const fs::path p = kDir / name;
  std::ofstream(p) << text;
  return p;
}

struct Setup {
  Setup() {
    fs::remove_all(kDir);
    fs::create_directories(kDir);
  }
};

const Setup setup;

}  // namespace

TEST_CASE("gen writes deterministic traces") {
  const std::string t1 = (kDir / "t1.trace").string(), t2 = (kDir / "t2.trace").string();
  REQUIRE(cli("gen --kind llct --pages 100000 --seed 1 -o " + t1) == 0);
  REQUIRE(cli("gen --kind llct --pages 100000 --seed 1 -o " + t2) == 0);
  CHECK(slurp(t1) == slurp(t2));
  CHECK(vmm::distinct_pages(vmm::read_trace(fs::path(t1)), 0, 12) == 100000);
  CHECK(cli("gen --pages 10 -o " + t1) == 1);
  CHECK(cli("gen --kind huge -o " + t1) == 1);
  CHECK(cli("gen --kind ccf --stride 48 -o " + t1) == 1);
  CHECK(cli("gen --kind ccf") == 1);
  CHECK(cli("frobnicate") == 1);
}

TEST_CASE("run reports interference by policy") {
  const auto cfg = write("pp.json", R"({"workload": [{"pingpong": {}}]})").string();
  REQUIRE(cli("run --config " + cfg + " --policy a-vp --out " + (kDir / "avp").string()) == 0);
  REQUIRE(cli("run --config " + cfg + " --policy interleave --out " + (kDir / "il").string()) == 0);
  const json a = json::parse(slurp(kDir / "avp" / "metrics.json"));
  const json i = json::parse(slurp(kDir / "il" / "metrics.json"));
  CHECK(a["cross_app_conflicts"] == 0);
  CHECK(i["cross_app_conflicts"].get<std::uint64_t>() > 0);
  CHECK(a["proxy_cycles"].get<double>() < i["proxy_cycles"].get<double>());
  for (const char* f : {"epochs.csv", "alloc.csv", "decision.json"}) CHECK(fs::exists(kDir / "avp" / f));
  CHECK(slurp(kDir / "avp" / "alloc.csv").rfind("app_id,vpn,pfn,color,llc_group,bank_group\n", 0) == 0);
}

TEST_CASE("exit codes") {
  const auto empty = write("empty.json", R"({"workload": []})").string();
  CHECK(cli("run --config " + empty) == 1);
  CHECK(cli("run") == 1);
  CHECK(cli("run --config " + empty + " --policy z-vp") == 1);
  CHECK(cli("run --config " + (kDir / "missing.json").string()) == 2);
  const auto bad = write("bad.json", R"({"mapping": {"o_bits": [10]}})").string();
  CHECK(cli("run --config " + bad) == 2);
  CHECK(slurp(kDir / "stderr.txt").find("o-bit below page offset") != std::string::npos);
  const auto gone = write("gone.json", R"({"workload": ["nowhere.trace"]})").string();
  CHECK(cli("run --config " + gone) == 3);
  const auto oom = write("oom.json", R"({"mapping": {"memory_bytes": 1048576},
      "workload": [{"archetype": {"kind": "llct", "pages": 300}}]})").string();
  CHECK(cli("run --config " + oom + " --policy a-vp --out " + (kDir / "oom").string()) == 3);
  CHECK_FALSE(fs::exists(kDir / "oom" / "metrics.json"));
}

TEST_CASE("advise and classify") {
  REQUIRE(cli("advise --profile LLCH,LLCM") == 0);
  CHECK(json::parse(slurp(kDir / "stdout.txt"))["policy"] == "bank-only");
  REQUIRE(cli("advise --profile LLCH,LLCM --multithreaded") == 0);
  CHECK(json::parse(slurp(kDir / "stdout.txt"))["policy"] == "random");
  REQUIRE(cli("advise --profile LLCM,CCF --cores 8") == 0);
  CHECK(json::parse(slurp(kDir / "stdout.txt"))["policy"] == "b-vp");
  CHECK(cli("advise --profile LLCX") == 1);

  const auto cfg = write("llch.json", R"({"workload": [{"archetype": {"kind": "llch"}}]})").string();
  REQUIRE(cli("classify --config " + cfg + " --out " + (kDir / "cls").string()) == 0);
  const json c = json::parse(slurp(kDir / "cls" / "classification.json"));
  CHECK(c["apps"][0]["category"] == "LLCH");
  CHECK(c["apps"][0].contains("thresholds_used"));
}

TEST_CASE("sweep picks a-vp for a mix with a thrashing app") {
  const auto cfg = write("mix.json", R"({"workload": [{"archetype": {"kind": "llct"}},
      {"archetype": {"kind": "ccf"}}]})").string();
  REQUIRE(cli("sweep --config " + cfg + " --out " + (kDir / "sw").string()) == 0);
  const json s = json::parse(slurp(kDir / "sw" / "sweep.json"));
  CHECK(s["pdt_policy"] == "a-vp");
  CHECK(s["cells"].size() == 6);
}

TEST_CASE("repeated commands give byte-identical reports") {
  const auto cfg = write("det.json", R"({"seed": 4, "workload": [{"archetype": {"kind": "llcm", "accesses": 200000}},
      {"archetype": {"kind": "ccf"}}]})").string();
  const std::vector<std::pair<std::string, std::vector<std::string>>> cmds = {
      {"run --policy random", {"metrics.json", "epochs.csv", "alloc.csv", "decision.json"}},
      {"run", {"metrics.json", "epochs.csv", "alloc.csv", "decision.json"}},
      {"classify --offline", {"classification.json"}},
      {"advise", {"decision.json"}},
      {"sweep --threads 3", {"sweep.csv", "sweep.json"}},
  };
  for (const auto& [cmd, files] : cmds) {
    CAPTURE(cmd);
    REQUIRE(cli(cmd + " --config " + cfg + " --out " + (kDir / "d1").string()) == 0);
    const std::string out1 = slurp(kDir / "stdout.txt");
    REQUIRE(cli(cmd + " --config " + cfg + " --out " + (kDir / "d2").string()) == 0);
    CHECK(slurp(kDir / "stdout.txt") == out1);
    for (const auto& f : files) CHECK(slurp(kDir / "d1" / f) == slurp(kDir / "d2" / f));
  }
  REQUIRE(cli("run --policy random --seed 5 --config " + cfg + " --out " + (kDir / "d3").string()) == 0);
  CHECK(slurp(kDir / "d3" / "alloc.csv") != slurp(kDir / "d1" / "alloc.csv"));
}
