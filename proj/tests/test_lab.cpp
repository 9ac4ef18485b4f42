#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "nilflow/lab.hpp"

using namespace nilflow;
using namespace nilflow::lab;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path fresh_dir(const std::string& tag) {
  const auto d = std::filesystem::temp_directory_path() / ("nilflow_test_" + tag);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

ExperimentConfig small_orbit_config() {
  return ExperimentConfig::from_json_text(R"json({
    "experiment": "orbit",
    "id": "small_orbit",
    "theorem": "T:B",
    "group": { "dimension": 3, "b": ["sqrt2", "0", "sqrt3"] },
    "sequences": ["t^1.5"],
    "N_grid": [2000],
    "test_functions": [ { "type": "character", "kappa": [[1, 0]] } ],
    "seed": 5
  })json");
}

}  // namespace

TEST_CASE("config validation rejects unknown keys and bad grids") {
  CHECK_THROWS_AS(ExperimentConfig::from_json_text(
                      R"json({"experiment":"torus","id":"x","N_grid":[10],"bogus":1})json"),
                  ConfigInvalid);
  CHECK_THROWS_AS(ExperimentConfig::from_json_text(
                      R"json({"experiment":"torus","id":"x","N_grid":[]})json"),
                  ConfigInvalid);
  CHECK_THROWS_AS(ExperimentConfig::from_json_text(
                      R"json({"experiment":"torus","id":"x"})json"),
                  ConfigInvalid);
  CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"(not json)"), ConfigInvalid);
  CHECK_THROWS_AS(
      ExperimentConfig::from_json_text(
          R"json({"experiment":"warp","id":"x","N_grid":[10]})json"),
      ConfigInvalid);
  // non-ergodic generator is refused up front
  auto cfg = ExperimentConfig::from_json_text(R"json({
    "experiment": "orbit", "id": "bad", "N_grid": [100],
    "group": { "dimension": 3, "b": ["1/2", "0", "sqrt2"] },
    "sequences": ["t^1.5"],
    "test_functions": [ { "type": "character", "kappa": [[1, 0]] } ]
  })json");
  RunOptions opt;
  opt.out_dir = fresh_dir("ergodic");
  CHECK_THROWS_AS(lab::run(cfg, opt), ConfigInvalid);
}

TEST_CASE("every shipped catalog config parses and validates") {
  const std::filesystem::path dir = NILFLOW_CONFIG_DIR;
  CHECK(list_experiments().size() >= 10);
  for (const auto& e : list_experiments()) {
    const auto path = find_config(e.id, dir);
    const auto cfg = ExperimentConfig::load(path);
    CHECK(cfg.id == e.id);
    CHECK(cfg.theorem == e.theorem);
    CHECK(!cfg.n_grid.empty());
  }
  // catalog covers the six statements under test
  for (const char* thm :
       {"T:Bos", "T:B", "T:several", "T:Application1", "T:GT", "T:random"}) {
    bool found = false;
    for (const auto& e : list_experiments()) found = found || e.theorem == thm;
    CHECK(found);
  }
}

TEST_CASE("runs are deterministic byte-for-byte across reruns and threads") {
  const auto cfg = small_orbit_config();
  RunOptions o1;
  o1.out_dir = fresh_dir("det1");
  o1.threads = 1;
  const auto r1 = lab::run(cfg, o1);
  write_report(r1, cfg, o1);

  RunOptions o2;
  o2.out_dir = fresh_dir("det2");
  o2.threads = 4;
  const auto r2 = lab::run(cfg, o2);
  write_report(r2, cfg, o2);

  RunOptions o3 = o1;
  o3.out_dir = fresh_dir("det3");
  const auto r3 = lab::run(cfg, o3);
  write_report(r3, cfg, o3);

  const auto c1 = slurp(o1.out_dir / "small_orbit.csv");
  CHECK(c1 == slurp(o2.out_dir / "small_orbit.csv"));
  CHECK(c1 == slurp(o3.out_dir / "small_orbit.csv"));
  CHECK(!c1.empty());
  CHECK(r1.config_hash == r2.config_hash);
}

TEST_CASE("cache is a pure accelerator") {
  const auto cfg = small_orbit_config();
  RunOptions warm;
  warm.out_dir = fresh_dir("cache");
  warm.threads = 1;
  lab::run(cfg, warm);          // populate
  const auto rep2 = lab::run(cfg, warm);  // cached
  write_report(rep2, cfg, warm);
  const auto cached_csv = slurp(warm.out_dir / "small_orbit.csv");

  RunOptions cold = warm;
  cold.out_dir = fresh_dir("nocache");
  cold.use_cache = false;
  const auto rep3 = lab::run(cfg, cold);
  write_report(rep3, cfg, cold);
  CHECK(cached_csv == slurp(cold.out_dir / "small_orbit.csv"));

  // gc: over-budget cache shrinks below the budget; empty cache frees nothing
  const auto cache_dir = warm.out_dir / "cache";
  REQUIRE(std::filesystem::exists(cache_dir));
  std::uintmax_t total = 0;
  for (const auto& de : std::filesystem::directory_iterator(cache_dir))
    total += de.file_size();
  CHECK(total > 0);
  CHECK(cache_gc(fresh_dir("empty_cache"), 0) == 0);
}

TEST_CASE("gc respects the byte budget and keeps results reproducible") {
  const auto cfg = small_orbit_config();
  RunOptions opt;
  opt.out_dir = fresh_dir("gc");
  lab::run(cfg, opt);
  write_report(lab::run(cfg, opt), cfg, opt);
  const auto before = slurp(opt.out_dir / "small_orbit.csv");
  const auto cache_dir = opt.out_dir / "cache";
  // fabricate extra segments so something is evictable
  for (int i = 0; i < 4; ++i) {
    equidist::TorusPoints pts;
    pts.dim = 1;
    pts.flat.assign(4096, 0.25);
    cache_store(cache_dir, "synthetic_" + std::to_string(i), pts);
  }
  cache_gc(cache_dir, 8192);
  std::uintmax_t total = 0;
  for (const auto& de : std::filesystem::directory_iterator(cache_dir))
    total += de.file_size();
  CHECK(total <= 8192);  // nothing is pinned once the runs have finished
  // eviction never changes results
  write_report(lab::run(cfg, opt), cfg, opt);
  CHECK(before == slurp(opt.out_dir / "small_orbit.csv"));
}

TEST_CASE("torus run emits rows and plot files") {
  auto cfg = ExperimentConfig::from_json_text(R"json({
    "experiment": "torus", "id": "tiny_torus", "sequences": ["t^1.5"],
    "N_grid": [500, 1000], "metrics": ["star_discrepancy", "weyl"],
    "precision_bits": 160
  })json");
  RunOptions opt;
  opt.out_dir = fresh_dir("torus");
  const auto rep = lab::run(cfg, opt);
  write_report(rep, cfg, opt);
  CHECK(rep.rows.size() == 4);
  // rows sorted by (metric, N)
  CHECK(rep.rows[0].metric == "star_discrepancy");
  CHECK(rep.rows[0].n == 500);
  CHECK(rep.rows[1].n == 1000);
  CHECK(std::filesystem::exists(opt.out_dir / "tiny_torus.csv"));
  CHECK(std::filesystem::exists(opt.out_dir / "tiny_torus_star_discrepancy.tsv"));
  const auto csv = slurp(opt.out_dir / "tiny_torus.csv");
  CHECK(csv.find("experiment,N,metric,value,witness,seconds") == 0);
  CHECK(csv.find("tiny_torus,500,star_discrepancy,") != std::string::npos);
}

TEST_CASE("blocks run writes the per-block side table") {
  auto cfg = ExperimentConfig::from_json_text(R"json({
    "experiment": "blocks", "id": "tiny_blocks", "sequences": ["t*log(t)"],
    "kappa": 1, "degree": 2, "N_grid": [2000], "precision_bits": 160
  })json");
  RunOptions opt;
  opt.out_dir = fresh_dir("blocks");
  const auto rep = lab::run(cfg, opt);
  write_report(rep, cfg, opt);
  const auto side = slurp(opt.out_dir / "tiny_blocks_blocks_2000.csv");
  CHECK(side.find("base,len,weyl_modulus,witness,remainder_bound") == 0);
  bool has_agg = false;
  for (const auto& row : rep.rows) has_agg = has_agg || row.metric == "aggregate_modulus";
  CHECK(has_agg);
}

TEST_CASE("random run reports per-seed rows") {
  auto cfg = ExperimentConfig::from_json_text(R"json({
    "experiment": "random", "id": "tiny_random",
    "sigma": { "form": "power", "c": "1/2" },
    "N_grid": [2000], "seeds": 3, "trials": 100, "sample_horizon": 400000,
    "seed": 77
  })json");
  RunOptions opt;
  opt.out_dir = fresh_dir("random");
  const auto rep = lab::run(cfg, opt);
  int growth_rows = 0, law_rows = 0;
  for (const auto& row : rep.rows) {
    if (row.metric == "growth_ratio") ++growth_rows;
    if (row.metric == "strong_law_ratio") ++law_rows;
  }
  CHECK(growth_rows == 3);
  CHECK(law_rows == 3);
}
