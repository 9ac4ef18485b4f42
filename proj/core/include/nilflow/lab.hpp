#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nilflow/blocks.hpp"
#include "nilflow/equidist.hpp"
#include "nilflow/randomseq.hpp"

namespace nilflow::lab {

enum class ExperimentKind { Orbit, Joint, Torus, Blocks, Random, NegativeControl };

struct GroupSpec {
  int dimension = 3;
  std::vector<std::string> b_entries;  // strictly-upper row-major, symbolic text
  bool assert_ergodic = false;         // required for d > 3

  equidist::UnipotentElement build(unsigned bits) const;
  std::vector<SymbolicReal> parsed() const;
};

struct TestFunctionSpec {
  std::string type;                       // "character" | "bump"
  std::vector<std::vector<long>> kappa;   // per component, d-1 entries each
  int coord = 0;

  nilgroup::TestFunction build(int components, int d) const;
  std::string name() const;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Torus;
  std::string id;
  std::string theorem;  // which statement this run exercises
  std::optional<GroupSpec> group;
  std::vector<std::string> sequences;  // hardy expression texts
  std::string torus_mode = "frac";     // "frac" | "power_beta"
  std::string beta;                    // power_beta multiplier, symbolic text
  int power = 1;                       // power_beta exponent
  std::optional<randomseq::SigmaSpec> sigma;
  long kappa = 1;     // blocks frequency
  int degree = 0;     // blocks taylor degree; 0 = k+1 from the growth type
  std::vector<long> n_grid;
  std::vector<std::string> metrics;
  std::vector<TestFunctionSpec> test_functions;
  long scan_bound = 10;
  unsigned precision_bits = 0;  // 0 = precision policy
  std::uint64_t seed = 1;
  int seeds = 20;     // random experiment
  int trials = 500;   // moment estimate
  std::int64_t sample_horizon = 0;  // random: kept-set horizon (0 = derived)

  std::string canonical_json() const;
  std::uint64_t hash() const;

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& file);
};

struct ReportRow {
  std::string metric;
  long n = 0;
  double value = 0.0;
  std::string witness;
  double seconds = 0.0;
};

struct RunReport {
  std::string experiment_id;
  std::uint64_t config_hash = 0;
  std::vector<ReportRow> rows;  // sorted by (metric, N, witness)
  std::size_t precision_escalations = 0;
  double wall_seconds = 0.0;
};

struct RunOptions {
  std::filesystem::path out_dir = ".";
  unsigned threads = 1;
  bool use_cache = true;
  bool emit_timings = false;  // keep CSV byte-reproducible by default
  std::optional<unsigned> precision_bits_override;
  std::optional<std::uint64_t> seed_override;
  std::filesystem::path cache_dir;  // empty: <out_dir>/cache
};

RunReport run(const ExperimentConfig& config, const RunOptions& opt);

// CSV with header experiment,N,metric,value,witness,seconds plus one TSV
// (N, value) per metric; returns the CSV path.
std::filesystem::path write_report(const RunReport& report, const ExperimentConfig& cfg,
                                   const RunOptions& opt);

struct CatalogEntry {
  std::string id;
  std::string theorem;
  std::string file;  // file name under the configs directory
  std::string summary;
};

const std::vector<CatalogEntry>& list_experiments();

// Locates a shipped config by catalog id, searching config_dir.
std::filesystem::path find_config(const std::string& id,
                                  const std::filesystem::path& config_dir);

// LRU eviction down to max_bytes; returns bytes freed.
std::uintmax_t cache_gc(const std::filesystem::path& cache_dir,
                        std::uintmax_t max_bytes);

// Orbit-segment cache used by run(); exposed for the soundness tests.
std::optional<equidist::TorusPoints> cache_load(const std::filesystem::path& dir,
                                                const std::string& key);
void cache_store(const std::filesystem::path& dir, const std::string& key,
                 const equidist::TorusPoints& pts);

// Keys pinned while a job runs are never evicted by cache_gc.
class CachePin {
 public:
  explicit CachePin(std::string key);
  ~CachePin();
  CachePin(const CachePin&) = delete;
  CachePin& operator=(const CachePin&) = delete;

 private:
  std::string key_;
};

std::uint64_t fnv1a(const std::string& s);

// live pin count, for the cache tests
std::size_t cache_pin_count();

}  // namespace nilflow::lab
