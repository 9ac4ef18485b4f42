#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "nilflow/lab.hpp"

namespace {

// exit codes: 0 success, 2 config error, 3 numeric failure
constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericError = 3;

int cmd_run(const std::string& config_path, nilflow::lab::RunOptions opt) {
  using namespace nilflow;
  lab::ExperimentConfig cfg;
  try {
    cfg = lab::ExperimentConfig::load(config_path);
  } catch (const ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  try {
    const lab::RunReport rep = lab::run(cfg, opt);
    const auto csv = lab::write_report(rep, cfg, opt);
    std::cout << cfg.id << ": " << rep.rows.size() << " rows -> " << csv.string()
              << "\n";
    if (rep.precision_escalations > 0)
      std::cout << "  precision escalations: " << rep.precision_escalations << "\n";
    return kOk;
  } catch (const ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumericError;
  }
}

int cmd_list(const std::filesystem::path& config_dir) {
  for (const auto& e : nilflow::lab::list_experiments()) {
    const auto p = config_dir / e.file;
    const char* mark = std::filesystem::exists(p) ? " " : "!";
    std::cout << mark << " " << e.id << "  [" << e.theorem << "]  " << e.summary
              << "\n";
  }
  return kOk;
}

int cmd_gc(const std::filesystem::path& dir, std::uintmax_t max_bytes) {
  try {
    const auto freed = nilflow::lab::cache_gc(dir, max_bytes);
    std::cout << "freed " << freed << " bytes\n";
    return kOk;
  } catch (const nilflow::Error& e) {
    std::cerr << "gc failed: " << e.what() << "\n";
    return kNumericError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nilflow: equidistribution experiments on nilmanifolds"};
  app.require_subcommand(1);

  std::string config_path;
  nilflow::lab::RunOptions opt;
  std::string out_dir = "nilflow_out";
  unsigned threads = 1;
  unsigned precision_bits = 0;
  std::uint64_t seed = 0;
  bool no_cache = false;
  bool timings = false;

  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "experiment JSON file")->required();
  run->add_option("--out-dir", out_dir, "output directory");
  run->add_option("--threads", threads, "worker threads");
  run->add_option("--precision-bits", precision_bits, "override precision policy");
  run->add_option("--seed", seed, "override config seed");
  run->add_flag("--no-cache", no_cache, "disable the orbit segment cache");
  run->add_flag("--timings", timings, "write wall-clock seconds into the CSV");

  std::string list_dir = "configs";
  auto* list = app.add_subcommand("list", "list shipped experiments");
  list->add_option("--config-dir", list_dir, "directory holding shipped configs");

  std::string gc_dir;
  std::uintmax_t max_bytes = 0;
  auto* gc = app.add_subcommand("gc", "evict cached orbit segments (LRU)");
  gc->add_option("--cache-dir", gc_dir, "cache directory")->required();
  gc->add_option("--max-bytes", max_bytes, "size budget")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  if (run->parsed()) {
    opt.out_dir = out_dir;
    opt.threads = std::max(1u, threads);
    opt.use_cache = !no_cache;
    opt.emit_timings = timings;
    if (precision_bits) opt.precision_bits_override = precision_bits;
    if (seed) opt.seed_override = seed;
    return cmd_run(config_path, opt);
  }
  if (list->parsed()) return cmd_list(list_dir);
  if (gc->parsed()) return cmd_gc(gc_dir, max_bytes);
  return kConfigError;
}
