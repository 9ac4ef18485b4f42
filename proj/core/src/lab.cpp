#include "nilflow/lab.hpp"

#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "json.hpp"

namespace nilflow::lab {

using nlohmann::json;

namespace {

[[noreturn]] void bad_config(const std::string& what) { throw ConfigInvalid(what); }

void require_keys(const json& j, const std::vector<std::string>& allowed,
                  const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      bad_config("unknown key \"" + it.key() + "\" in " + where);
  }
}

ExperimentKind kind_from(const std::string& s) {
  if (s == "orbit") return ExperimentKind::Orbit;
  if (s == "joint") return ExperimentKind::Joint;
  if (s == "torus") return ExperimentKind::Torus;
  if (s == "blocks") return ExperimentKind::Blocks;
  if (s == "random") return ExperimentKind::Random;
  if (s == "negative-control") return ExperimentKind::NegativeControl;
  bad_config("unknown experiment kind \"" + s + "\"");
}

std::string kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Orbit: return "orbit";
    case ExperimentKind::Joint: return "joint";
    case ExperimentKind::Torus: return "torus";
    case ExperimentKind::Blocks: return "blocks";
    case ExperimentKind::Random: return "random";
    case ExperimentKind::NegativeControl: return "negative-control";
  }
  return "?";
}

Rational rational_from_text(const std::string& s) {
  const SymbolicReal v = parse_symbolic(s);
  if (!v.is_rational()) bad_config("expected a rational number, got " + s);
  return v.rational_part();
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

equidist::UnipotentElement GroupSpec::build(unsigned bits) const {
  equidist::UnipotentElement g(dimension, bits);
  const auto vals = parsed();
  std::size_t k = 0;
  for (int i = 0; i < dimension; ++i)
    for (int j = i + 1; j < dimension; ++j) g.at(i, j) = vals[k++].value(bits);
  return g;
}

std::vector<SymbolicReal> GroupSpec::parsed() const {
  const std::size_t need =
      static_cast<std::size_t>(dimension) * (dimension - 1) / 2;
  if (b_entries.size() != need)
    bad_config("group.b must list " + std::to_string(need) + " entries");
  std::vector<SymbolicReal> out;
  out.reserve(need);
  for (const auto& e : b_entries) out.push_back(parse_symbolic(e));
  return out;
}

nilgroup::TestFunction TestFunctionSpec::build(int components, int d) const {
  const int m = d * (d - 1) / 2;
  if (type == "bump") {
    if (components != 1) bad_config("bump test functions are single-component");
    return equidist::coordinate_bump(coord, m);
  }
  if (type != "character") bad_config("unknown test function type \"" + type + "\"");
  if (static_cast<int>(kappa.size()) != components)
    bad_config("character needs one frequency vector per component");
  // frequencies act on the horizontal (superdiagonal) coordinates of each
  // component, which sit first in that component's offset-major block
  std::vector<std::pair<int, long>> taps;
  double lip = 0.0;
  for (int c = 0; c < components; ++c) {
    const auto& kv = kappa[static_cast<std::size_t>(c)];
    if (static_cast<int>(kv.size()) != d - 1)
      bad_config("character frequency needs d-1 entries per component");
    for (int j = 0; j < d - 1; ++j) {
      if (kv[static_cast<std::size_t>(j)] != 0) {
        taps.emplace_back(c * m + j, kv[static_cast<std::size_t>(j)]);
        lip += 2.0 * 3.14159265358979323846 *
               std::abs(kv[static_cast<std::size_t>(j)]);
      }
    }
  }
  nilgroup::TestFunction F;
  F.name = name();
  F.lipschitz = lip;
  F.f = [taps](std::span<const double> x) {
    double phase = 0.0;
    for (const auto& [idx, k] : taps)
      phase += static_cast<double>(k) * x[static_cast<std::size_t>(idx)];
    return unit_e(phase);
  };
  return F;
}

std::string TestFunctionSpec::name() const {
  std::ostringstream os;
  if (type == "bump") {
    os << "bump(" << coord << ")";
    return os.str();
  }
  os << "char(";
  for (std::size_t c = 0; c < kappa.size(); ++c) {
    for (std::size_t j = 0; j < kappa[c].size(); ++j)
      os << kappa[c][j] << (j + 1 < kappa[c].size() ? "," : "");
    if (c + 1 < kappa.size()) os << ";";
  }
  os << ")";
  return os.str();
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    bad_config(std::string("invalid JSON: ") + e.what());
  }
  require_keys(j,
               {"experiment", "id", "theorem", "group", "sequences", "torus_mode",
                "beta", "power", "sigma", "kappa", "degree", "N_grid", "metrics",
                "test_functions", "scan_bound", "precision_bits", "seed", "seeds",
                "trials", "sample_horizon"},
               "config");
  ExperimentConfig c;
  c.kind = kind_from(j.at("experiment").get<std::string>());
  c.id = j.at("id").get<std::string>();
  c.theorem = j.value("theorem", std::string{});
  if (j.contains("group")) {
    const json& g = j["group"];
    require_keys(g, {"dimension", "b", "assert_ergodic"}, "group");
    GroupSpec gs;
    gs.dimension = g.at("dimension").get<int>();
    for (const auto& e : g.at("b")) gs.b_entries.push_back(e.get<std::string>());
    gs.assert_ergodic = g.value("assert_ergodic", false);
    c.group = gs;
  }
  if (j.contains("sequences"))
    for (const auto& s : j["sequences"]) c.sequences.push_back(s.get<std::string>());
  c.torus_mode = j.value("torus_mode", std::string("frac"));
  if (c.torus_mode != "frac" && c.torus_mode != "power_beta")
    bad_config("torus_mode must be \"frac\" or \"power_beta\"");
  c.beta = j.value("beta", std::string{});
  c.power = j.value("power", 1);
  if (j.contains("sigma")) {
    const json& s = j["sigma"];
    require_keys(s, {"form", "c", "table", "expr", "allow_bad_regime"}, "sigma");
    randomseq::SigmaSpec ss;
    const std::string form = s.at("form").get<std::string>();
    ss.allow_bad_regime = s.value("allow_bad_regime", false);
    if (form == "power") {
      ss.form = randomseq::SigmaSpec::Form::Power;
      ss.c = rational_from_text(s.at("c").get<std::string>());
    } else if (form == "table") {
      ss.form = randomseq::SigmaSpec::Form::Table;
      for (const auto& v : s.at("table")) ss.table.push_back(v.get<double>());
    } else if (form == "expr") {
      ss.form = randomseq::SigmaSpec::Form::Expr;
      ss.expr = hardy::parse_hardy(s.at("expr").get<std::string>());
    } else {
      bad_config("sigma.form must be power|table|expr");
    }
    ss.validate();
    c.sigma = std::move(ss);
  }
  c.kappa = j.value("kappa", 1L);
  c.degree = j.value("degree", 0);
  if (!j.contains("N_grid") || !j["N_grid"].is_array() || j["N_grid"].empty())
    bad_config("N_grid must be a non-empty array");
  for (const auto& n : j["N_grid"]) {
    const long v = n.get<long>();
    if (v < 1) bad_config("N_grid entries must be positive");
    c.n_grid.push_back(v);
  }
  if (j.contains("metrics"))
    for (const auto& m : j["metrics"]) c.metrics.push_back(m.get<std::string>());
  if (j.contains("test_functions")) {
    for (const auto& tf : j["test_functions"]) {
      require_keys(tf, {"type", "kappa", "coord"}, "test_functions[]");
      TestFunctionSpec spec;
      spec.type = tf.at("type").get<std::string>();
      if (tf.contains("kappa"))
        for (const auto& row : tf["kappa"]) {
          std::vector<long> kv;
          for (const auto& k : row) kv.push_back(k.get<long>());
          spec.kappa.push_back(std::move(kv));
        }
      spec.coord = tf.value("coord", 0);
      c.test_functions.push_back(std::move(spec));
    }
  }
  c.scan_bound = j.value("scan_bound", 10L);
  c.precision_bits = j.value("precision_bits", 0u);
  c.seed = j.value("seed", std::uint64_t{1});
  c.seeds = j.value("seeds", 20);
  c.trials = j.value("trials", 500);
  c.sample_horizon = j.value("sample_horizon", std::int64_t{0});
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigInvalid("cannot open config " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string ExperimentConfig::canonical_json() const {
  json j;
  j["experiment"] = kind_name(kind);
  j["id"] = id;
  j["theorem"] = theorem;
  if (group) {
    j["group"] = {{"dimension", group->dimension},
                  {"b", group->b_entries},
                  {"assert_ergodic", group->assert_ergodic}};
  }
  j["sequences"] = sequences;
  j["torus_mode"] = torus_mode;
  j["beta"] = beta;
  j["power"] = power;
  if (sigma) j["sigma"] = sigma->id();
  j["kappa"] = kappa;
  j["degree"] = degree;
  j["N_grid"] = n_grid;
  j["metrics"] = metrics;
  std::vector<std::string> tf_names;
  for (const auto& tf : test_functions) tf_names.push_back(tf.name());
  j["test_functions"] = tf_names;
  j["scan_bound"] = scan_bound;
  j["precision_bits"] = precision_bits;
  j["seed"] = seed;
  j["seeds"] = seeds;
  j["trials"] = trials;
  j["sample_horizon"] = sample_horizon;
  return j.dump();
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a(canonical_json()); }

namespace {

struct Runner {
  const ExperimentConfig& cfg;
  const RunOptions& opt;
  std::vector<ReportRow> rows;
  std::size_t escalations = 0;

  unsigned bits_or(unsigned fallback) const {
    if (opt.precision_bits_override) return *opt.precision_bits_override;
    if (cfg.precision_bits) return cfg.precision_bits;
    return fallback;
  }

  std::uint64_t seed() const {
    return opt.seed_override ? *opt.seed_override : cfg.seed;
  }

  std::filesystem::path cache_dir() const {
    return opt.cache_dir.empty() ? opt.out_dir / "cache" : opt.cache_dir;
  }

  void add(std::string metric, long n, double value, std::string witness = {}) {
    rows.push_back(ReportRow{std::move(metric), n, value, std::move(witness), 0.0});
  }

  // binary magnitude of a(N+1), for the fractional-part precision policy
  static unsigned magnitude_bits(const hardy::HardyExpr& a, long N) {
    const auto r = hardy::eval(a, real_from(N + 1, 128), 128);
    if (r.value == 0) return 1;
    const long mag = std::max<long>(1, mpfr_get_exp(r.value.backend().data()));
    return static_cast<unsigned>(mag);
  }

  unsigned frac_bits(const hardy::HardyExpr& a, long N) const {
    return bits_or(magnitude_bits(a, N) + 96);
  }

  equidist::TorusPoints torus_points(const hardy::HardyExpr& a, long N) {
    const unsigned bits = frac_bits(a, N);
    equidist::TorusPoints pts;
    pts.dim = 1;
    pts.flat.resize(static_cast<std::size_t>(N));
    parallel_for(static_cast<std::size_t>(N), opt.threads, [&](std::size_t i) {
      const long n = 2 + static_cast<long>(i);
      const auto r = hardy::eval(a, real_from(n, bits), bits);
      pts.flat[i] = frac(r.value).convert_to<double>();
    });
    return pts;
  }

  equidist::TorusPoints torus_points_power_beta(const hardy::HardyExpr& a, long N) {
    if (cfg.beta.empty()) bad_config("power_beta mode needs a beta entry");
    const SymbolicReal beta = parse_symbolic(cfg.beta);
    const unsigned floor_bits = frac_bits(a, N);
    equidist::TorusPoints pts;
    pts.dim = 1;
    pts.flat.resize(static_cast<std::size_t>(N));
    // bits for frac(m^k beta): k * magnitude(a) + headroom
    const unsigned bits =
        bits_or(static_cast<unsigned>(cfg.power) * magnitude_bits(a, N) + 96);
    const Real beta_v = beta.value(bits);
    parallel_for(static_cast<std::size_t>(N), opt.threads, [&](std::size_t i) {
      const long n = 2 + static_cast<long>(i);
      BigInt m = hardy::floor_eval(a, n, floor_bits);
      BigInt mk = 1;
      for (int p = 0; p < cfg.power; ++p) mk *= m;
      pts.flat[i] = frac(real_from(mk, bits) * beta_v).convert_to<double>();
    });
    return pts;
  }

  void torus_metrics(const equidist::TorusPoints& pts, long N,
                     const std::string& witness) {
    for (const auto& m : cfg.metrics.empty()
                             ? std::vector<std::string>{"star_discrepancy"}
                             : cfg.metrics) {
      if (m == "star_discrepancy") {
        std::vector<double> xs(pts.flat);
        add("star_discrepancy", N, equidist::star_discrepancy_1d(std::move(xs)),
            witness);
      } else if (m == "weyl") {
        const long kap[1] = {1};
        add("weyl_modulus", N, std::abs(equidist::weyl_sum(pts, kap)), witness);
      } else if (m == "l2_discrepancy") {
        add("l2_discrepancy", N, equidist::l2_star_discrepancy(pts), witness);
      } else {
        bad_config("unknown torus metric \"" + m + "\"");
      }
    }
  }

  void run_torus() {
    if (cfg.sequences.empty()) bad_config("torus experiment needs sequences");
    for (const auto& seq_text : cfg.sequences) {
      const hardy::HardyExpr a = hardy::parse_hardy(seq_text);
      for (long N : cfg.n_grid) {
        const auto pts = cfg.torus_mode == "frac" ? torus_points(a, N)
                                                  : torus_points_power_beta(a, N);
        torus_metrics(pts, N, seq_text);
      }
    }
  }

  void check_ergodic(const GroupSpec& g) {
    if (g.dimension == 3) {
      const auto vals = g.parsed();
      if (!nilgroup::is_ergodic_heisenberg(vals[0], vals[2]))
        bad_config("Heisenberg rotation is not ergodic: {1, alpha, beta} dependent");
    } else if (!g.assert_ergodic) {
      bad_config("d > 3 requires assert_ergodic: ergodicity is user-asserted");
    }
  }

  std::vector<std::unique_ptr<CachePin>> pins;

  equidist::OrbitCoords cached_orbit(const equidist::UnipotentElement& b,
                                     const nilgroup::NilPoint& x0,
                                     const equidist::IntSequence& seq,
                                     const equidist::OrbitOptions& oopt,
                                     const std::string& group_tag) {
    std::ostringstream key;
    key << group_tag << "|" << seq.id << "|" << seq.first_n << "|"
        << seq.values.size() << "|" << oopt.bits;
    if (opt.use_cache) {
      pins.push_back(std::make_unique<CachePin>(key.str()));
      if (auto hit = cache_load(cache_dir(), key.str())) {
        equidist::OrbitCoords oc;
        oc.points = std::move(*hit);
        oc.bits_used = oopt.bits;
        return oc;
      }
    }
    equidist::OrbitCoords oc = equidist::nil_orbit(b, x0, seq, oopt);
    if (opt.use_cache) cache_store(cache_dir(), key.str(), oc.points);
    return oc;
  }

  void run_orbit() {
    if (!cfg.group) bad_config("orbit experiment needs a group");
    if (cfg.sequences.size() != 1) bad_config("orbit experiment needs one sequence");
    check_ergodic(*cfg.group);
    const hardy::HardyExpr a = hardy::parse_hardy(cfg.sequences[0]);
    const std::string group_tag = canonical_group_tag();

    for (long N : cfg.n_grid) {
      const unsigned floor_bits = frac_bits(a, N);
      const equidist::IntSequence seq = hardy::parse_hardy("t").to_string() ==
                                                a.to_string()
                                            ? equidist::identity_sequence(2,
                                                                          static_cast<std::size_t>(N))
                                            : equidist::hardy_int_sequence(
                                                  a, cfg.sequences[0], 2,
                                                  static_cast<std::size_t>(N),
                                                  floor_bits);
      std::int64_t max_m = 2;
      for (auto v : seq.values) max_m = std::max(max_m, std::abs(v));
      equidist::OrbitOptions oopt;
      oopt.threads = opt.threads;
      oopt.bits = bits_or(equidist::policy_bits(cfg.group->dimension, max_m));
      oopt.haar_seed = seed();
      const auto b = cfg.group->build(oopt.bits);
      const nilgroup::NilPoint x0{cfg.group->dimension,
                                  std::vector<Real>(static_cast<std::size_t>(
                                                        b.dim() * (b.dim() - 1) / 2),
                                                    real_from(0L, oopt.bits))};
      const auto oc = cached_orbit(b, x0, seq, oopt, group_tag);
      escalations += oc.escalations;

      for (const auto& tf_spec : cfg.test_functions) {
        const auto F = tf_spec.build(1, cfg.group->dimension);
        std::vector<std::complex<double>> vals(oc.points.count());
        for (std::size_t i = 0; i < vals.size(); ++i)
          vals[i] = F.f(oc.points.row(i));
        const auto value =
            pairwise_sum(std::span<const std::complex<double>>(vals)) /
            static_cast<double>(vals.size());
        const auto haar = nilgroup::haar_average(oc.points.dim, F, 100000, seed());
        add("orbit_gap:" + F.name, N, std::abs(value - haar.value),
            cfg.sequences[0]);
      }
    }
  }

  std::string canonical_group_tag() const {
    std::ostringstream os;
    os << cfg.group->dimension;
    for (const auto& e : cfg.group->b_entries) os << "|" << e;
    return os.str();
  }

  void run_joint() {
    if (!cfg.group) bad_config("joint experiment needs a group");
    if (cfg.sequences.size() < 2) bad_config("joint experiment needs >= 2 sequences");
    check_ergodic(*cfg.group);
    const int d = cfg.group->dimension;
    const int m = d * (d - 1) / 2;
    const std::string group_tag = canonical_group_tag();

    std::vector<hardy::HardyExpr> seqs;
    for (const auto& s : cfg.sequences) seqs.push_back(hardy::parse_hardy(s));

    for (long N : cfg.n_grid) {
      std::vector<equidist::OrbitCoords> comps;
      unsigned max_bits = 0;
      for (std::size_t c = 0; c < seqs.size(); ++c) {
        const unsigned floor_bits = frac_bits(seqs[c], N);
        const auto seq = equidist::hardy_int_sequence(
            seqs[c], cfg.sequences[c], 2, static_cast<std::size_t>(N), floor_bits);
        std::int64_t max_m = 2;
        for (auto v : seq.values) max_m = std::max(max_m, std::abs(v));
        equidist::OrbitOptions oopt;
        oopt.threads = opt.threads;
        oopt.bits = bits_or(equidist::policy_bits(d, max_m));
        max_bits = std::max(max_bits, oopt.bits);
        const auto b = cfg.group->build(oopt.bits);
        const nilgroup::NilPoint x0{
            d, std::vector<Real>(static_cast<std::size_t>(m), real_from(0L, oopt.bits))};
        comps.push_back(cached_orbit(b, x0, seq, oopt, group_tag));
        escalations += comps.back().escalations;
      }
      for (const auto& tf_spec : cfg.test_functions) {
        const auto F = tf_spec.build(static_cast<int>(seqs.size()), d);
        std::vector<std::complex<double>> vals(static_cast<std::size_t>(N));
        std::vector<double> x(static_cast<std::size_t>(m) * seqs.size());
        for (std::size_t i = 0; i < vals.size(); ++i) {
          std::size_t off = 0;
          for (const auto& cc : comps) {
            const auto row = cc.points.row(i);
            std::copy(row.begin(), row.end(),
                      x.begin() + static_cast<std::ptrdiff_t>(off));
            off += row.size();
          }
          vals[i] = F.f(x);
        }
        const auto value =
            pairwise_sum(std::span<const std::complex<double>>(vals)) /
            static_cast<double>(vals.size());
        const auto haar = nilgroup::haar_average(
            m * static_cast<int>(seqs.size()), F, 100000, seed());
        add("joint_gap:" + F.name, N, std::abs(value - haar.value));
      }
    }
  }

  std::vector<std::pair<long, blocks::BlockPipelineResult>> blocks_detail;

  void run_blocks() {
    if (cfg.sequences.size() != 1) bad_config("blocks experiment needs one sequence");
    const hardy::HardyExpr a = hardy::parse_hardy(cfg.sequences[0]);
    int m = cfg.degree;
    if (m == 0) m = static_cast<int>(hardy::classify_type(a).k) + 1;
    for (long N : cfg.n_grid) {
      const unsigned bits = frac_bits(a, N);
      auto res = blocks::block_pipeline(a, cfg.kappa, N, m, bits, cfg.scan_bound);
      add("aggregate_modulus", N, std::abs(res.aggregate), cfg.sequences[0]);
      add("direct_modulus", N, std::abs(res.direct), cfg.sequences[0]);
      add("agg_direct_diff", N, std::abs(res.aggregate - res.direct),
          cfg.sequences[0]);
      add("error_bound", N, res.error_bound, cfg.sequences[0]);
      double max_block = 0.0, max_rem = 0.0, wsum_rem = 0.0;
      long witness_blocks = 0;
      for (const auto& row : res.rows) {
        max_block = std::max(max_block, row.weyl_modulus);
        max_rem = std::max(max_rem, row.remainder_bound);
        wsum_rem += row.remainder_bound * static_cast<double>(row.len + 1);
        if (row.witness) ++witness_blocks;
      }
      add("max_block_modulus", N, max_block, cfg.sequences[0]);
      add("weighted_remainder", N,
          wsum_rem / static_cast<double>(N - 2 + 1), cfg.sequences[0]);
      add("blocks_with_witness", N, static_cast<double>(witness_blocks),
          cfg.sequences[0]);
      blocks_detail.emplace_back(N, std::move(res));
    }
  }

  void run_random() {
    if (!cfg.sigma) bad_config("random experiment needs a sigma spec");
    const long compare_N = *std::max_element(cfg.n_grid.begin(), cfg.n_grid.end());
    const long growth_n = 10000;
    const long moment_N = 10000;

    // horizon for the kept-set so its growth_n-th element exists; for power
    // specs w(H) ~ H^(1-c)/(1-c) inverts in closed form
    std::int64_t horizon = cfg.sample_horizon;
    if (horizon == 0) {
      horizon = compare_N;
      if (cfg.sigma->form == randomseq::SigmaSpec::Form::Power && cfg.sigma->c < 1) {
        const double cd = numerator(cfg.sigma->c).convert_to<double>() /
                          denominator(cfg.sigma->c).convert_to<double>();
        const double h = 1.2 * std::pow(1.3 * static_cast<double>(growth_n) * (1.0 - cd),
                                        1.0 / (1.0 - cd));
        horizon = std::max<std::int64_t>(horizon, static_cast<std::int64_t>(h));
      }
    }

    // full-orbit values are seed-independent; compute once when group present
    std::vector<std::complex<double>> full_vals;
    std::complex<double> full_avg{0.0, 0.0};
    nilgroup::TestFunction F;
    if (cfg.group) {
      check_ergodic(*cfg.group);
      if (cfg.test_functions.empty())
        bad_config("random orbit comparison needs a test function");
      F = cfg.test_functions[0].build(1, cfg.group->dimension);
      equidist::OrbitOptions oopt;
      oopt.threads = opt.threads;
      oopt.bits = bits_or(equidist::policy_bits(cfg.group->dimension, compare_N));
      const auto b = cfg.group->build(oopt.bits);
      const nilgroup::NilPoint x0{
          cfg.group->dimension,
          std::vector<Real>(static_cast<std::size_t>(cfg.group->dimension *
                                                     (cfg.group->dimension - 1) / 2),
                            real_from(0L, oopt.bits))};
      const auto seq = equidist::identity_sequence(1, static_cast<std::size_t>(compare_N));
      const auto oc = cached_orbit(b, x0, seq, oopt, canonical_group_tag());
      escalations += oc.escalations;
      full_vals.resize(oc.points.count());
      for (std::size_t i = 0; i < full_vals.size(); ++i)
        full_vals[i] = F.f(oc.points.row(i));
      full_avg = pairwise_sum(std::span<const std::complex<double>>(full_vals)) /
                 static_cast<double>(full_vals.size());
    }

    const double w_comp = randomseq::weight(*cfg.sigma, compare_N);
    for (int s = 0; s < cfg.seeds; ++s) {
      const std::uint64_t sd = seed() + static_cast<std::uint64_t>(s);
      const auto smpl = randomseq::sample(*cfg.sigma, sd, horizon);
      const std::string wit = "seed=" + std::to_string(s);

      if (static_cast<std::int64_t>(smpl.kept.size()) >= growth_n) {
        const double an = static_cast<double>(
            smpl.kept[static_cast<std::size_t>(growth_n - 1)]);
        // growth normalization n^{1/(1-c)} for power specs
        double expo = 2.0;
        if (cfg.sigma->form == randomseq::SigmaSpec::Form::Power && cfg.sigma->c < 1) {
          const double cd = numerator(cfg.sigma->c).convert_to<double>() /
                            denominator(cfg.sigma->c).convert_to<double>();
          expo = 1.0 / (1.0 - cd);
        }
        add("growth_ratio", growth_n, an / std::pow(static_cast<double>(growth_n), expo),
            wit);
      } else {
        add("growth_ratio", growth_n, std::nan(""), wit);
      }

      const double aN = static_cast<double>(smpl.count_upto(compare_N));
      add("strong_law_ratio", compare_N, aN / w_comp, wit);

      if (cfg.group) {
        const std::int64_t cnt = smpl.count_upto(compare_N);
        if (cnt > 0) {
          std::vector<std::complex<double>> sparse(static_cast<std::size_t>(cnt));
          for (std::int64_t i = 0; i < cnt; ++i)
            sparse[static_cast<std::size_t>(i)] =
                full_vals[static_cast<std::size_t>(smpl.kept[static_cast<std::size_t>(i)] - 1)];
          const auto sparse_avg =
              pairwise_sum(std::span<const std::complex<double>>(sparse)) /
              static_cast<double>(cnt);
          add("sparse_full_gap", compare_N, std::abs(sparse_avg - full_avg), wit);
        }
      }
    }

    const auto mom = randomseq::moment_estimate(
        *cfg.sigma, [](std::int64_t) { return 1.0; }, moment_N, cfg.trials, seed());
    add("moment_estimate", moment_N, mom.value, "trials=" + std::to_string(cfg.trials));
    add("moment_reference", moment_N, mom.reference,
        "sqrt(logN/w(N))");
    for (long N : cfg.n_grid)
      add("w_over_logN", N,
          randomseq::weight(*cfg.sigma, N) / std::log(static_cast<double>(N)));
  }

  void dispatch() {
    switch (cfg.kind) {
      case ExperimentKind::Torus:
        run_torus();
        return;
      case ExperimentKind::NegativeControl:
        if (cfg.group) {
          run_orbit_or_joint_negative();
        } else {
          run_torus();
        }
        return;
      case ExperimentKind::Orbit:
        run_orbit();
        return;
      case ExperimentKind::Joint:
        run_joint();
        return;
      case ExperimentKind::Blocks:
        run_blocks();
        return;
      case ExperimentKind::Random:
        run_random();
        return;
    }
  }

  void run_orbit_or_joint_negative() {
    // negative controls run the same pipelines, assertions live with the caller
    if (cfg.sequences.size() >= 2)
      run_joint();
    else
      run_orbit();
  }
};

}  // namespace

RunReport run(const ExperimentConfig& config, const RunOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  Runner r{config, opt};
  r.dispatch();
  RunReport rep;
  rep.experiment_id = config.id;
  rep.config_hash = config.hash();
  rep.rows = std::move(r.rows);
  rep.precision_escalations = r.escalations;
  std::stable_sort(rep.rows.begin(), rep.rows.end(),
                   [](const ReportRow& a, const ReportRow& b) {
                     if (a.metric != b.metric) return a.metric < b.metric;
                     if (a.n != b.n) return a.n < b.n;
                     return a.witness < b.witness;
                   });
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!r.blocks_detail.empty()) {
    std::filesystem::create_directories(opt.out_dir);
    for (const auto& [N, res] : r.blocks_detail) {
      std::ofstream out(opt.out_dir /
                        (config.id + "_blocks_" + std::to_string(N) + ".csv"));
      out << "base,len,weyl_modulus,witness,remainder_bound\n";
      for (const auto& row : res.rows) {
        out << row.base << "," << row.len << "," << format_double(row.weyl_modulus)
            << "," << (row.witness ? row.witness->chi.to_string() : "none") << ","
            << format_double(row.remainder_bound) << "\n";
      }
    }
  }
  return rep;
}

std::filesystem::path write_report(const RunReport& report, const ExperimentConfig& cfg,
                                   const RunOptions& opt) {
  std::filesystem::create_directories(opt.out_dir);
  const auto csv_path = opt.out_dir / (cfg.id + ".csv");
  std::ofstream out(csv_path, std::ios::trunc);
  if (!out) throw IOFailure("cannot write " + csv_path.string());
  out << "experiment,N,metric,value,witness,seconds\n";
  for (const auto& row : report.rows) {
    out << cfg.id << "," << row.n << "," << row.metric << ","
        << format_double(row.value) << "," << row.witness << ",";
    if (opt.emit_timings) out << format_double(report.wall_seconds);
    out << "\n";
  }
  out.close();

  // one TSV per metric: N, mean value over rows at that N
  std::map<std::string, std::map<long, std::pair<double, long>>> agg;
  for (const auto& row : report.rows) {
    auto& cell = agg[row.metric][row.n];
    cell.first += row.value;
    cell.second += 1;
  }
  for (const auto& [metric, by_n] : agg) {
    std::string fname = metric;
    for (auto& ch : fname)
      if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
    std::ofstream tsv(opt.out_dir / (cfg.id + "_" + fname + ".tsv"), std::ios::trunc);
    tsv << "N\tvalue\n";
    for (const auto& [n, cell] : by_n)
      tsv << n << "\t" << format_double(cell.first / static_cast<double>(cell.second))
          << "\n";
  }
  return csv_path;
}

const std::vector<CatalogEntry>& list_experiments() {
  static const std::vector<CatalogEntry> catalog = {
      {"tbos_n32", "T:Bos", "tbos_n32.json",
       "star discrepancy of {n^{3/2}} along the N grid"},
      {"tbos_nlogn", "T:Bos", "tbos_nlogn.json",
       "block pipeline and discrepancy for n log n"},
      {"tbos_mixed", "T:Bos", "tbos_mixed.json",
       "star discrepancy of {sqrt2 n^2 + n^{1/2}}"},
      {"tbos_negative_logt", "T:Bos", "tbos_negative_logt.json",
       "negative control: log n stays far from equidistributed"},
      {"tb_orbit_n32", "T:B", "tb_orbit_n32.json",
       "Heisenberg orbit along [n^{3/2}] vs Haar"},
      {"tseveral_joint", "T:several", "tseveral_joint.json",
       "joint orbit along ([n^{3/2}], [n^{5/2}])"},
      {"tseveral_negative_poly", "T:several", "tseveral_negative_poly.json",
       "negative-control recipe: polynomial pair (n, n^2), no claim"},
      {"tapp1_torus", "T:Application1", "tapp1_torus.json",
       "torus equidistribution of [n^{3/2}]^2 sqrt2"},
      {"tgt_obstruction", "T:GT", "tgt_obstruction.json",
       "obstruction scan demo: alpha = 1/2 vs alpha = sqrt2"},
      {"trandom_power_half", "T:random", "trandom_power_half.json",
       "random sparse sequence, sigma_n = n^{-1/2}, 20 seeds"},
      {"trandom_negative_1_over_n", "T:random", "trandom_negative_1_over_n.json",
       "documented bad regime sigma_n = 1/n, no convergence claim"},
      {"theis_blocks_nlogn", "T:Bos", "theis_blocks_nlogn.json",
       "aggregate Weyl decay table for n log n"},
  };
  return catalog;
}

std::filesystem::path find_config(const std::string& id,
                                  const std::filesystem::path& config_dir) {
  for (const auto& e : list_experiments()) {
    if (e.id == id) {
      const auto p = config_dir / e.file;
      if (!std::filesystem::exists(p))
        throw IOFailure("catalog config missing on disk: " + p.string());
      return p;
    }
  }
  throw ConfigInvalid("unknown experiment id \"" + id + "\"");
}

}  // namespace nilflow::lab
