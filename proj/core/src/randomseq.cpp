#include "nilflow/randomseq.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "nilflow/philox.hpp"

namespace nilflow::randomseq {

namespace {

std::uint64_t spec_hash(const SigmaSpec& spec) {
  const std::string id = spec.id();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : id) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

SigmaSpec SigmaSpec::power(const Rational& c) {
  SigmaSpec s;
  s.form = Form::Power;
  s.c = c;
  s.validate();
  return s;
}

SigmaSpec SigmaSpec::from_expr(const hardy::HardyExpr& e, bool allow_bad) {
  SigmaSpec s;
  s.form = Form::Expr;
  s.expr = e;
  s.allow_bad_regime = allow_bad;
  s.validate();
  return s;
}

void SigmaSpec::validate() const {
  switch (form) {
    case Form::Power:
      if (c < 0 || c >= 1) {
        if (!(allow_bad_regime && c == 1))
          throw ConfigInvalid("sigma power exponent must satisfy 0 <= c < 1");
      }
      return;
    case Form::Table:
      for (std::size_t i = 0; i < table.size(); ++i) {
        if (table[i] < 0.0 || table[i] > 1.0)
          throw ConfigInvalid("sigma table entries must lie in [0,1]");
        if (i > 0 && table[i] > table[i - 1])
          throw ConfigInvalid("sigma table must be non-increasing");
      }
      return;
    case Form::Expr: {
      if (!expr) throw ConfigInvalid("sigma expression missing");
      // symbolic certificates: sigma decreasing eventually, n*sigma_n -> inf
      const hardy::HardyExpr t_sigma =
          hardy::parse_hardy("t") * (*expr);
      const hardy::HardyExpr one = hardy::parse_hardy("1");
      if (!allow_bad_regime &&
          hardy::growth_compare(t_sigma, one) != hardy::Ordering::Greater)
        throw ConfigInvalid("n*sigma_n must tend to infinity for " + expr->to_string());
      for (long t : {100L, 10000L, 1000000L}) {
        const double v =
            hardy::eval(*expr, real_from(t, 96), 96).value.convert_to<double>();
        if (v < 0.0 || v > 1.0)
          throw ConfigInvalid("sigma expression leaves [0,1] at t=" + std::to_string(t));
      }
      return;
    }
  }
}

double SigmaSpec::sigma(std::int64_t n) const {
  if (n < 1) throw Error("sigma: index must be >= 1");
  switch (form) {
    case Form::Power: {
      if (n == 1) return 1.0;
      if (c == Rational(1, 2)) return 1.0 / std::sqrt(static_cast<double>(n));
      if (c == 1) return 1.0 / static_cast<double>(n);
      const double cd = numerator(c).convert_to<double>() /
                        denominator(c).convert_to<double>();
      return std::pow(static_cast<double>(n), -cd);
    }
    case Form::Table: {
      if (table.empty()) return 1.0;
      const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(n - 1),
                                                  table.size() - 1);
      return table[i];
    }
    case Form::Expr: {
      if (n < 2) return 1.0;
      const double v =
          hardy::eval(*expr, real_from(static_cast<long>(n), 96), 96)
              .value.convert_to<double>();
      return std::clamp(v, 0.0, 1.0);
    }
  }
  return 1.0;
}

std::string SigmaSpec::id() const {
  std::ostringstream os;
  switch (form) {
    case Form::Power:
      os << "power(" << c << ")";
      break;
    case Form::Table:
      os << "table[" << table.size() << "]";
      break;
    case Form::Expr:
      os << "expr(" << expr->to_string() << ")";
      break;
  }
  return os.str();
}

std::int64_t RandomSeqSample::count_upto(std::int64_t N) const {
  const auto it = std::upper_bound(kept.begin(), kept.end(), N);
  return static_cast<std::int64_t>(it - kept.begin());
}

RandomSeqSample sample(const SigmaSpec& spec, std::uint64_t seed, std::int64_t n_max) {
  RandomSeqSample out;
  out.seed = seed;
  out.n_max = n_max;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    const double u = Philox::u01(seed, static_cast<std::uint64_t>(n));
    if (u < spec.sigma(n)) out.kept.push_back(n);
  }
  return out;
}

std::string serialize_sample(const RandomSeqSample& s, const SigmaSpec& spec) {
  nlohmann::json j;
  j["seed"] = s.seed;
  j["n_max"] = s.n_max;
  j["spec_hash"] = spec_hash(spec);
  // alternating skip/keep run lengths over [1, n_max], starting with a skip
  std::vector<std::int64_t> runs;
  std::int64_t pos = 1;
  std::size_t i = 0;
  while (i < s.kept.size()) {
    runs.push_back(s.kept[i] - pos);  // skipped
    std::int64_t run = 1;
    while (i + 1 < s.kept.size() && s.kept[i + 1] == s.kept[i] + 1) {
      ++run;
      ++i;
    }
    runs.push_back(run);  // kept
    pos = s.kept[i] + 1;
    ++i;
  }
  if (pos <= s.n_max) runs.push_back(s.n_max - pos + 1);
  j["runs"] = runs;
  return j.dump();
}

RandomSeqSample deserialize_sample(const std::string& text,
                                   const SigmaSpec* expected_spec) {
  nlohmann::json j = nlohmann::json::parse(text);
  RandomSeqSample s;
  s.seed = j.at("seed").get<std::uint64_t>();
  s.n_max = j.at("n_max").get<std::int64_t>();
  if (expected_spec &&
      j.at("spec_hash").get<std::uint64_t>() != spec_hash(*expected_spec))
    throw ConfigInvalid("sample was generated under a different sigma spec");
  std::int64_t pos = 1;
  bool keeping = false;
  for (const auto& r : j.at("runs")) {
    const std::int64_t run = r.get<std::int64_t>();
    if (run < 0 || pos + run > s.n_max + 1)
      throw ConfigInvalid("corrupt run-length bitmap");
    if (keeping)
      for (std::int64_t k = 0; k < run; ++k) s.kept.push_back(pos + k);
    pos += run;
    keeping = !keeping;
  }
  return s;
}

double weight(const SigmaSpec& spec, std::int64_t N) {
  if (N < 1) throw Error("weight: N must be >= 1");
  double acc = 0.0, comp = 0.0;
  for (std::int64_t n = 1; n <= N; ++n) {
    const double y = spec.sigma(n) - comp;
    const double t = acc + y;
    comp = (t - acc) - y;
    acc = t;
  }
  return acc;
}

CompareAverages compare_averages(const RandomSeqSample& smpl,
                                 const equidist::UnipotentElement& b,
                                 const nilgroup::NilPoint& x0,
                                 const nilgroup::TestFunction& F, std::int64_t N,
                                 const equidist::OrbitOptions& opt) {
  if (smpl.n_max < N) throw Error("compare_averages: sample shorter than N");
  equidist::IntSequence full;
  full.id = "n";
  full.first_n = 1;
  full.values.resize(static_cast<std::size_t>(N));
  for (std::int64_t n = 1; n <= N; ++n)
    full.values[static_cast<std::size_t>(n - 1)] = n;

  const equidist::OrbitCoords coords = equidist::nil_orbit(b, x0, full, opt);
  std::vector<std::complex<double>> vals(coords.points.count());
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = F.f(coords.points.row(i));

  CompareAverages out;
  out.full = pairwise_sum(std::span<const std::complex<double>>(vals)) /
             static_cast<double>(N);
  const std::int64_t a_count = smpl.count_upto(N);
  out.sparse_count = a_count;
  if (a_count == 0) throw Error("compare_averages: empty sparse set below N");
  std::vector<std::complex<double>> sparse_vals(static_cast<std::size_t>(a_count));
  for (std::int64_t i = 0; i < a_count; ++i)
    sparse_vals[static_cast<std::size_t>(i)] =
        vals[static_cast<std::size_t>(smpl.kept[static_cast<std::size_t>(i)] - 1)];
  out.sparse = pairwise_sum(std::span<const std::complex<double>>(sparse_vals)) /
               static_cast<double>(a_count);
  out.gap = std::abs(out.sparse - out.full);
  return out;
}

MomentEstimate moment_estimate(const SigmaSpec& spec,
                               const std::function<double(std::int64_t)>& coeff,
                               std::int64_t N, int trials, std::uint64_t seed) {
  if (trials < 100) throw Error("moment_estimate: need at least 100 trials");
  const double w = weight(spec, N);
  const double p = std::ceil(std::log(static_cast<double>(N)));

  std::vector<double> sums(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    double acc = 0.0, comp = 0.0;
    for (std::int64_t n = 1; n <= N; ++n) {
      const double s = spec.sigma(n);
      const double x =
          Philox::u01(seed ^ (0xC0FFEEull + static_cast<std::uint64_t>(t)),
                      static_cast<std::uint64_t>(n)) < s
              ? 1.0
              : 0.0;
      const double y = (x - s) * coeff(n) - comp;
      const double tt = acc + y;
      comp = (tt - acc) - y;
      acc = tt;
    }
    sums[static_cast<std::size_t>(t)] = std::abs(acc) / w;
  }
  auto lp_norm = [p](std::span<const double> xs) {
    double acc = 0.0;
    for (double x : xs) acc += std::pow(x, p);
    return std::pow(acc / static_cast<double>(xs.size()), 1.0 / p);
  };

  MomentEstimate out;
  out.value = lp_norm(sums);
  out.reference = std::sqrt(std::log(static_cast<double>(N)) / w);

  // bootstrap over trials
  constexpr int kBoot = 64;
  std::vector<double> boots(kBoot);
  std::vector<double> resampled(sums.size());
  for (int bres = 0; bres < kBoot; ++bres) {
    for (std::size_t i = 0; i < sums.size(); ++i) {
      const std::uint64_t pick = Philox::u64(
          seed ^ 0xB007B007ull, static_cast<std::uint64_t>(bres) * sums.size() + i);
      resampled[i] = sums[static_cast<std::size_t>(pick % sums.size())];
    }
    boots[static_cast<std::size_t>(bres)] = lp_norm(resampled);
  }
  double mean = 0.0;
  for (double bv : boots) mean += bv;
  mean /= kBoot;
  double var = 0.0;
  for (double bv : boots) var += (bv - mean) * (bv - mean);
  out.bootstrap_error = std::sqrt(var / (kBoot - 1));
  return out;
}

}  // namespace nilflow::randomseq
