#include <cmath>

#include "nilflow/nilgroup.hpp"
#include "nilflow/philox.hpp"

namespace nilflow::nilgroup {

namespace {

// generalized golden-ratio (R_m) Kronecker directions: alpha_j = phi^-(j+1),
// phi the positive root of x^(m+1) = x + 1
std::vector<double> kronecker_alphas(int m) {
  double phi = 1.5;
  for (int it = 0; it < 64; ++it)
    phi = std::pow(1.0 + phi, 1.0 / (m + 1));
  std::vector<double> a(static_cast<std::size_t>(m));
  double p = 1.0;
  for (int j = 0; j < m; ++j) {
    p /= phi;
    a[static_cast<std::size_t>(j)] = p;
  }
  return a;
}

}  // namespace

HaarEstimate haar_average(int cube_dim, const TestFunction& F, std::size_t samples,
                          std::uint64_t seed) {
  if (samples < 1000) throw Error("haar_average: need at least 1e3 samples");
  constexpr std::size_t kShifts = 16;
  const std::size_t per = samples / kShifts;
  const auto alphas = kronecker_alphas(cube_dim);

  std::vector<std::complex<double>> shift_means(kShifts);
  std::vector<double> x(static_cast<std::size_t>(cube_dim));
  std::vector<std::complex<double>> vals(per);
  for (std::size_t s = 0; s < kShifts; ++s) {
    std::vector<double> shift(static_cast<std::size_t>(cube_dim));
    for (int j = 0; j < cube_dim; ++j)
      shift[static_cast<std::size_t>(j)] =
          Philox::u01(seed ^ 0x9af88c1d2f3e4b57ull, s, static_cast<std::uint32_t>(j));
    for (std::size_t n = 0; n < per; ++n) {
      for (int j = 0; j < cube_dim; ++j) {
        double v = shift[static_cast<std::size_t>(j)] +
                   static_cast<double>(n + 1) * alphas[static_cast<std::size_t>(j)];
        x[static_cast<std::size_t>(j)] = v - std::floor(v);
      }
      vals[n] = F.f(x);
    }
    shift_means[s] = pairwise_sum(std::span<const std::complex<double>>(vals)) /
                     static_cast<double>(per);
  }
  const std::complex<double> mean =
      pairwise_sum(std::span<const std::complex<double>>(shift_means)) /
      static_cast<double>(kShifts);
  double var = 0.0;
  for (const auto& m : shift_means) {
    const auto dlt = m - mean;
    var += std::norm(dlt);
  }
  var /= (kShifts - 1);
  return {mean, std::sqrt(var / kShifts)};
}

}  // namespace nilflow::nilgroup
