#ifndef VODSIM_STATS_HPP
#define VODSIM_STATS_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace vodsim {

/// Two-sided 95% normal quantile.
inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
  double low = 0.0;
  double high = 0.0;
  double half_width() const { return (high - low) / 2.0; }
};

/// Wilson score interval for a binomial proportion at 95% confidence.
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials) {
  if (trials == 0) throw std::invalid_argument("wilson_interval: zero trials");
  if (successes > trials)
    throw std::invalid_argument("wilson_interval: successes exceed trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      kZ95 * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  Interval iv{center - half, center + half};
  if (iv.low < 0.0) iv.low = 0.0;
  if (iv.high > 1.0) iv.high = 1.0;
  return iv;
}

/// Student-t 0.975 quantile. Table for small degrees of freedom, Cornish-
/// Fisher style tail correction beyond it (good to ~1e-4 there).
inline double t_quantile_975(int dof) {
  static constexpr double table[] = {
      12.706205, 4.302653, 3.182446, 2.776445, 2.570582, 2.446912, 2.364624,
      2.306004,  2.262157, 2.228139, 2.200985, 2.178813, 2.160369, 2.144787,
      2.131450,  2.119905, 2.109816, 2.100922, 2.093024, 2.085963, 2.079614,
      2.073873,  2.068658, 2.063899, 2.059539, 2.055529, 2.051831, 2.048407,
      2.045230,  2.042272, 2.039513, 2.036933, 2.034515, 2.032245, 2.030108,
      2.028094,  2.026192, 2.024394, 2.022691, 2.021075};
  if (dof < 1) throw std::invalid_argument("t_quantile_975: dof must be >= 1");
  if (dof <= 40) return table[dof - 1];
  const double z = kZ95;
  const double d = static_cast<double>(dof);
  return z + (z * z * z + z) / (4.0 * d) +
         (5.0 * std::pow(z, 5) + 16.0 * z * z * z + 3.0 * z) / (96.0 * d * d);
}

struct MeanVariance {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // sample variance (n - 1 in the denominator)
};

inline MeanVariance mean_variance(std::span<const double> values) {
  MeanVariance mv;
  mv.count = values.size();
  if (mv.count == 0) return mv;
  double sum = 0.0;
  for (double v : values) sum += v;
  mv.mean = sum / static_cast<double>(mv.count);
  if (mv.count < 2) return mv;
  double ss = 0.0;
  for (double v : values) {
    const double d = v - mv.mean;
    ss += d * d;
  }
  mv.variance = ss / static_cast<double>(mv.count - 1);
  return mv;
}

/// t confidence interval on the mean of independent replicates.
inline Interval t_interval(std::span<const double> values) {
  const MeanVariance mv = mean_variance(values);
  if (mv.count < 2)
    return {mv.mean, mv.mean};
  const double se = std::sqrt(mv.variance / static_cast<double>(mv.count));
  const double hw = t_quantile_975(static_cast<int>(mv.count) - 1) * se;
  return {mv.mean - hw, mv.mean + hw};
}

}  // namespace vodsim

#endif  // VODSIM_STATS_HPP
