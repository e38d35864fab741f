#ifndef VODSIM_POPULARITY_HPP
#define VODSIM_POPULARITY_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "vodsim/rng.hpp"

namespace vodsim {

/// Zipf-like request popularity over a catalog of N titles: the probability of
/// a request for title i is delta / i^alpha with skew 0 < alpha < 1. The first
/// M titles are the "popular" set.
///
/// The normalizer delta is computed exactly (compensated summation of the full
/// series), so the pmf is a true distribution; the closed-form (M/N)^(1-alpha)
/// shortcut is exposed separately as the documented approximation.
class ZipfPopularity {
 public:
  ZipfPopularity(int total_titles, int popular_titles, double skew)
      : total_titles_(total_titles),
        popular_titles_(popular_titles),
        skew_(skew) {
    if (total_titles_ < 1)
      throw std::invalid_argument("ZipfPopularity: catalog must hold at least one title");
    if (popular_titles_ < 1 || popular_titles_ > total_titles_)
      throw std::invalid_argument("ZipfPopularity: popular title count must lie in 1..N");
    if (!(skew_ > 0.0) || !(skew_ < 1.0))
      throw std::invalid_argument("ZipfPopularity: skew must satisfy 0 < alpha < 1");

    // One pass in extended precision with Kahan compensation keeps the
    // normalization error at a few ulps even for N = 10^6.
    cdf_.resize(static_cast<std::size_t>(total_titles_));
    long double sum = 0.0L, comp = 0.0L;
    for (int i = 1; i <= total_titles_; ++i) {
      const long double w =
          std::pow(static_cast<long double>(i), static_cast<long double>(-skew_));
      const long double y = w - comp;
      const long double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
      cdf_[static_cast<std::size_t>(i - 1)] = static_cast<double>(t);
    }
    total_weight_ = sum;
    normalizer_ = static_cast<double>(1.0L / sum);
    for (double& c : cdf_) c = static_cast<double>(c / static_cast<double>(sum));
    cdf_.back() = 1.0;  // guard the sampler against rounding at the tail
  }

  int total_titles() const { return total_titles_; }
  int popular_titles() const { return popular_titles_; }
  double skew() const { return skew_; }

  /// Exact normalizer delta = 1 / sum_{i=1..N} i^(-alpha).
  double normalizer() const { return normalizer_; }

  /// p(i) = delta / i^alpha for a title index in 1..N.
  double pmf(int title) const {
    check_title(title);
    return normalizer_ * std::pow(static_cast<double>(title), -skew_);
  }

  bool is_popular(int title) const {
    check_title(title);
    return title <= popular_titles_;
  }

  /// Probability that a request targets one of the M popular titles,
  /// by direct summation of the pmf: sum_{i=1..M} delta / i^alpha.
  double cumulative_popularity_exact() const {
    return cdf_[static_cast<std::size_t>(popular_titles_ - 1)];
  }

  /// Closed-form approximation (M/N)^(1-alpha) of the popular mass. This is
  /// asymptotic, not equal to the exact sum; see the exact variant.
  double cumulative_popularity_approx() const {
    const double ratio =
        static_cast<double>(popular_titles_) / static_cast<double>(total_titles_);
    return std::pow(ratio, 1.0 - skew_);
  }

  /// Probability of a request for an unpopular title, 1 - (M/N)^(1-alpha).
  /// Complements cumulative_popularity_approx exactly.
  double unpopular_request_probability() const {
    return 1.0 - cumulative_popularity_approx();
  }

  /// Draws a title index in 1..N with probability p(i), by inverse transform
  /// over the precomputed cumulative table (O(log N), no rejection).
  int sample_title(Rng& rng) const {
    const double u = rng.uniform01();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<int>(it - cdf_.begin()) + 1;
  }

 private:
  void check_title(int title) const {
    if (title < 1 || title > total_titles_)
      throw std::out_of_range("ZipfPopularity: title index " + std::to_string(title) +
                              " not in 1.." + std::to_string(total_titles_));
  }

  int total_titles_;
  int popular_titles_;
  double skew_;
  double normalizer_;
  long double total_weight_;
  std::vector<double> cdf_;  // cdf_[i-1] = P(title <= i), cdf_[N-1] == 1
};

}  // namespace vodsim

#endif  // VODSIM_POPULARITY_HPP
