#ifndef VODSIM_ANALYTIC_HPP
#define VODSIM_ANALYTIC_HPP

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vodsim/partition.hpp"

namespace vodsim {

/// Erlang-B blocking probability of a loss system with `ports` servers and
/// `erlangs` offered load. Uses the stable recurrence
///   B(0) = 1,  B(j) = E * B(j-1) / (j + E * B(j-1))
/// instead of the factorial quotient, which overflows near c ~ 170.
/// ports == 0 is allowed and blocks every arrival.
inline double erlang_b(double erlangs, int ports) {
  if (!(erlangs >= 0.0))
    throw std::invalid_argument("erlang_b: offered load must be nonnegative");
  if (ports < 0)
    throw std::invalid_argument("erlang_b: port count must be nonnegative");
  double b = 1.0;
  for (int j = 1; j <= ports; ++j) {
    b = erlangs * b / (static_cast<double>(j) + erlangs * b);
  }
  return b;
}

/// Offered load in Erlangs: sum of lambda_i * h_i over the classes feeding a
/// partition (arrival rate times mean holding time, dimensionless).
inline double offered_load_erlangs(std::span<const double> rates,
                                   std::span<const double> holds) {
  if (rates.size() != holds.size())
    throw std::invalid_argument("offered_load_erlangs: rates and holds differ in length");
  double sum = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (rates[i] < 0.0 || holds[i] < 0.0)
      throw std::invalid_argument("offered_load_erlangs: negative rate or hold");
    sum += rates[i] * holds[i];
  }
  return sum;
}

/// The load expression E_n = (1/T_n) * sum lambda_i h_i with an explicit busy
/// interval T_n. Reports that use it are labeled accordingly; the standard
/// Erlang form above drives all validation.
inline double offered_load_paper_literal(std::span<const double> rates,
                                         std::span<const double> holds,
                                         double busy_interval) {
  if (!(busy_interval > 0.0))
    throw std::invalid_argument("offered_load_paper_literal: busy interval must be positive");
  return offered_load_erlangs(rates, holds) / busy_interval;
}

/// Per-class offered traffic: rates, mean holds, and an optional busy
/// interval for the literal-form load.
struct OfferedLoad {
  std::vector<double> rates;
  std::vector<double> holds;
  std::optional<double> busy_interval;

  double erlangs() const { return offered_load_erlangs(rates, holds); }

  double erlangs_paper_literal() const {
    if (!busy_interval)
      throw std::logic_error("OfferedLoad: no busy interval configured");
    return offered_load_paper_literal(rates, holds, *busy_interval);
  }
};

/// Probability that a request is served by partition j of k under uniform
/// dispatch: (1 - 1/k)^(j-1) * (1/k) * (c_j - q_j) / c_j.
/// At j = 1 this reduces to (1/k) * (c_1 - q_1) / c_1.
inline double routed_availability(int j, int k, int ports, int occupied) {
  if (k < 1)
    throw std::invalid_argument("routed_availability: need at least one partition");
  if (j < 1 || j > k)
    throw std::out_of_range("routed_availability: partition index " +
                            std::to_string(j) + " not in 1.." + std::to_string(k));
  if (ports < 1)
    throw std::invalid_argument("routed_availability: partition must have ports");
  if (occupied < 0 || occupied > ports)
    throw std::invalid_argument("routed_availability: occupied count not in 0..c_j");
  const double kd = static_cast<double>(k);
  const double miss = std::pow(1.0 - 1.0 / kd, static_cast<double>(j - 1));
  const double free_fraction =
      static_cast<double>(ports - occupied) / static_cast<double>(ports);
  return miss * (1.0 / kd) * free_fraction;
}

/// Probability that partitions from..to-1 are all blocked, as the product of
/// their independent Erlang-B terms. The range is half-open; from == to is the
/// empty product 1. Overflow streams are peaked rather than Poisson, so this
/// is an independence-assumption estimate, not an exact value.
inline double cascade_block_probability(std::span<const double> loads,
                                        const PartitionPlan& plan, int from,
                                        int to) {
  const int k = plan.partition_count();
  if (static_cast<int>(loads.size()) != k)
    throw std::invalid_argument("cascade_block_probability: one load per partition required");
  if (from < 1 || to > k + 1 || from > to)
    throw std::out_of_range("cascade_block_probability: range must satisfy 1 <= from <= to <= k+1");
  double product = 1.0;
  for (int m = from; m < to; ++m) {
    product *= erlang_b(loads[static_cast<std::size_t>(m - 1)], plan.capacity(m));
  }
  return product;
}

/// Independence-assumption estimate that a class-`home` request finds every
/// partition home..k blocked, i.e. the full forward cascade denies it.
inline double end_to_end_denial(std::span<const double> loads,
                                const PartitionPlan& plan, int home) {
  const int k = plan.partition_count();
  if (home < 1 || home > k)
    throw std::out_of_range("end_to_end_denial: home partition not in 1..k");
  return cascade_block_probability(loads, plan, home, k + 1);
}

}  // namespace vodsim

#endif  // VODSIM_ANALYTIC_HPP
