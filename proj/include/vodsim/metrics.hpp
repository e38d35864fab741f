#ifndef VODSIM_METRICS_HPP
#define VODSIM_METRICS_HPP

#include <charconv>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vodsim/stats.hpp"
#include "vodsim/traffic.hpp"

namespace vodsim {

/// How a blocking confidence interval was computed. Wilson treats the counts
/// as independent Bernoulli trials; batch-means accounts for within-run
/// autocorrelation and is used for long single-run estimates.
enum class CiMethod { wilson, batch_means };

inline const char* to_string(CiMethod m) {
  return m == CiMethod::wilson ? "wilson" : "batch-means";
}

struct BlockingEstimate {
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  CiMethod method = CiMethod::wilson;

  bool contains(double value) const { return ci_low <= value && value <= ci_high; }
  double width() const { return ci_high - ci_low; }
};

/// Point estimate denied/offered with a Wilson-score 95% interval.
/// Returns nullopt when nothing was offered (blocking undefined).
inline std::optional<BlockingEstimate> blocking_estimate(std::uint64_t denied,
                                                         std::uint64_t offered) {
  if (denied > offered)
    throw std::invalid_argument("blocking_estimate: denied exceeds offered");
  if (offered == 0) return std::nullopt;
  const Interval iv = wilson_interval(denied, offered);
  return BlockingEstimate{
      static_cast<double>(denied) / static_cast<double>(offered), iv.low,
      iv.high, CiMethod::wilson};
}

/// Aggregate offered load in Erlangs: sum of lambda_i times the mean of the
/// class's hold law. Exactly linear in a common scaling of the rates.
inline double traffic_intensity(std::span<const TrafficClass> classes) {
  double sum = 0.0;
  for (const auto& c : classes) sum += c.arrival_rate * c.hold_law.mean();
  return sum;
}

/// A change of total occupancy: at `time` the server holds `total_occupied`
/// busy ports (until the next event).
struct OccupancyEvent {
  double time = 0.0;
  int total_occupied = 0;
};

struct TrajectoryPoint {
  double time = 0.0;
  int free_ports = 0;
};

/// Samples the free-port step function on the grid {0, dt, 2dt, ... <= horizon}.
/// The value at a grid time reflects every event with time <= t (right-
/// continuous). The server starts empty, so an empty stream yields a constant
/// series at the total capacity.
inline std::vector<TrajectoryPoint> free_port_trajectory(
    std::span<const OccupancyEvent> events, int total_capacity, double horizon,
    double sample_interval) {
  if (!(sample_interval > 0.0))
    throw std::invalid_argument("free_port_trajectory: sample interval must be positive");
  if (!(horizon > 0.0))
    throw std::invalid_argument("free_port_trajectory: horizon must be positive");
  std::vector<TrajectoryPoint> series;
  series.reserve(static_cast<std::size_t>(horizon / sample_interval) + 2);
  int occupied = 0;
  std::size_t next = 0;  // grid index
  auto grid_time = [&](std::size_t i) { return static_cast<double>(i) * sample_interval; };
  for (const auto& ev : events) {
    while (grid_time(next) < ev.time && grid_time(next) <= horizon) {
      series.push_back({grid_time(next), total_capacity - occupied});
      ++next;
    }
    occupied = ev.total_occupied;
    if (occupied < 0 || occupied > total_capacity)
      throw std::invalid_argument("free_port_trajectory: occupancy outside 0..C");
  }
  while (grid_time(next) <= horizon) {
    series.push_back({grid_time(next), total_capacity - occupied});
    ++next;
  }
  return series;
}

struct ClassStats {
  int class_id = 0;
  std::uint64_t offered = 0;
  std::uint64_t admitted = 0;
  std::uint64_t denied = 0;
  std::uint64_t home_blocked = 0;  // arrivals that found their home partition full
  std::optional<BlockingEstimate> blocking;
  double offered_erlangs = 0.0;   // home load lambda_i * mean hold_i
  double analytic_denial = 0.0;   // end-to-end cascade estimate (independence assumption)
};

struct PartitionStats {
  int partition = 0;
  int capacity = 0;
  std::uint64_t admitted = 0;
  double mean_occupancy = 0.0;       // time-weighted, measurement window
  double fraction_time_full = 0.0;   // share of the window with no free port
  double offered_erlangs = 0.0;      // home-class load
  double analytic_blocking = 0.0;    // Erlang-B on the home load
};

/// Results of one simulation run, aligned with what the experiment plots:
/// per-class and per-partition tallies, blocking with confidence intervals,
/// the free-port trajectory, and the analytic predictions for the same
/// scenario. Counts cover the measurement window (post warm-up).
struct MetricsReport {
  std::string scenario_id;
  std::uint64_t seed = 0;
  double horizon = 0.0;
  double measurement_start = 0.0;

  std::vector<ClassStats> per_class;
  std::vector<PartitionStats> per_partition;

  std::uint64_t offered = 0;
  std::uint64_t admitted = 0;
  std::uint64_t denied = 0;
  std::optional<BlockingEstimate> blocking;  // overall

  double traffic_intensity_erlangs = 0.0;
  double mean_free_ports = 0.0;  // time-weighted, measurement window
  double analytic_overall_denial = 0.0;  // arrival-weighted cascade estimate
  std::vector<TrajectoryPoint> free_port_series;

  // Workload metadata when a popularity model is configured.
  bool popularity_enabled = false;
  std::uint64_t popular_offered = 0;
  std::uint64_t unpopular_offered = 0;

  nlohmann::json to_json() const;
  void write_csv(std::ostream& out, bool header = true) const;
};

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline nlohmann::json to_json(const std::optional<BlockingEstimate>& b) {
  if (!b) return nullptr;
  return nlohmann::json{{"estimate", b->estimate},
                        {"ci_low", b->ci_low},
                        {"ci_high", b->ci_high},
                        {"method", to_string(b->method)}};
}

}  // namespace detail

inline nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j;
  j["scenario_id"] = scenario_id;
  j["seed"] = seed;
  j["horizon"] = horizon;
  j["measurement_start"] = measurement_start;
  j["traffic_intensity_erlangs"] = traffic_intensity_erlangs;
  j["totals"] = {{"offered", offered},
                 {"admitted", admitted},
                 {"denied", denied},
                 {"blocking", detail::to_json(blocking)},
                 {"mean_free_ports", mean_free_ports}};
  j["per_class"] = nlohmann::json::array();
  for (const auto& c : per_class) {
    j["per_class"].push_back({{"class_id", c.class_id},
                              {"offered", c.offered},
                              {"admitted", c.admitted},
                              {"denied", c.denied},
                              {"home_blocked", c.home_blocked},
                              {"blocking", detail::to_json(c.blocking)},
                              {"offered_erlangs", c.offered_erlangs},
                              {"analytic_denial", c.analytic_denial}});
  }
  j["per_partition"] = nlohmann::json::array();
  for (const auto& p : per_partition) {
    j["per_partition"].push_back({{"partition", p.partition},
                                  {"capacity", p.capacity},
                                  {"admitted", p.admitted},
                                  {"mean_occupancy", p.mean_occupancy},
                                  {"fraction_time_full", p.fraction_time_full},
                                  {"offered_erlangs", p.offered_erlangs},
                                  {"analytic_blocking", p.analytic_blocking}});
  }
  j["analytic"] = {{"overall_denial", analytic_overall_denial},
                   {"independence_approximation", true}};
  if (popularity_enabled)
    j["popularity"] = {{"popular_offered", popular_offered},
                       {"unpopular_offered", unpopular_offered}};
  j["free_port_series"] = nlohmann::json::array();
  for (const auto& pt : free_port_series)
    j["free_port_series"].push_back({pt.time, pt.free_ports});
  return j;
}

/// Flat CSV, one row per class (equivalently per home partition) plus an
/// overall row with class_id 0. Blocking columns are empty when undefined.
inline void MetricsReport::write_csv(std::ostream& out, bool header) const {
  using detail::format_double;
  if (header)
    out << "scenario_id,class_id,offered,admitted,denied,blocking,ci_low,"
           "ci_high,erlangs,analytic_blocking\n";
  auto row = [&](int class_id, std::uint64_t off, std::uint64_t adm,
                 std::uint64_t den, const std::optional<BlockingEstimate>& b,
                 double erl, double analytic) {
    out << scenario_id << ',' << class_id << ',' << off << ',' << adm << ','
        << den << ',';
    if (b)
      out << format_double(b->estimate) << ',' << format_double(b->ci_low)
          << ',' << format_double(b->ci_high);
    else
      out << ",,";
    out << ',' << format_double(erl) << ',' << format_double(analytic) << '\n';
  };
  row(0, offered, admitted, denied, blocking, traffic_intensity_erlangs,
      analytic_overall_denial);
  for (const auto& c : per_class)
    row(c.class_id, c.offered, c.admitted, c.denied, c.blocking,
        c.offered_erlangs, c.analytic_denial);
}

}  // namespace vodsim

#endif  // VODSIM_METRICS_HPP
