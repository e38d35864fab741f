#ifndef VODSIM_ENGINE_HPP
#define VODSIM_ENGINE_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "vodsim/analytic.hpp"
#include "vodsim/metrics.hpp"
#include "vodsim/partition.hpp"
#include "vodsim/popularity.hpp"
#include "vodsim/rng.hpp"
#include "vodsim/traffic.hpp"

namespace vodsim {

/// Where a request that finds its home partition full is forwarded.
/// forward_no_wrap scans home..k and then denies; forward_wrap continues the
/// scan cyclically through partitions 1..home-1 before denying.
enum class CascadePolicy { forward_no_wrap, forward_wrap };

/// Whether the sampled title affects routing. metadata_only records titles in
/// the event stream without touching admission; home_by_title derives the home
/// partition from the title instead of the class.
enum class TitleRouting { metadata_only, home_by_title };

/// Everything one run needs: the partition plan, one home class per
/// partition, horizon and seed, and the optional workload popularity model.
struct Scenario {
  std::string id;
  PartitionPlan plan;
  std::vector<TrafficClass> classes;
  double horizon = 400.0;
  std::uint64_t seed = 1;
  std::optional<ZipfPopularity> popularity;
  CascadePolicy cascade_policy = CascadePolicy::forward_no_wrap;
  TitleRouting title_routing = TitleRouting::metadata_only;
  double warmup_fraction = 0.1;          // share of the horizon discarded from estimates
  double trajectory_sample_interval = 1.0;  // seconds; <= 0 disables the series

  void validate() const {
    if (classes.size() != static_cast<std::size_t>(plan.partition_count()))
      throw std::invalid_argument("Scenario: one class per partition required (classes length != k)");
    for (std::size_t i = 0; i < classes.size(); ++i) {
      classes[i].validate();
      if (classes[i].class_id != static_cast<int>(i) + 1)
        throw std::invalid_argument("Scenario: class at position " + std::to_string(i) +
                                    " must have class_id " + std::to_string(i + 1));
    }
    if (!(horizon > 0.0))
      throw std::invalid_argument("Scenario: horizon must be positive");
    if (!(warmup_fraction >= 0.0) || warmup_fraction >= 1.0)
      throw std::invalid_argument("Scenario: warmup fraction must lie in [0, 1)");
    if (title_routing == TitleRouting::home_by_title && !popularity)
      throw std::invalid_argument("Scenario: title routing requires a popularity model");
  }
};

enum class EventKind { arrival, departure };

struct EventRecord {
  double time = 0.0;
  EventKind kind = EventKind::arrival;
  int class_id = 0;
  std::uint64_t request_id = 0;
  int title = 0;  // 0 when no popularity model is attached

  bool operator==(const EventRecord&) const = default;
};

/// Occupancy plus the registry of requests currently holding a port. The two
/// views are updated together, so occupancy always equals the per-partition
/// registry count.
class ServerState {
 public:
  struct InService {
    int partition = 0;
    double departure_time = 0.0;
  };

  explicit ServerState(const PartitionPlan& plan) : occupancy_(plan) {}

  const OccupancyVector& occupancy() const { return occupancy_; }
  std::size_t in_service_count() const { return in_service_.size(); }

  std::optional<InService> find(std::uint64_t request_id) const {
    const auto it = in_service_.find(request_id);
    if (it == in_service_.end()) return std::nullopt;
    return it->second;
  }

  void begin_service(std::uint64_t request_id, int partition, double departure_time) {
    if (in_service_.count(request_id))
      throw std::logic_error("ServerState: request " + std::to_string(request_id) +
                             " already in service");
    occupancy_.increment(partition);  // throws if the partition is full
    in_service_.emplace(request_id, InService{partition, departure_time});
  }

  InService end_service(std::uint64_t request_id) {
    const auto it = in_service_.find(request_id);
    if (it == in_service_.end())
      throw std::out_of_range("ServerState: unknown request id " + std::to_string(request_id));
    const InService entry = it->second;
    occupancy_.decrement(entry.partition);
    in_service_.erase(it);
    return entry;
  }

 private:
  OccupancyVector occupancy_;
  std::unordered_map<std::uint64_t, InService> in_service_;
};

/// Poisson arrival stream for one class over [0, horizon]: exponential gaps
/// with mean 1/lambda, strictly increasing times. A zero-rate class produces
/// no arrivals. Request ids and titles are left unassigned.
inline std::vector<EventRecord> generate_arrivals(const TrafficClass& cls,
                                                  double horizon, Rng& rng) {
  if (!(horizon > 0.0))
    throw std::invalid_argument("generate_arrivals: horizon must be positive");
  std::vector<EventRecord> out;
  if (cls.arrival_rate <= 0.0) return out;
  const double mean_gap = 1.0 / cls.arrival_rate;
  for (double t = rng.exponential(mean_gap); t <= horizon;
       t += rng.exponential(mean_gap)) {
    out.push_back({t, EventKind::arrival, cls.class_id, 0, 0});
  }
  return out;
}

/// Home partition of an arrival under the scenario's routing rule.
inline int home_partition(const EventRecord& arrival, const Scenario& scenario) {
  if (scenario.title_routing == TitleRouting::home_by_title && arrival.title > 0)
    return 1 + (arrival.title - 1) % scenario.plan.partition_count();
  return arrival.class_id;
}

/// The scan half of admission: first partition with a free port, starting at
/// the arrival's home in increasing index order (wrapping if the policy says
/// so). Does not touch the state.
inline std::optional<int> find_free_partition(const EventRecord& arrival,
                                              const ServerState& state,
                                              const Scenario& scenario) {
  if (arrival.kind != EventKind::arrival)
    throw std::invalid_argument("admit: event is not an arrival");
  const int k = scenario.plan.partition_count();
  const int home = home_partition(arrival, scenario);
  if (home < 1 || home > k)
    throw std::invalid_argument("admit: home partition out of range");
  const bool wrap = scenario.cascade_policy == CascadePolicy::forward_wrap;
  const int scan_length = wrap ? k : k - home + 1;
  for (int off = 0; off < scan_length; ++off) {
    const int j = 1 + (home - 1 + off) % k;
    if (!state.occupancy().is_full(j)) return j;
  }
  return std::nullopt;
}

/// Port-forwarding admission: scan partitions starting at the arrival's home
/// and seize a port on the first one that has one free. Returns the serving
/// partition, or nullopt when every scanned partition is full; the state is
/// untouched on denial.
inline std::optional<int> admit(const EventRecord& arrival, ServerState& state,
                                const Scenario& scenario, double hold_time) {
  const std::optional<int> partition = find_free_partition(arrival, state, scenario);
  if (partition)
    state.begin_service(arrival.request_id, *partition, arrival.time + hold_time);
  return partition;
}

/// Service completion: frees the request's port and drops it from the
/// registry. Unknown ids throw.
inline void release(std::uint64_t request_id, ServerState& state) {
  state.end_service(request_id);
}

/// Called after every processed event with the event and the state it left
/// behind. Used by the invariant test suites; null by default.
using EventObserver = std::function<void(const EventRecord&, const ServerState&)>;

/// One discrete-event run over a scenario. Arrivals are merged per-class
/// Poisson streams (or an injected list); departures are scheduled on
/// admission. Events are processed in nondecreasing time order, departures
/// before arrivals at equal timestamps, ties broken by request id. The clock
/// stops at the horizon; requests still in service stay in the state and can
/// be drained afterwards.
class Simulation {
 public:
  explicit Simulation(Scenario scenario)
      : scenario_(std::move(scenario)),
        state_(scenario_.plan),
        hold_rng_(derive_seed(scenario_.seed, kHoldStream)),
        title_rng_(derive_seed(scenario_.seed, kTitleStream)) {
    scenario_.validate();
    const int k = scenario_.plan.partition_count();
    per_class_.resize(static_cast<std::size_t>(k));
    partition_admitted_.resize(static_cast<std::size_t>(k), 0);
    occupancy_integral_.resize(static_cast<std::size_t>(k), 0.0);
    full_time_.resize(static_cast<std::size_t>(k), 0.0);
    last_update_.resize(static_cast<std::size_t>(k), 0.0);
    measurement_start_ = scenario_.warmup_fraction * scenario_.horizon;
    batch_length_ = (scenario_.horizon - measurement_start_) / kBatchCount;
    batch_offered_.resize(kBatchCount, 0);
    batch_denied_.resize(kBatchCount, 0);
  }

  void set_observer(EventObserver observer) { observer_ = std::move(observer); }

  const Scenario& scenario() const { return scenario_; }
  const ServerState& state() const { return state_; }

  /// Runs with internally generated per-class Poisson arrivals.
  MetricsReport run() {
    ensure_not_run();
    std::priority_queue<StreamHead, std::vector<StreamHead>, StreamHeadLater> streams;
    for (const auto& cls : scenario_.classes) {
      if (cls.arrival_rate <= 0.0) continue;
      class_rngs_.emplace_back(
          derive_seed(scenario_.seed, kArrivalStreamBase + static_cast<std::uint64_t>(cls.class_id)));
      const double first = class_rngs_.back().exponential(1.0 / cls.arrival_rate);
      if (first <= scenario_.horizon)
        streams.push({first, cls.class_id, class_rngs_.size() - 1});
    }
    auto next_arrival = [&]() -> std::optional<EventRecord> {
      if (streams.empty()) return std::nullopt;
      const StreamHead head = streams.top();
      streams.pop();
      const auto& cls = scenario_.classes[static_cast<std::size_t>(head.class_id - 1)];
      const double next =
          head.time + class_rngs_[head.rng_index].exponential(1.0 / cls.arrival_rate);
      if (next <= scenario_.horizon)
        streams.push({next, head.class_id, head.rng_index});
      return EventRecord{head.time, EventKind::arrival, head.class_id, 0, 0};
    };
    return event_loop(next_arrival);
  }

  /// Runs over an injected arrival list (sorted by time). Request ids are
  /// reassigned in processing order; titles are kept when preset.
  MetricsReport run(std::vector<EventRecord> arrivals) {
    ensure_not_run();
    for (std::size_t i = 0; i < arrivals.size(); ++i) {
      if (arrivals[i].kind != EventKind::arrival)
        throw std::invalid_argument("Simulation: injected event is not an arrival");
      if (arrivals[i].time < 0.0 || arrivals[i].time > scenario_.horizon)
        throw std::invalid_argument("Simulation: injected arrival outside [0, horizon]");
      if (i > 0 && arrivals[i].time < arrivals[i - 1].time)
        throw std::invalid_argument("Simulation: injected arrivals must be time-sorted");
    }
    std::size_t cursor = 0;
    auto next_arrival = [&]() -> std::optional<EventRecord> {
      if (cursor >= arrivals.size()) return std::nullopt;
      return arrivals[cursor++];
    };
    return event_loop(next_arrival);
  }

  /// Processes the departures left pending at the horizon, emptying the
  /// server. Metrics are not affected; only the state evolves.
  void drain() {
    while (!departures_.empty()) {
      const Departure dep = departures_.top();
      departures_.pop();
      state_.end_service(dep.request_id);
      notify({dep.time, EventKind::departure, dep.class_id, dep.request_id, 0});
    }
  }

 private:
  struct StreamHead {
    double time;
    int class_id;
    std::size_t rng_index;
  };
  struct StreamHeadLater {
    bool operator()(const StreamHead& a, const StreamHead& b) const {
      return a.time > b.time || (a.time == b.time && a.class_id > b.class_id);
    }
  };
  struct Departure {
    double time;
    std::uint64_t request_id;
    int class_id;
    int partition;
  };
  struct DepartureLater {
    bool operator()(const Departure& a, const Departure& b) const {
      return a.time > b.time || (a.time == b.time && a.request_id > b.request_id);
    }
  };
  struct ClassTally {
    std::uint64_t offered = 0;
    std::uint64_t admitted = 0;
    std::uint64_t denied = 0;
    std::uint64_t home_blocked = 0;
  };

  static constexpr std::uint64_t kHoldStream = 1;
  static constexpr std::uint64_t kTitleStream = 2;
  static constexpr std::uint64_t kArrivalStreamBase = 0x100;
  static constexpr int kBatchCount = 30;
  static constexpr std::size_t kMinBatchesForCi = 10;
  static constexpr std::uint64_t kMinOfferedForBatchCi = 1000;

  void ensure_not_run() {
    if (ran_) throw std::logic_error("Simulation: run() may only be called once");
    ran_ = true;
  }

  void notify(const EventRecord& ev) {
    if (observer_) observer_(ev, state_);
  }

  // Occupancy-time integral segment for partition j (1-based), clipped to the
  // measurement window.
  void integrate_partition(int j, double upto) {
    const auto idx = static_cast<std::size_t>(j - 1);
    const double from = std::max(last_update_[idx], measurement_start_);
    const double to = std::min(upto, scenario_.horizon);
    if (to > from) {
      const int q = state_.occupancy().occupied(j);
      occupancy_integral_[idx] += q * (to - from);
      if (q == scenario_.plan.capacity(j)) full_time_[idx] += to - from;
    }
    last_update_[idx] = upto;
  }

  void sample_grid_until(double next_event_time) {
    if (scenario_.trajectory_sample_interval <= 0.0) return;
    const int total = scenario_.plan.total_capacity();
    double g = static_cast<double>(grid_index_) * scenario_.trajectory_sample_interval;
    while (g < next_event_time && g <= scenario_.horizon) {
      series_.push_back({g, total - state_.occupancy().total_occupied()});
      ++grid_index_;
      g = static_cast<double>(grid_index_) * scenario_.trajectory_sample_interval;
    }
  }

  void tally_arrival(const ClassTally& delta, int class_id, double time) {
    if (time < measurement_start_) return;
    auto& tally = per_class_[static_cast<std::size_t>(class_id - 1)];
    tally.offered += delta.offered;
    tally.admitted += delta.admitted;
    tally.denied += delta.denied;
    tally.home_blocked += delta.home_blocked;
    auto batch = static_cast<std::size_t>((time - measurement_start_) / batch_length_);
    if (batch >= static_cast<std::size_t>(kBatchCount)) batch = kBatchCount - 1;
    batch_offered_[batch] += delta.offered;
    batch_denied_[batch] += delta.denied;
  }

  template <typename NextArrival>
  MetricsReport event_loop(NextArrival&& next_arrival) {
    std::optional<EventRecord> pending = next_arrival();
    std::uint64_t next_request_id = 1;

    while (true) {
      const double arrival_time = pending ? pending->time
                                          : std::numeric_limits<double>::infinity();
      const double departure_time = departures_.empty()
                                        ? std::numeric_limits<double>::infinity()
                                        : departures_.top().time;
      if (!pending && departures_.empty()) break;

      if (departure_time <= arrival_time) {
        if (departure_time > scenario_.horizon) break;  // left for drain()
        const Departure dep = departures_.top();
        departures_.pop();
        sample_grid_until(dep.time);
        integrate_partition(dep.partition, dep.time);
        state_.end_service(dep.request_id);
        notify({dep.time, EventKind::departure, dep.class_id, dep.request_id, 0});
        continue;
      }

      EventRecord arrival = *pending;
      pending = next_arrival();
      arrival.request_id = next_request_id++;
      if (scenario_.popularity && arrival.title == 0)
        arrival.title = scenario_.popularity->sample_title(title_rng_);
      const auto& cls = scenario_.classes[static_cast<std::size_t>(arrival.class_id - 1)];
      // Hold times are drawn per arrival, before the admission decision, so
      // the stream position does not depend on occupancy; denied arrivals
      // discard the draw.
      const double hold = draw_hold_time(cls, hold_rng_);
      const int home = home_partition(arrival, scenario_);

      sample_grid_until(arrival.time);
      ClassTally delta;
      delta.offered = 1;
      if (state_.occupancy().is_full(home)) delta.home_blocked = 1;
      const std::optional<int> partition = find_free_partition(arrival, state_, scenario_);
      if (partition) {
        integrate_partition(*partition, arrival.time);  // close the segment at the old occupancy
        state_.begin_service(arrival.request_id, *partition, arrival.time + hold);
        delta.admitted = 1;
        departures_.push({arrival.time + hold, arrival.request_id, arrival.class_id, *partition});
        if (arrival.time >= measurement_start_)
          ++partition_admitted_[static_cast<std::size_t>(*partition - 1)];
      } else {
        delta.denied = 1;
      }
      if (arrival.time >= measurement_start_ && scenario_.popularity) {
        if (scenario_.popularity->is_popular(arrival.title))
          ++popular_offered_;
        else
          ++unpopular_offered_;
      }
      tally_arrival(delta, arrival.class_id, arrival.time);
      notify(arrival);
    }

    sample_grid_until(std::numeric_limits<double>::infinity());
    for (int j = 1; j <= scenario_.plan.partition_count(); ++j)
      integrate_partition(j, scenario_.horizon);
    return build_report();
  }

  MetricsReport build_report() const {
    const int k = scenario_.plan.partition_count();
    const double window = scenario_.horizon - measurement_start_;

    std::vector<double> loads(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      const auto& cls = scenario_.classes[static_cast<std::size_t>(i)];
      loads[static_cast<std::size_t>(i)] = cls.arrival_rate * cls.hold_law.mean();
    }

    MetricsReport report;
    report.scenario_id = scenario_.id;
    report.seed = scenario_.seed;
    report.horizon = scenario_.horizon;
    report.measurement_start = measurement_start_;
    report.traffic_intensity_erlangs = traffic_intensity(scenario_.classes);
    report.free_port_series = series_;
    report.popularity_enabled = scenario_.popularity.has_value();
    report.popular_offered = popular_offered_;
    report.unpopular_offered = unpopular_offered_;

    double total_rate = 0.0;
    double weighted_denial = 0.0;
    double total_occupancy_integral = 0.0;
    for (int i = 1; i <= k; ++i) {
      const auto idx = static_cast<std::size_t>(i - 1);
      const auto& tally = per_class_[idx];

      ClassStats cs;
      cs.class_id = i;
      cs.offered = tally.offered;
      cs.admitted = tally.admitted;
      cs.denied = tally.denied;
      cs.home_blocked = tally.home_blocked;
      cs.blocking = blocking_estimate(tally.denied, tally.offered);
      cs.offered_erlangs = loads[idx];
      cs.analytic_denial =
          scenario_.cascade_policy == CascadePolicy::forward_wrap
              ? cascade_block_probability(loads, scenario_.plan, 1, k + 1)
              : end_to_end_denial(loads, scenario_.plan, i);
      report.per_class.push_back(cs);

      PartitionStats ps;
      ps.partition = i;
      ps.capacity = scenario_.plan.capacity(i);
      ps.admitted = partition_admitted_[idx];
      ps.mean_occupancy = occupancy_integral_[idx] / window;
      ps.fraction_time_full = full_time_[idx] / window;
      ps.offered_erlangs = loads[idx];
      ps.analytic_blocking = erlang_b(loads[idx], ps.capacity);
      report.per_partition.push_back(ps);

      report.offered += tally.offered;
      report.admitted += tally.admitted;
      report.denied += tally.denied;
      const auto& cls = scenario_.classes[idx];
      total_rate += cls.arrival_rate;
      weighted_denial += cls.arrival_rate * cs.analytic_denial;
      total_occupancy_integral += occupancy_integral_[idx];
    }
    report.analytic_overall_denial = total_rate > 0.0 ? weighted_denial / total_rate : 0.0;
    report.mean_free_ports =
        scenario_.plan.total_capacity() - total_occupancy_integral / window;
    report.blocking = overall_blocking(report.denied, report.offered);
    return report;
  }

  // Overall blocking interval. Long runs use batch means over the measurement
  // window: within-run blocking indicators are autocorrelated, so a Wilson
  // interval on the raw counts would be too narrow. Short runs fall back to
  // Wilson.
  std::optional<BlockingEstimate> overall_blocking(std::uint64_t denied,
                                                   std::uint64_t offered) const {
    auto estimate = blocking_estimate(denied, offered);
    if (!estimate) return estimate;
    std::vector<double> batch_means;
    for (int b = 0; b < kBatchCount; ++b) {
      if (batch_offered_[static_cast<std::size_t>(b)] == 0) continue;
      batch_means.push_back(static_cast<double>(batch_denied_[static_cast<std::size_t>(b)]) /
                            static_cast<double>(batch_offered_[static_cast<std::size_t>(b)]));
    }
    if (batch_means.size() < kMinBatchesForCi || offered < kMinOfferedForBatchCi)
      return estimate;
    const Interval iv = t_interval(batch_means);
    const double hw = iv.half_width();
    estimate->ci_low = std::max(0.0, estimate->estimate - hw);
    estimate->ci_high = std::min(1.0, estimate->estimate + hw);
    estimate->method = CiMethod::batch_means;
    return estimate;
  }

  Scenario scenario_;
  ServerState state_;
  Rng hold_rng_;
  Rng title_rng_;
  std::vector<Rng> class_rngs_;
  EventObserver observer_;
  bool ran_ = false;

  std::priority_queue<Departure, std::vector<Departure>, DepartureLater> departures_;
  std::vector<ClassTally> per_class_;
  std::vector<std::uint64_t> partition_admitted_;
  std::vector<double> occupancy_integral_;
  std::vector<double> full_time_;
  std::vector<double> last_update_;
  std::vector<TrajectoryPoint> series_;
  std::size_t grid_index_ = 0;
  double measurement_start_ = 0.0;
  double batch_length_ = 0.0;
  std::vector<std::uint64_t> batch_offered_;
  std::vector<std::uint64_t> batch_denied_;
  std::uint64_t popular_offered_ = 0;
  std::uint64_t unpopular_offered_ = 0;
};

/// Convenience wrapper: one full run of the scenario.
inline MetricsReport run(const Scenario& scenario) { return Simulation(scenario).run(); }

}  // namespace vodsim

#endif  // VODSIM_ENGINE_HPP
