#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "vodsim/engine.hpp"

using namespace vodsim;

namespace {

Scenario single_partition(int ports, TrafficClass cls, double horizon,
                          std::uint64_t seed) {
  Scenario s{.id = "test", .plan = PartitionPlan({ports}), .classes = {cls}};
  s.horizon = horizon;
  s.seed = seed;
  s.warmup_fraction = 0.0;
  s.trajectory_sample_interval = 0.0;
  return s;
}

EventRecord arrival_at(double time, int class_id) {
  return {time, EventKind::arrival, class_id, 0, 0};
}

}  // namespace

TEST_CASE("scenario validation", "[engine]") {
  Scenario s{.id = "v", .plan = PartitionPlan({2, 2}),
             .classes = {TrafficClass::steady(1, 0.1)}};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);  // classes length != k
  s.classes.push_back(TrafficClass::steady(3, 0.1));     // wrong id
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.classes[1].class_id = 2;
  CHECK_NOTHROW(s.validate());
  s.horizon = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.horizon = 100.0;
  s.warmup_fraction = 1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.warmup_fraction = 0.1;
  s.title_routing = TitleRouting::home_by_title;  // needs a popularity model
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("arrival generation", "[engine]") {
  Rng rng(11);
  const auto none = generate_arrivals(TrafficClass::steady(1, 0.0), 100.0, rng);
  CHECK(none.empty());

  Rng a(77), b(77), c(78);
  const auto ea = generate_arrivals(TrafficClass::steady(2, 1.5), 500.0, a);
  const auto eb = generate_arrivals(TrafficClass::steady(2, 1.5), 500.0, b);
  const auto ec = generate_arrivals(TrafficClass::steady(2, 1.5), 500.0, c);
  CHECK(ea == eb);
  CHECK(ea != ec);
  REQUIRE_FALSE(ea.empty());
  for (std::size_t i = 0; i < ea.size(); ++i) {
    CHECK(ea[i].time > (i == 0 ? 0.0 : ea[i - 1].time));
    CHECK(ea[i].time <= 500.0);
    CHECK(ea[i].class_id == 2);
    CHECK(ea[i].kind == EventKind::arrival);
  }
}

TEST_CASE("arrival counts and gaps follow the exponential law", "[engine]") {
  Rng rng(20250101);
  const double rate = 2.0, horizon = 100000.0;
  const auto events = generate_arrivals(TrafficClass::steady(1, rate), horizon, rng);
  const double expected = rate * horizon;
  const double sigma = std::sqrt(expected);
  CHECK(std::abs(static_cast<double>(events.size()) - expected) < 3.0 * sigma);

  double gap_sum = events[0].time;
  for (std::size_t i = 1; i < events.size(); ++i)
    gap_sum += events[i].time - events[i - 1].time;
  const double mean_gap = gap_sum / static_cast<double>(events.size());
  CHECK_THAT(mean_gap, Catch::Matchers::WithinRel(0.5, 0.01));
}

TEST_CASE("hold-time laws", "[engine]") {
  Rng rng(5);
  const auto steady = TrafficClass::steady(1, 1.0);
  for (int i = 0; i < 100000; ++i) {
    const double h = draw_hold_time(steady, rng);
    CHECK(h > 0.0);
    CHECK(h <= 120.0);
  }

  TrafficClass exp_cls{1, 1.0, SessionKind::steady, HoldLaw::exponential_mean(120.0)};
  double sum = 0.0;
  Rng rng2(6);
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const double h = draw_hold_time(exp_cls, rng2);
    CHECK(h > 0.0);
    sum += h;
  }
  CHECK_THAT(sum / n, Catch::Matchers::WithinRel(120.0, 0.01));

  TrafficClass fixed{1, 1.0, SessionKind::steady, HoldLaw::constant_value(10.0)};
  Rng rng3(7);
  CHECK(draw_hold_time(fixed, rng3) == 10.0);

  Rng d1(8), d2(8);
  for (int i = 0; i < 1000; ++i)
    CHECK(draw_hold_time(exp_cls, d1) == draw_hold_time(exp_cls, d2));

  CHECK(HoldLaw::uniform_max(120.0).mean() == 60.0);
  CHECK(HoldLaw::exponential_mean(80.0).mean() == 80.0);
  CHECK_THROWS_AS(HoldLaw::uniform_max(0.0), std::invalid_argument);
}

TEST_CASE("admission scans forward from the home partition", "[engine]") {
  Scenario s{.id = "adm", .plan = PartitionPlan({1, 1, 1, 1}),
             .classes = {TrafficClass::steady(1, 0.1), TrafficClass::steady(2, 0.1),
                         TrafficClass::steady(3, 0.1), TrafficClass::steady(4, 0.1)}};
  s.warmup_fraction = 0.0;

  SECTION("empty server admits at home") {
    ServerState state(s.plan);
    auto got = admit({1.0, EventKind::arrival, 3, 1, 0}, state, s, 5.0);
    REQUIRE(got.has_value());
    CHECK(*got == 3);
    CHECK(state.occupancy().occupied(3) == 1);
    CHECK(state.in_service_count() == 1);
  }

  SECTION("full home forwards to the next block") {
    ServerState state(s.plan);
    state.begin_service(100, 2, 9.0);
    auto got = admit({1.0, EventKind::arrival, 2, 1, 0}, state, s, 5.0);
    REQUIRE(got.has_value());
    CHECK(*got == 3);
  }

  SECTION("exhausted scan denies and leaves the state untouched") {
    ServerState state(s.plan);
    state.begin_service(100, 3, 9.0);
    state.begin_service(101, 4, 9.0);
    const auto before = state.occupancy();
    auto got = admit({1.0, EventKind::arrival, 3, 1, 0}, state, s, 5.0);
    CHECK_FALSE(got.has_value());
    CHECK(state.occupancy() == before);
    CHECK(state.in_service_count() == 2);
  }

  SECTION("no wrap-around by default; wrap policy scans the full cycle") {
    ServerState state(s.plan);
    state.begin_service(100, 4, 9.0);
    auto got = admit({1.0, EventKind::arrival, 4, 1, 0}, state, s, 5.0);
    CHECK_FALSE(got.has_value());

    Scenario wrapped = s;
    wrapped.cascade_policy = CascadePolicy::forward_wrap;
    auto wrapped_got = admit({1.0, EventKind::arrival, 4, 2, 0}, state, wrapped, 5.0);
    REQUIRE(wrapped_got.has_value());
    CHECK(*wrapped_got == 1);
  }

  SECTION("non-arrival events are a contract violation") {
    ServerState state(s.plan);
    CHECK_THROWS_AS(admit({1.0, EventKind::departure, 1, 1, 0}, state, s, 5.0),
                    std::invalid_argument);
  }
}

TEST_CASE("release undoes admission", "[engine]") {
  const PartitionPlan plan({2, 2});
  ServerState state(plan);
  const auto before = state.occupancy();
  state.begin_service(7, 1, 3.0);
  release(7, state);
  CHECK(state.occupancy() == before);
  CHECK(state.in_service_count() == 0);
  CHECK_THROWS_AS(release(7, state), std::out_of_range);
  CHECK_THROWS_AS(release(999, state), std::out_of_range);

  // Interleaving never drives a partition below empty or past capacity.
  state.begin_service(1, 1, 1.0);
  state.begin_service(2, 1, 2.0);
  CHECK_THROWS_AS(state.begin_service(3, 1, 3.0), std::logic_error);
  release(1, state);
  release(2, state);
  CHECK(state.occupancy().total_occupied() == 0);
}

TEST_CASE("zero-rate scenario reports no offered traffic", "[engine]") {
  auto s = single_partition(2, TrafficClass::steady(1, 0.0), 400.0, 1);
  s.trajectory_sample_interval = 100.0;
  const auto report = run(s);
  CHECK(report.offered == 0);
  CHECK(report.admitted == 0);
  CHECK(report.denied == 0);
  CHECK_FALSE(report.blocking.has_value());
  CHECK_FALSE(report.per_class[0].blocking.has_value());
  REQUIRE(report.free_port_series.size() == 5);
  for (const auto& p : report.free_port_series) CHECK(p.free_ports == 2);
}

TEST_CASE("hand-traceable single-port run", "[engine]") {
  TrafficClass cls{1, 0.1, SessionKind::steady, HoldLaw::constant_value(10.0)};
  auto s = single_partition(1, cls, 20.0, 1);
  Simulation sim(s);
  const auto report = sim.run({arrival_at(1.0, 1), arrival_at(2.0, 1)});
  CHECK(report.offered == 2);
  CHECK(report.admitted == 1);
  CHECK(report.denied == 1);
  REQUIRE(report.blocking.has_value());
  CHECK(report.blocking->estimate == 0.5);
  CHECK(sim.state().occupancy().occupied(1) == 1);  // departs at t=11
  sim.drain();
  CHECK(sim.state().occupancy().total_occupied() == 0);
  CHECK(sim.state().in_service_count() == 0);
}

TEST_CASE("departures free ports before simultaneous arrivals", "[engine]") {
  TrafficClass cls{1, 0.1, SessionKind::steady, HoldLaw::constant_value(1.0)};
  auto s = single_partition(1, cls, 20.0, 1);
  Simulation sim(s);
  // First request departs at exactly 2.0; the arrival at 2.0 must see the
  // freed port.
  const auto report = sim.run({arrival_at(1.0, 1), arrival_at(2.0, 1)});
  CHECK(report.admitted == 2);
  CHECK(report.denied == 0);
}

TEST_CASE("injected arrivals are validated", "[engine]") {
  auto s = single_partition(1, TrafficClass::steady(1, 1.0), 10.0, 1);
  CHECK_THROWS_AS(Simulation(s).run({arrival_at(5.0, 1), arrival_at(4.0, 1)}),
                  std::invalid_argument);
  CHECK_THROWS_AS(Simulation(s).run({arrival_at(11.0, 1)}), std::invalid_argument);
  CHECK_THROWS_AS(Simulation(s).run({{1.0, EventKind::departure, 1, 0, 0}}),
                  std::invalid_argument);
}

TEST_CASE("warm-up discards the leading transient from the tallies", "[engine]") {
  TrafficClass cls{1, 0.1, SessionKind::steady, HoldLaw::constant_value(1.0)};
  auto s = single_partition(1, cls, 100.0, 1);
  s.warmup_fraction = 0.1;  // measurement starts at t = 10
  Simulation sim(s);
  const auto report = sim.run({arrival_at(5.0, 1), arrival_at(50.0, 1)});
  CHECK(report.offered == 1);
  CHECK(report.admitted == 1);
}

TEST_CASE("same seed reproduces the full report", "[engine]") {
  Scenario s{.id = "det", .plan = PartitionPlan({3, 2}),
             .classes = {TrafficClass::steady(1, 0.4), TrafficClass::interactive(2, 0.3)}};
  s.horizon = 500.0;
  s.seed = 424242;
  s.trajectory_sample_interval = 10.0;
  const auto a = run(s);
  const auto b = run(s);
  CHECK(a.to_json().dump() == b.to_json().dump());

  Scenario other = s;
  other.seed = 424243;
  CHECK(run(other).to_json().dump() != a.to_json().dump());
}

TEST_CASE("single partition tracks the loss-system blocking level", "[engine]") {
  TrafficClass cls{1, 5.0, SessionKind::steady, HoldLaw::exponential_mean(1.0)};
  auto s = single_partition(10, cls, 20000.0, 90210);
  s.warmup_fraction = 0.01;
  const auto report = run(s);
  REQUIRE(report.blocking.has_value());
  CHECK(report.offered > 90000);
  CHECK_THAT(report.blocking->estimate,
             Catch::Matchers::WithinRel(erlang_b(5.0, 10), 0.15));
  CHECK(report.per_partition[0].analytic_blocking == erlang_b(5.0, 10));
}

TEST_CASE("raising every rate does not lower blocking", "[engine]") {
  double low_denied = 0, low_offered = 0, high_denied = 0, high_offered = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    TrafficClass slow{1, 0.05, SessionKind::steady, HoldLaw::uniform_max(120.0)};
    auto a = single_partition(4, slow, 4000.0, seed);
    const auto ra = run(a);
    low_denied += static_cast<double>(ra.denied);
    low_offered += static_cast<double>(ra.offered);

    TrafficClass fast = slow;
    fast.arrival_rate = 0.1;
    auto b = single_partition(4, fast, 4000.0, seed);
    const auto rb = run(b);
    high_denied += static_cast<double>(rb.denied);
    high_offered += static_cast<double>(rb.offered);
  }
  CHECK(high_denied / high_offered > low_denied / low_offered);
}

TEST_CASE("title routing derives the home partition from the title", "[engine]") {
  Scenario s{.id = "titles", .plan = PartitionPlan({1, 1}),
             .classes = {TrafficClass::steady(1, 0.5), TrafficClass::steady(2, 0.5)}};
  s.popularity.emplace(8, 2, 0.7);
  s.title_routing = TitleRouting::home_by_title;
  s.warmup_fraction = 0.0;
  s.horizon = 200.0;
  s.seed = 31;

  EventRecord odd = arrival_at(1.0, 2);
  odd.title = 3;  // titles 1,3,5,7 home at partition 1
  CHECK(home_partition(odd, s) == 1);
  EventRecord even = arrival_at(1.0, 1);
  even.title = 8;
  CHECK(home_partition(even, s) == 2);

  s.title_routing = TitleRouting::metadata_only;
  CHECK(home_partition(odd, s) == 2);

  const auto report = run(s);
  CHECK(report.popularity_enabled);
  CHECK(report.popular_offered + report.unpopular_offered == report.offered);
  CHECK(report.popular_offered > 0);
}

TEST_CASE("invariants hold across randomized small scenarios", "[engine]") {
  std::mt19937_64 gen(987654321);
  auto pick_int = [&](int lo, int hi) {
    return lo + static_cast<int>(gen() % static_cast<std::uint64_t>(hi - lo + 1));
  };
  auto pick_real = [&](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(gen() >> 11) * 0x1.0p-53);
  };

  for (int trial = 0; trial < 100; ++trial) {
    const int k = pick_int(1, 4);
    std::vector<int> caps;
    std::vector<TrafficClass> classes;
    for (int j = 1; j <= k; ++j) {
      caps.push_back(pick_int(1, 4));
      TrafficClass cls{j, pick_real(0.0, 2.0), SessionKind::steady, HoldLaw{}};
      switch (pick_int(0, 2)) {
        case 0: cls.hold_law = HoldLaw::uniform_max(pick_real(1.0, 30.0)); break;
        case 1: cls.hold_law = HoldLaw::exponential_mean(pick_real(1.0, 30.0)); break;
        default: cls.hold_law = HoldLaw::constant_value(pick_real(1.0, 30.0)); break;
      }
      classes.push_back(cls);
    }
    Scenario s{.id = "prop", .plan = PartitionPlan(caps), .classes = classes};
    s.horizon = pick_real(10.0, 100.0);
    s.seed = gen();
    s.warmup_fraction = pick_int(0, 1) ? 0.1 : 0.0;
    s.cascade_policy = pick_int(0, 1) ? CascadePolicy::forward_wrap
                                      : CascadePolicy::forward_no_wrap;
    s.trajectory_sample_interval = 0.0;

    Simulation sim(s);
    bool bounds_ok = true;
    sim.set_observer([&](const EventRecord&, const ServerState& state) {
      int total = 0;
      for (int j = 1; j <= s.plan.partition_count(); ++j) {
        const int q = state.occupancy().occupied(j);
        if (q < 0 || q > s.plan.capacity(j)) bounds_ok = false;
        total += q;
      }
      if (total != state.occupancy().total_occupied()) bounds_ok = false;
      if (static_cast<std::size_t>(total) != state.in_service_count()) bounds_ok = false;
    });
    const auto report = sim.run();
    CHECK(bounds_ok);
    CHECK(report.offered == report.admitted + report.denied);
    for (const auto& c : report.per_class)
      CHECK(c.offered == c.admitted + c.denied);
    sim.drain();
    CHECK(sim.state().occupancy().total_occupied() == 0);
    CHECK(sim.state().in_service_count() == 0);
  }
}

TEST_CASE("run can only be invoked once per simulation", "[engine]") {
  auto s = single_partition(1, TrafficClass::steady(1, 0.1), 10.0, 1);
  Simulation sim(s);
  sim.run();
  CHECK_THROWS_AS(sim.run(), std::logic_error);
}
