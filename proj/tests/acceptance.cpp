// Acceptance suite: one check per release criterion, each printed as a
// [PASS]/[FAIL] line with its measured runtime. Returns the number of failed
// criteria. Run a single criterion with --criterion N.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vodsim/vodsim.hpp"

using namespace vodsim;

namespace {

struct CriterionResult {
  bool pass = false;
  std::string detail;
};

long double erlang_b_direct(long double erlangs, int ports) {
  long double term = 1.0L, sum = 1.0L;
  for (int j = 1; j <= ports; ++j) {
    term *= erlangs / static_cast<long double>(j);
    sum += term;
  }
  return term / sum;
}

std::string fmt(const char* format, ...) {
  va_list args;
  va_start(args, format);
  char buf[256];
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------------------
// C1: Erlang-B recurrence matches extended-precision direct summation.
CriterionResult criterion1() {
  double worst = 0.0;
  for (double e : {0.1, 1.0, 5.0, 10.0, 50.0, 100.0}) {
    for (int c : {1, 2, 5, 10, 50, 100, 200}) {
      const double reference = static_cast<double>(erlang_b_direct(e, c));
      const double got = erlang_b(e, c);
      const double rel = std::abs(got - reference) / reference;
      worst = std::max(worst, rel);
    }
  }
  return {worst < 1e-12, fmt("max relative error %.2e over 42 (E,c) pairs", worst)};
}

// ---------------------------------------------------------------------------
// C2: Zipf pmf normalization up to N = 10^6 and the exact complement identity.
CriterionResult criterion2() {
  double worst = 0.0;
  for (int n : {10, 1000, 100000, 1000000}) {
    for (double a : {0.2, 0.5, 0.8}) {
      const ZipfPopularity pop(n, std::max(1, n / 10), a);
      double sum = 0.0, comp = 0.0;
      for (int i = 1; i <= n; ++i) {
        const double y = pop.pmf(i) - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
      }
      worst = std::max(worst, std::abs(sum - 1.0));
    }
  }
  bool identity = true;
  for (int m : {1, 7, 50, 333, 1000}) {
    for (double a : {0.05, 0.3, 0.5, 0.7, 0.95}) {
      const ZipfPopularity pop(1000, m, a);
      if (pop.unpopular_request_probability() + pop.cumulative_popularity_approx() != 1.0)
        identity = false;
    }
  }
  return {worst < 1e-12 && identity,
          fmt("max |pmf sum - 1| = %.2e; complement identity %s", worst,
              identity ? "exact" : "VIOLATED")};
}

// ---------------------------------------------------------------------------
// C3: single-partition M/M/10/10 at 5 erlangs reproduces Erlang-B, and the
// per-run 95% intervals cover the analytic value in >= 27 of 30 runs.
CriterionResult criterion3() {
  const double analytic = erlang_b(5.0, 10);
  const std::uint64_t master = 730081;
  std::uint64_t denied = 0, offered = 0;
  int covered = 0;
  bool enough = true;
  for (int r = 0; r < 30; ++r) {
    Scenario s{.id = "c3", .plan = PartitionPlan({10}),
               .classes = {{1, 5.0, SessionKind::steady, HoldLaw::exponential_mean(1.0)}}};
    s.horizon = 220000.0;
    s.seed = derive_seed(master, static_cast<std::uint64_t>(r));
    s.warmup_fraction = 0.01;
    s.trajectory_sample_interval = 0.0;
    const MetricsReport report = run(s);
    if (report.offered < 1000000) enough = false;
    offered += report.offered;
    denied += report.denied;
    if (report.blocking && report.blocking->contains(analytic)) ++covered;
  }
  const double pooled = static_cast<double>(denied) / static_cast<double>(offered);
  const double rel = std::abs(pooled - analytic) / analytic;
  return {enough && rel < 0.02 && covered >= 27,
          fmt("pooled %.6f vs analytic %.6f (rel %.3f%%); CI coverage %d/30%s",
              pooled, analytic, 100.0 * rel, covered,
              enough ? "" : "; OFFERED < 1e6")};
}

// ---------------------------------------------------------------------------
// C4: blocking is insensitive to the hold law at equal mean (uniform(0,240]
// vs exponential(120)).
CriterionResult criterion4() {
  auto make = [](HoldLaw law) {
    Scenario s{.id = "c4", .plan = PartitionPlan({10}),
               .classes = {{1, 5.0 / 120.0, SessionKind::steady, law}}};
    s.horizon = 26000000.0;
    s.seed = derive_seed(730084, 1);  // same seed: paired arrival streams
    s.warmup_fraction = 0.01;
    s.trajectory_sample_interval = 0.0;
    return s;
  };
  const MetricsReport uniform_run = run(make(HoldLaw::uniform_max(240.0)));
  const MetricsReport exp_run = run(make(HoldLaw::exponential_mean(120.0)));
  if (!uniform_run.blocking || !exp_run.blocking)
    return {false, "blocking undefined"};
  const double diff =
      std::abs(uniform_run.blocking->estimate - exp_run.blocking->estimate);
  const double allowance = uniform_run.blocking->width() / 2.0 +
                           exp_run.blocking->width() / 2.0;
  return {diff < allowance,
          fmt("uniform %.6f vs exponential %.6f; |diff| %.2e < combined CI %.2e",
              uniform_run.blocking->estimate, exp_run.blocking->estimate, diff,
              allowance)};
}

// ---------------------------------------------------------------------------
// C5: fig4 trend; free ports vanish past 200 req/s and decrease monotonically.
CriterionResult criterion5() {
  const FigurePreset preset = figure_preset("fig4");
  const PresetVariant& variant = preset.variants[0];
  const auto points = run_sweep(variant.base, variant.sweep, preset.replications,
                                preset.seed);
  const double capacity = variant.base.plan.total_capacity();
  bool saturated = true, monotone = true;
  double worst_free = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].sweep_value > 200.0) {
      worst_free = std::max(worst_free, points[i].mean_free_ports);
      if (points[i].mean_free_ports >= 0.01 * capacity) saturated = false;
    }
    if (i > 0) {
      const double slack = points[i - 1].free_ports_ci.half_width() +
                           points[i].free_ports_ci.half_width();
      if (points[i].mean_free_ports > points[i - 1].mean_free_ports + slack)
        monotone = false;
    }
  }
  return {saturated && monotone,
          fmt("free ports at rate>200: max %.4f (< %.1f required); monotone %s",
              worst_free, 0.01 * capacity, monotone ? "yes" : "NO")};
}

// ---------------------------------------------------------------------------
// C6: fig5 trend; blocking exceeds 0.95 past 600 erlangs and never decreases.
CriterionResult criterion6() {
  const FigurePreset preset = figure_preset("fig5");
  const PresetVariant& variant = preset.variants[0];
  const auto points = run_sweep(variant.base, variant.sweep, preset.replications,
                                preset.seed);
  bool saturated = true, monotone = true;
  double worst_blocking = 1.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].mean_blocking) return {false, "blocking undefined at a sweep point"};
    if (points[i].traffic_intensity > 600.0) {
      worst_blocking = std::min(worst_blocking, *points[i].mean_blocking);
      if (*points[i].mean_blocking <= 0.95) saturated = false;
    }
    if (i > 0) {
      const double slack = points[i - 1].blocking_ci.half_width() +
                           points[i].blocking_ci.half_width();
      if (*points[i].mean_blocking < *points[i - 1].mean_blocking - slack)
        monotone = false;
    }
  }
  return {saturated && monotone,
          fmt("blocking past 600 erlangs: min %.4f (> 0.95 required); monotone %s",
              worst_blocking, monotone ? "yes" : "NO")};
}

// ---------------------------------------------------------------------------
// C7: fig6 ordering; 8-port partitions block at least as much as 10-port ones,
// strictly (outside overlapping CIs) wherever both exceed 0.01.
CriterionResult criterion7() {
  const FigurePreset preset = figure_preset("fig6");
  const auto ten = run_sweep(preset.variants[0].base, preset.variants[0].sweep,
                             preset.replications, preset.seed);
  const auto eight = run_sweep(preset.variants[1].base, preset.variants[1].sweep,
                               preset.replications, preset.seed);
  if (ten.size() != eight.size()) return {false, "sweep grids differ"};
  bool ordered = true, strict = true;
  int strict_points = 0;
  for (std::size_t i = 0; i < ten.size(); ++i) {
    if (!ten[i].mean_blocking || !eight[i].mean_blocking)
      return {false, "blocking undefined at a sweep point"};
    const double b10 = *ten[i].mean_blocking;
    const double b8 = *eight[i].mean_blocking;
    if (b8 + eight[i].blocking_ci.half_width() <
        b10 - ten[i].blocking_ci.half_width())
      ordered = false;  // significantly reversed
    if (b10 > 0.01 && b8 > 0.01) {
      ++strict_points;
      if (eight[i].blocking_ci.low <= ten[i].blocking_ci.high) strict = false;
    }
  }
  return {ordered && strict && strict_points > 0,
          fmt("ordering holds at %zu points; strict separation at %d qualifying points %s",
              ten.size(), strict_points,
              (strict && strict_points > 0) ? "confirmed" : "VIOLATED")};
}

// ---------------------------------------------------------------------------
// C8: fig7 linearity; intensity output is a line through the origin.
CriterionResult criterion8() {
  const FigurePreset preset = figure_preset("fig7");
  const PresetVariant& variant = preset.variants[0];
  std::vector<double> xs = variant.sweep.values();
  double sxy = 0.0, sxx = 0.0;
  std::vector<double> ys;
  for (double x : xs) {
    const Scenario swept = apply_sweep(variant.base, variant.sweep.parameter, x);
    const double y = traffic_intensity(swept.classes);
    ys.push_back(y);
    sxy += x * y;
    sxx += x * x;
  }
  const double slope = sxy / sxx;
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    worst = std::max(worst, std::abs(ys[i] - slope * xs[i]));
  return {worst < 1e-9,
          fmt("slope %.6f erlangs per req/s; max residual %.2e", slope, worst)};
}

// ---------------------------------------------------------------------------
// C9: cascade consistency and the routed-availability reduction.
CriterionResult criterion9() {
  const PartitionPlan plan({10, 7, 3});
  const std::vector<double> loads{5.0, 2.5, 9.0};
  bool ok = true;
  for (int j = 1; j <= 3; ++j) {
    if (cascade_block_probability(loads, plan, j, j + 1) !=
        erlang_b(loads[static_cast<std::size_t>(j - 1)], plan.capacity(j)))
      ok = false;
    if (cascade_block_probability(loads, plan, j, j) != 1.0) ok = false;
  }
  double worst = 0.0;
  for (int k : {1, 2, 4, 20, 25}) {
    for (int c : {1, 8, 10}) {
      for (int q = 0; q <= c; ++q) {
        const double general = routed_availability(1, k, c, q);
        const double reduced = (1.0 / k) * (static_cast<double>(c - q) / c);
        worst = std::max(worst, std::abs(general - reduced));
      }
    }
  }
  return {ok && worst <= 1e-15,
          fmt("single-range products bit-exact %s; j=1 reduction max |diff| %.1e",
              ok ? "yes" : "NO", worst)};
}

// ---------------------------------------------------------------------------
// C10: engine invariants on 1000 randomized small scenarios.
CriterionResult criterion10() {
  std::mt19937_64 gen(202608);
  auto pick_int = [&](int lo, int hi) {
    return lo + static_cast<int>(gen() % static_cast<std::uint64_t>(hi - lo + 1));
  };
  auto pick_real = [&](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(gen() >> 11) * 0x1.0p-53);
  };

  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
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
    Scenario s{.id = "c10", .plan = PartitionPlan(caps), .classes = classes};
    s.horizon = pick_real(10.0, 100.0);
    s.seed = gen();
    s.warmup_fraction = pick_int(0, 1) ? 0.1 : 0.0;
    s.cascade_policy = pick_int(0, 1) ? CascadePolicy::forward_wrap
                                      : CascadePolicy::forward_no_wrap;
    s.trajectory_sample_interval = 0.0;
    if (pick_int(0, 3) == 0) s.popularity.emplace(pick_int(1, 50), 1, 0.7);

    Simulation sim(s);
    bool bounds_ok = true;
    sim.set_observer([&](const EventRecord&, const ServerState& state) {
      int total = 0;
      for (int j = 1; j <= s.plan.partition_count(); ++j) {
        const int q = state.occupancy().occupied(j);
        if (q < 0 || q > s.plan.capacity(j)) bounds_ok = false;
        total += q;
      }
      if (total != state.occupancy().total_occupied() ||
          static_cast<std::size_t>(total) != state.in_service_count())
        bounds_ok = false;
    });
    const MetricsReport report = sim.run();
    if (!bounds_ok) ++violations;
    if (report.offered != report.admitted + report.denied) ++violations;
    for (const auto& c : report.per_class)
      if (c.offered != c.admitted + c.denied) ++violations;
    sim.drain();
    if (sim.state().occupancy().total_occupied() != 0 ||
        sim.state().in_service_count() != 0)
      ++violations;
    if (run(s).to_json().dump() != report.to_json().dump()) ++violations;
  }
  return {violations == 0, fmt("%d violations across 1000 scenarios", violations)};
}

struct Criterion {
  int number;
  const char* name;
  double budget_seconds;  // 0 = no budget
  CriterionResult (*fn)();
};

const Criterion kCriteria[] = {
    {1, "Erlang-B recurrence vs direct summation", 1.0, criterion1},
    {2, "Zipf normalization and complement identity", 5.0, criterion2},
    {3, "M/M/10/10 blocking vs Erlang-B with CI coverage", 120.0, criterion3},
    {4, "hold-law insensitivity at equal mean", 120.0, criterion4},
    {5, "fig4 trend: free ports approach zero", 300.0, criterion5},
    {6, "fig5 trend: blocking approaches one", 300.0, criterion6},
    {7, "fig6 ordering: fewer ports block more", 300.0, criterion7},
    {8, "fig7 linearity of traffic intensity", 1.0, criterion8},
    {9, "cascade and routed-availability consistency", 0.0, criterion9},
    {10, "engine invariants on randomized scenarios", 120.0, criterion10},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (std::strcmp(argv[i], "--list") == 0) {
      for (const auto& c : kCriteria)
        std::printf("C%d: %s\n", c.number, c.name);
      return 0;
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N | --list]\n", argv[0]);
      return 64;
    }
  }

  int failures = 0;
  for (const auto& criterion : kCriteria) {
    if (only != 0 && criterion.number != only) continue;
    const auto start = std::chrono::steady_clock::now();
    const CriterionResult result = criterion.fn();
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = criterion.budget_seconds <= 0.0 ||
                           seconds < criterion.budget_seconds;
    const bool pass = result.pass && in_budget;
    std::printf("[%s] C%d: %s — %s (%.2f s%s)\n", pass ? "PASS" : "FAIL",
                criterion.number, criterion.name, result.detail.c_str(), seconds,
                in_budget ? "" : ", OVER BUDGET");
    std::fflush(stdout);
    if (!pass) ++failures;
  }
  return failures;
}
