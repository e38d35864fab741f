#ifndef VODSIM_EXPERIMENT_HPP
#define VODSIM_EXPERIMENT_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "vodsim/config.hpp"
#include "vodsim/engine.hpp"
#include "vodsim/metrics.hpp"
#include "vodsim/presets.hpp"

namespace vodsim {

/// Runs fn(0..count-1) across a worker pool. Tasks write only their own
/// result slot, so the outcome is independent of scheduling; the first worker
/// exception is rethrown after the join.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                         unsigned threads = 0) {
  if (count == 0) return;
  unsigned n = threads ? threads : std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  n = static_cast<unsigned>(std::min<std::size_t>(n, count));
  if (n <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(n);
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Aggregated replications of one sweep point.
struct SweepPointSummary {
  double sweep_value = 0.0;
  Scenario scenario;  // swept scenario; per-replication seeds applied at run time
  std::vector<MetricsReport> reps;

  std::uint64_t offered = 0;
  std::uint64_t admitted = 0;
  std::uint64_t denied = 0;
  std::optional<BlockingEstimate> pooled_blocking;  // Wilson on pooled counts

  // Across-replication statistics (t intervals on independent runs).
  std::optional<double> mean_blocking;
  Interval blocking_ci;
  double mean_free_ports = 0.0;
  Interval free_ports_ci;
  double traffic_intensity = 0.0;
};

namespace detail {

inline std::string sweep_point_id(const std::string& base, const std::string& parameter,
                                  double value) {
  return base + "[" + parameter + "=" + format_double(value) + "]";
}

inline SweepPointSummary summarize_point(double value, Scenario scenario,
                                         std::vector<MetricsReport> reps) {
  SweepPointSummary s{.sweep_value = value, .scenario = std::move(scenario)};
  s.traffic_intensity = traffic_intensity(s.scenario.classes);
  std::vector<double> blocking_values;
  std::vector<double> free_values;
  for (const auto& r : reps) {
    s.offered += r.offered;
    s.admitted += r.admitted;
    s.denied += r.denied;
    if (r.blocking) blocking_values.push_back(r.blocking->estimate);
    free_values.push_back(r.mean_free_ports);
  }
  s.pooled_blocking = blocking_estimate(s.denied, s.offered);
  if (!blocking_values.empty()) {
    const MeanVariance mv = mean_variance(blocking_values);
    s.mean_blocking = mv.mean;
    s.blocking_ci = t_interval(blocking_values);
  }
  if (!free_values.empty()) {
    s.mean_free_ports = mean_variance(free_values).mean;
    s.free_ports_ci = t_interval(free_values);
  }
  s.reps = std::move(reps);
  return s;
}

}  // namespace detail

/// Runs `replications` seeded repetitions of one scenario. Replication seeds
/// are derived from the master seed, so results are reproducible and
/// independent of execution order.
inline SweepPointSummary run_replicated(const Scenario& scenario, int replications,
                                        std::uint64_t master_seed, unsigned threads = 0) {
  std::vector<MetricsReport> reps(static_cast<std::size_t>(replications));
  parallel_for(
      reps.size(),
      [&](std::size_t r) {
        Scenario s = scenario;
        s.seed = derive_seed(master_seed, static_cast<std::uint64_t>(r));
        reps[r] = run(s);
      },
      threads);
  return detail::summarize_point(std::numeric_limits<double>::quiet_NaN(), scenario,
                                 std::move(reps));
}

/// Runs a sweep with replications. Points are executed in canonical order
/// (ascending sweep value); each (point, replication) pair has a derived seed
/// that does not depend on scheduling.
inline std::vector<SweepPointSummary> run_sweep(const Scenario& base,
                                                const SweepSpec& sweep,
                                                int replications,
                                                std::uint64_t master_seed,
                                                unsigned threads = 0) {
  std::vector<double> values = sweep.values();
  std::sort(values.begin(), values.end());
  const std::size_t points = values.size();
  const auto rep_count = static_cast<std::size_t>(replications);

  std::vector<Scenario> scenarios;
  scenarios.reserve(points);
  for (std::size_t p = 0; p < points; ++p) {
    Scenario s = apply_sweep(base, sweep.parameter, values[p]);
    s.id = detail::sweep_point_id(base.id, sweep.parameter, values[p]);
    scenarios.push_back(std::move(s));
  }

  std::vector<std::vector<MetricsReport>> reports(points);
  for (auto& r : reports) r.resize(rep_count);
  parallel_for(
      points * rep_count,
      [&](std::size_t task) {
        const std::size_t p = task / rep_count;
        const std::size_t r = task % rep_count;
        Scenario s = scenarios[p];
        s.seed = derive_seed(derive_seed(master_seed, p), r);
        reports[p][r] = run(s);
      },
      threads);

  std::vector<SweepPointSummary> out;
  out.reserve(points);
  for (std::size_t p = 0; p < points; ++p)
    out.push_back(detail::summarize_point(values[p], scenarios[p], std::move(reports[p])));
  return out;
}

/// Pools the replications of a point into one report with summed counts and
/// averaged time statistics, for the per-point CSV.
inline MetricsReport pooled_report(const SweepPointSummary& point) {
  MetricsReport pooled;
  pooled.scenario_id = point.scenario.id;
  pooled.horizon = point.scenario.horizon;
  pooled.measurement_start = point.scenario.warmup_fraction * point.scenario.horizon;
  pooled.traffic_intensity_erlangs = point.traffic_intensity;
  const std::size_t nreps = point.reps.size();
  if (nreps == 0) return pooled;
  pooled.seed = point.reps.front().seed;
  pooled.per_class = point.reps.front().per_class;
  pooled.per_partition = point.reps.front().per_partition;
  for (auto& c : pooled.per_class) c = ClassStats{.class_id = c.class_id,
                                                  .offered_erlangs = c.offered_erlangs,
                                                  .analytic_denial = c.analytic_denial};
  for (auto& p : pooled.per_partition) {
    p.admitted = 0;
    p.mean_occupancy = 0.0;
    p.fraction_time_full = 0.0;
  }
  for (const auto& r : point.reps) {
    for (std::size_t i = 0; i < r.per_class.size(); ++i) {
      pooled.per_class[i].offered += r.per_class[i].offered;
      pooled.per_class[i].admitted += r.per_class[i].admitted;
      pooled.per_class[i].denied += r.per_class[i].denied;
      pooled.per_class[i].home_blocked += r.per_class[i].home_blocked;
    }
    for (std::size_t j = 0; j < r.per_partition.size(); ++j) {
      pooled.per_partition[j].admitted += r.per_partition[j].admitted;
      pooled.per_partition[j].mean_occupancy += r.per_partition[j].mean_occupancy;
      pooled.per_partition[j].fraction_time_full += r.per_partition[j].fraction_time_full;
    }
    pooled.popular_offered += r.popular_offered;
    pooled.unpopular_offered += r.unpopular_offered;
    pooled.popularity_enabled = r.popularity_enabled;
    pooled.mean_free_ports += r.mean_free_ports;
    pooled.analytic_overall_denial = r.analytic_overall_denial;
  }
  for (auto& c : pooled.per_class) {
    c.blocking = blocking_estimate(c.denied, c.offered);
    pooled.offered += c.offered;
    pooled.admitted += c.admitted;
    pooled.denied += c.denied;
  }
  for (auto& p : pooled.per_partition) {
    p.mean_occupancy /= static_cast<double>(nreps);
    p.fraction_time_full /= static_cast<double>(nreps);
  }
  pooled.mean_free_ports /= static_cast<double>(nreps);
  pooled.blocking = blocking_estimate(pooled.denied, pooled.offered);
  return pooled;
}

enum class OutputFormat { csv, json };

struct RunOptions {
  std::filesystem::path out_dir = "out";
  OutputFormat format = OutputFormat::csv;
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
  std::optional<double> warmup_fraction;
  unsigned threads = 0;
};

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // '\n' only, byte-stable output
  if (!out) throw std::runtime_error("cannot write output file: " + path.string());
  return out;
}

inline double plot_x(const FigurePreset& preset, const SweepPointSummary& point) {
  return preset.x == PlotX::sweep_value ? point.sweep_value : point.traffic_intensity;
}

struct PlotRow {
  double x = 0.0;
  std::optional<double> y;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

inline PlotRow plot_row(const FigurePreset& preset, const SweepPointSummary& point) {
  PlotRow row;
  row.x = plot_x(preset, point);
  switch (preset.y) {
    case PlotY::blocking:
      if (point.mean_blocking) {
        row.y = *point.mean_blocking;
        row.ci_low = std::max(0.0, point.blocking_ci.low);
        row.ci_high = std::min(1.0, point.blocking_ci.high);
      }
      break;
    case PlotY::mean_free_ports:
      row.y = point.mean_free_ports;
      row.ci_low = point.free_ports_ci.low;
      row.ci_high = point.free_ports_ci.high;
      break;
    case PlotY::traffic_intensity:
      row.y = point.traffic_intensity;
      row.ci_low = *row.y;
      row.ci_high = *row.y;
      break;
  }
  return row;
}

inline void write_plot_csv(const std::filesystem::path& path,
                           const FigurePreset& preset,
                           const std::vector<SweepPointSummary>& points) {
  auto out = open_output(path);
  out << "x,y,ci_low,ci_high\n";
  for (const auto& point : points) {
    const PlotRow row = plot_row(preset, point);
    out << format_double(row.x) << ',';
    if (row.y)
      out << format_double(*row.y) << ',' << format_double(row.ci_low) << ','
          << format_double(row.ci_high);
    else
      out << ",,";
    out << '\n';
  }
}

inline std::string point_file_stem(const FigurePreset& preset,
                                   const PresetVariant& variant, std::size_t index) {
  std::string stem = preset.name;
  if (!variant.label.empty()) stem += "_" + variant.label;
  char suffix[16];
  std::snprintf(suffix, sizeof suffix, "_point%02zu", index);
  return stem + suffix;
}

inline nlohmann::json point_json(const SweepPointSummary& point) {
  nlohmann::json j;
  j["sweep_value"] = point.sweep_value;
  j["scenario_id"] = point.scenario.id;
  j["traffic_intensity_erlangs"] = point.traffic_intensity;
  j["pooled"] = {{"offered", point.offered},
                 {"admitted", point.admitted},
                 {"denied", point.denied},
                 {"blocking", to_json(point.pooled_blocking)}};
  if (point.mean_blocking)
    j["blocking_across_reps"] = {{"mean", *point.mean_blocking},
                                 {"ci_low", point.blocking_ci.low},
                                 {"ci_high", point.blocking_ci.high}};
  j["mean_free_ports"] = {{"mean", point.mean_free_ports},
                          {"ci_low", point.free_ports_ci.low},
                          {"ci_high", point.free_ports_ci.high}};
  j["replications"] = nlohmann::json::array();
  for (const auto& r : point.reps) j["replications"].push_back(r.to_json());
  return j;
}

}  // namespace detail

/// Executes a figure preset and writes its result files under out_dir:
/// a metadata JSON (axes, units, assumptions, scenarios), one plot-data CSV
/// per curve (x, y, ci_low, ci_high), and one result file per sweep point.
/// Returns the written file paths.
inline std::vector<std::filesystem::path> run_figure_preset(const FigurePreset& preset,
                                                            const RunOptions& options) {
  namespace fs = std::filesystem;
  FigurePreset p = preset;
  if (options.seed) p.seed = *options.seed;
  if (options.replications) p.replications = *options.replications;
  if (options.warmup_fraction)
    for (auto& v : p.variants) v.base.warmup_fraction = *options.warmup_fraction;

  std::error_code ec;
  fs::create_directories(options.out_dir, ec);

  std::vector<fs::path> written;
  nlohmann::json meta;
  meta["preset"] = p.name;
  meta["description"] = p.description;
  meta["axes"] = {{"x_label", p.x_label},
                  {"x_units", p.x_units},
                  {"y_label", p.y_label},
                  {"y_units", p.y_units}};
  meta["assumptions"] = p.assumptions;
  meta["replications"] = p.replications;
  meta["seed"] = p.seed;
  meta["variants"] = nlohmann::json::array();

  for (const auto& variant : p.variants) {
    std::vector<SweepPointSummary> points;
    if (p.simulate) {
      points = run_sweep(variant.base, variant.sweep, p.replications, p.seed,
                         options.threads);
    } else {
      // Closed-form presets evaluate the plotted quantity without running.
      std::vector<double> values = variant.sweep.values();
      std::sort(values.begin(), values.end());
      for (std::size_t i = 0; i < values.size(); ++i) {
        Scenario s = apply_sweep(variant.base, variant.sweep.parameter, values[i]);
        s.id = detail::sweep_point_id(variant.base.id, variant.sweep.parameter, values[i]);
        points.push_back(detail::summarize_point(values[i], std::move(s), {}));
      }
    }

    std::string stem = p.name;
    if (!variant.label.empty()) stem += "_" + variant.label;
    const fs::path plot_path = options.out_dir / (stem + "_plot.csv");
    detail::write_plot_csv(plot_path, p, points);
    written.push_back(plot_path);

    for (std::size_t i = 0; i < points.size(); ++i) {
      const std::string point_stem = detail::point_file_stem(p, variant, i);
      if (options.format == OutputFormat::csv) {
        const fs::path path = options.out_dir / (point_stem + ".csv");
        auto out = detail::open_output(path);
        pooled_report(points[i]).write_csv(out);
        written.push_back(path);
      } else {
        const fs::path path = options.out_dir / (point_stem + ".json");
        auto out = detail::open_output(path);
        out << detail::point_json(points[i]).dump(2) << '\n';
        written.push_back(path);
      }
    }

    nlohmann::json vj;
    vj["label"] = variant.label;
    vj["scenario"] = scenario_to_json(variant.base);
    vj["sweep"] = {{"parameter", variant.sweep.parameter},
                   {"points", variant.sweep.values()}};
    meta["variants"].push_back(vj);
  }

  const fs::path meta_path = options.out_dir / (p.name + "_meta.json");
  auto out = detail::open_output(meta_path);
  out << meta.dump(2) << '\n';
  written.push_back(meta_path);
  return written;
}

/// One line of the analytic-vs-simulation comparison table.
struct CompareRow {
  std::string label;
  std::uint64_t offered = 0;
  std::uint64_t events = 0;  // denials or home-blocks
  std::optional<BlockingEstimate> simulated;
  double analytic = 0.0;
  bool approximation = false;  // analytic side assumes independent overflow
  bool agree = false;
};

struct CompareReport {
  std::vector<CompareRow> partitions;  // home blocking vs Erlang-B
  std::vector<CompareRow> classes;     // end-to-end denial vs cascade product

  void render(std::ostream& out) const {
    auto print_rows = [&](const std::vector<CompareRow>& rows) {
      for (const auto& row : rows) {
        out << "  " << std::left << std::setw(22) << row.label << std::right;
        if (row.simulated)
          out << " sim " << std::setw(9) << std::fixed << std::setprecision(6)
              << row.simulated->estimate << "  ci [" << std::setw(9)
              << row.simulated->ci_low << ", " << std::setw(9) << row.simulated->ci_high
              << "]";
        else
          out << " sim         - (" << row.events << "/" << row.offered << ")";
        out << "  analytic " << std::setw(9) << std::fixed << std::setprecision(6)
            << row.analytic;
        out << (row.agree ? "  [agree]" : "  [differs]");
        if (row.approximation) out << " (independence approximation)";
        out << '\n';
      }
    };
    out << "home-partition blocking vs Erlang-B:\n";
    print_rows(partitions);
    out << "end-to-end class denial vs cascade product:\n";
    print_rows(classes);
  }

  nlohmann::json to_json() const {
    auto rows_json = [](const std::vector<CompareRow>& rows) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& row : rows) {
        arr.push_back({{"label", row.label},
                       {"offered", row.offered},
                       {"events", row.events},
                       {"simulated", detail::to_json(row.simulated)},
                       {"analytic", row.analytic},
                       {"independence_approximation", row.approximation},
                       {"agree", row.agree}});
      }
      return arr;
    };
    return {{"partitions", rows_json(partitions)}, {"classes", rows_json(classes)}};
  }
};

/// Runs the scenario and tabulates simulated blocking against the analytic
/// predictions: per-partition home blocking against Erlang-B, per-class denial
/// against the cascade product. Agreement means the analytic value falls in
/// the pooled 95% interval (or both sides are exactly zero-event).
inline CompareReport compare_analytic(const Scenario& scenario, int replications = 30,
                                      unsigned threads = 0) {
  const SweepPointSummary summary =
      run_replicated(scenario, replications, scenario.seed, threads);
  const MetricsReport pooled = pooled_report(summary);
  const int k = scenario.plan.partition_count();

  CompareReport report;
  for (int j = 1; j <= k; ++j) {
    const auto& cls = pooled.per_class[static_cast<std::size_t>(j - 1)];
    const auto& part = pooled.per_partition[static_cast<std::size_t>(j - 1)];
    CompareRow row;
    row.label = "partition " + std::to_string(j) + " (c=" + std::to_string(part.capacity) + ")";
    row.offered = cls.offered;
    row.events = cls.home_blocked;
    row.simulated = blocking_estimate(cls.home_blocked, cls.offered);
    row.analytic = part.analytic_blocking;
    row.approximation = false;
    row.agree = row.simulated ? row.simulated->ci_low <= row.analytic &&
                                    row.analytic <= row.simulated->ci_high
                              : row.analytic == 0.0;
    report.partitions.push_back(std::move(row));
  }
  for (int i = 1; i <= k; ++i) {
    const auto& cls = pooled.per_class[static_cast<std::size_t>(i - 1)];
    CompareRow row;
    row.label = "class " + std::to_string(i);
    row.offered = cls.offered;
    row.events = cls.denied;
    row.simulated = blocking_estimate(cls.denied, cls.offered);
    row.analytic = cls.analytic_denial;
    row.approximation =
        scenario.cascade_policy == CascadePolicy::forward_wrap ? k > 1 : i < k;
    row.agree = row.simulated ? row.simulated->ci_low <= row.analytic &&
                                    row.analytic <= row.simulated->ci_high
                              : row.analytic == 0.0;
    report.classes.push_back(std::move(row));
  }
  return report;
}

}  // namespace vodsim

#endif  // VODSIM_EXPERIMENT_HPP
