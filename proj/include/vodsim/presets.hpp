#ifndef VODSIM_PRESETS_HPP
#define VODSIM_PRESETS_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "vodsim/config.hpp"
#include "vodsim/engine.hpp"

namespace vodsim {

/// What a preset plots on each axis.
enum class PlotX { sweep_value, traffic_intensity };
enum class PlotY { blocking, mean_free_ports, traffic_intensity };

/// One curve of a figure: a base scenario and the sweep that produces it.
struct PresetVariant {
  std::string label;  // empty for single-curve figures
  Scenario base;
  SweepSpec sweep;
};

/// A reproducible experiment behind one of the report figures: sweep, axes,
/// units, and the workload assumptions baked into it.
struct FigurePreset {
  std::string name;
  std::string description;
  PlotX x = PlotX::sweep_value;
  PlotY y = PlotY::blocking;
  std::string x_label;
  std::string x_units;
  std::string y_label;
  std::string y_units;
  std::vector<std::string> assumptions;
  std::vector<PresetVariant> variants;
  int replications = 30;
  std::uint64_t seed = 0;
  bool simulate = true;  // false when y is a closed-form quantity
};

namespace detail {

inline Scenario uniform_plan_scenario(const std::string& id, int partitions,
                                      int ports_each) {
  std::vector<TrafficClass> classes;
  classes.reserve(static_cast<std::size_t>(partitions));
  for (int i = 1; i <= partitions; ++i)
    classes.push_back(TrafficClass::steady(i, 0.0));
  Scenario s{.id = id,
             .plan = PartitionPlan(std::vector<int>(
                 static_cast<std::size_t>(partitions), ports_each)),
             .classes = std::move(classes)};
  s.horizon = 400.0;
  s.warmup_fraction = 0.1;
  s.trajectory_sample_interval = 0.0;  // aggregates only; series not plotted
  return s;
}

inline SweepSpec sweep_points(const std::string& parameter, std::vector<double> points) {
  SweepSpec s;
  s.parameter = parameter;
  s.points = std::move(points);
  return s;
}

}  // namespace detail

inline std::vector<std::string> preset_names() {
  return {"fig2", "fig3", "fig4", "fig5", "fig6", "fig7"};
}

/// The named experiment presets. The server is 20 partitions of 10 ports
/// (fig6 overlays a second 8-port build); classes are steady sessions with
/// uniform (0, 120] holds; rates are swept as documented per figure.
inline FigurePreset figure_preset(const std::string& name) {
  using detail::sweep_points;
  using detail::uniform_plan_scenario;

  FigurePreset p;
  p.name = name;
  if (name == "fig2") {
    p.description = "blocking probability vs per-class arrival rate";
    p.x = PlotX::sweep_value;
    p.y = PlotY::blocking;
    p.x_label = "arrival rate";
    p.x_units = "requests/s per class";
    p.y_label = "blocking probability";
    p.y_units = "probability";
    p.assumptions = {"swept rates are interpreted as per-class requests per second"};
    p.seed = 1102;
    p.variants = {{"", uniform_plan_scenario("fig2", 20, 10),
                   sweep_points("per_class_rate", {1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0})}};
  } else if (name == "fig3") {
    p.description = "blocking probability vs offered traffic intensity";
    p.x = PlotX::traffic_intensity;
    p.y = PlotY::blocking;
    p.x_label = "traffic intensity";
    p.x_units = "erlangs";
    p.y_label = "blocking probability";
    p.y_units = "probability";
    p.assumptions = {"traffic intensity is offered load in Erlangs (sum of rate x mean hold)"};
    p.seed = 1103;
    p.variants = {{"", uniform_plan_scenario("fig3", 20, 10),
                   sweep_points("per_class_rate", {1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0})}};
  } else if (name == "fig4") {
    p.description = "mean free ports vs aggregate arrival rate";
    p.x = PlotX::sweep_value;
    p.y = PlotY::mean_free_ports;
    p.x_label = "aggregate arrival rate";
    p.x_units = "requests/s";
    p.y_label = "available free ports";
    p.y_units = "ports";
    p.assumptions = {"aggregate rate is split evenly across the 20 classes"};
    p.seed = 1104;
    p.variants = {{"", uniform_plan_scenario("fig4", 20, 10),
                   sweep_points("aggregate_rate",
                                {1.0, 2.0, 5.0, 10.0, 25.0, 50.0, 100.0, 150.0, 200.0, 250.0, 300.0})}};
  } else if (name == "fig5") {
    p.description = "blocking probability vs offered load";
    p.x = PlotX::traffic_intensity;
    p.y = PlotY::blocking;
    p.x_label = "traffic load";
    p.x_units = "erlangs";
    p.y_label = "blocking probability";
    p.y_units = "probability";
    p.assumptions = {
        "aggregate rate is split evenly across the 20 classes",
        "high-load points are spaced so every point past 600 erlangs is deep in saturation"};
    p.seed = 1105;
    p.variants = {{"", uniform_plan_scenario("fig5", 20, 10),
                   sweep_points("aggregate_rate",
                                {1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 80.0, 150.0, 225.0, 300.0})}};
  } else if (name == "fig6") {
    p.description = "blocking probability vs offered load, 10-port vs 8-port partitions";
    p.x = PlotX::traffic_intensity;
    p.y = PlotY::blocking;
    p.x_label = "traffic load";
    p.x_units = "erlangs";
    p.y_label = "blocking probability";
    p.y_units = "probability";
    p.assumptions = {"aggregate rate is split evenly across the 20 classes",
                     "both builds share sweep points and replication seeds"};
    p.seed = 1106;
    const SweepSpec sweep = sweep_points(
        "aggregate_rate", {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 8.0});
    p.variants = {{"ports10", uniform_plan_scenario("fig6-ports10", 20, 10), sweep},
                  {"ports8", uniform_plan_scenario("fig6-ports8", 20, 8), sweep}};
  } else if (name == "fig7") {
    p.description = "traffic intensity vs per-class arrival rate";
    p.x = PlotX::sweep_value;
    p.y = PlotY::traffic_intensity;
    p.x_label = "arrival rate";
    p.x_units = "requests/s per class";
    p.y_label = "traffic intensity";
    p.y_units = "erlangs";
    p.assumptions = {"intensity is the closed-form sum of rate x mean hold; no simulation involved"};
    p.seed = 1107;
    p.simulate = false;
    p.replications = 1;
    p.variants = {{"", uniform_plan_scenario("fig7", 20, 10),
                   sweep_points("per_class_rate", {1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0})}};
  } else {
    throw ConfigError("preset", "unknown preset '" + name + "' (expected fig2..fig7)");
  }
  return p;
}

}  // namespace vodsim

#endif  // VODSIM_PRESETS_HPP
