#ifndef VODSIM_CONFIG_HPP
#define VODSIM_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vodsim/engine.hpp"

namespace vodsim {

/// Configuration problem with the offending field spelled out, so the CLI can
/// point at it. Distinct from runtime failures (exit code 1 vs 2).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Parameter sweep over scenario load: either an explicit point list or an
/// inclusive start/stop/step range.
struct SweepSpec {
  std::string parameter;         // per_class_rate | aggregate_rate | rate_scale
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;
  std::vector<double> points;    // used when nonempty

  std::vector<double> values() const {
    if (!points.empty()) return points;
    std::vector<double> out;
    const auto count = static_cast<std::size_t>((stop - start) / step + 1e-9) + 1;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
      out.push_back(start + static_cast<double>(i) * step);
    return out;
  }

  void validate() const {
    if (parameter != "per_class_rate" && parameter != "aggregate_rate" &&
        parameter != "rate_scale")
      throw ConfigError("sweep.parameter",
                        "unknown parameter '" + parameter +
                            "' (expected per_class_rate, aggregate_rate or rate_scale)");
    if (!points.empty()) {
      for (double v : points)
        if (!(v >= 0.0)) throw ConfigError("sweep.points", "sweep values must be nonnegative");
      return;
    }
    if (!(start <= stop)) throw ConfigError("sweep.start", "start must not exceed stop");
    if (!(step > 0.0)) throw ConfigError("sweep.step", "step must be positive");
  }
};

/// File-backed scenario plus the experiment directives around it.
struct ScenarioConfig {
  Scenario scenario;
  std::optional<SweepSpec> sweep;
  int replications = 30;
  std::string output_dir = "out";

  void validate() const {
    scenario.validate();
    if (sweep) sweep->validate();
    if (replications < 1)
      throw ConfigError("replications", "at least one replication required");
  }
};

/// Applies one sweep value to a scenario: per_class_rate sets every class's
/// rate, aggregate_rate divides the total evenly, rate_scale multiplies the
/// configured base rates.
inline Scenario apply_sweep(Scenario scenario, const std::string& parameter,
                            double value) {
  const auto k = static_cast<double>(scenario.plan.partition_count());
  for (auto& cls : scenario.classes) {
    if (parameter == "per_class_rate")
      cls.arrival_rate = value;
    else if (parameter == "aggregate_rate")
      cls.arrival_rate = value / k;
    else if (parameter == "rate_scale")
      cls.arrival_rate *= value;
    else
      throw ConfigError("sweep.parameter", "unknown parameter '" + parameter + "'");
  }
  return scenario;
}

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j,
                                           const std::string& path,
                                           const char* name) {
  const auto it = j.find(name);
  if (it == j.end()) throw ConfigError(path + name, "missing required field");
  return *it;
}

inline double as_number(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where, "expected a number");
  return j.get<double>();
}

inline HoldLaw hold_law_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  const std::string law = require_field(j, where + ".", "law").get<std::string>();
  if (law == "uniform")
    return HoldLaw::uniform_max(as_number(require_field(j, where + ".", "max"), where + ".max"));
  if (law == "exponential")
    return HoldLaw::exponential_mean(as_number(require_field(j, where + ".", "mean"), where + ".mean"));
  if (law == "constant")
    return HoldLaw::constant_value(as_number(require_field(j, where + ".", "value"), where + ".value"));
  throw ConfigError(where + ".law", "unknown hold law '" + law + "'");
}

inline nlohmann::json hold_law_to_json(const HoldLaw& law) {
  switch (law.kind) {
    case HoldLaw::Kind::uniform: return {{"law", "uniform"}, {"max", law.param}};
    case HoldLaw::Kind::exponential: return {{"law", "exponential"}, {"mean", law.param}};
    case HoldLaw::Kind::constant: return {{"law", "constant"}, {"value", law.param}};
  }
  return {};
}

}  // namespace detail

inline Scenario scenario_from_json(const nlohmann::json& j) {
  using detail::require_field;
  if (!j.is_object()) throw ConfigError("scenario", "expected an object");

  const auto& partitions = require_field(j, "scenario.", "partitions");
  if (!partitions.is_array() || partitions.empty())
    throw ConfigError("scenario.partitions", "expected a nonempty array of port counts");
  std::vector<int> capacities;
  for (const auto& c : partitions) {
    if (!c.is_number_integer() || c.get<int>() < 1)
      throw ConfigError("scenario.partitions", "port counts must be positive integers");
    capacities.push_back(c.get<int>());
  }

  const auto& classes_json = require_field(j, "scenario.", "classes");
  if (!classes_json.is_array())
    throw ConfigError("scenario.classes", "expected an array with one class per partition");
  if (classes_json.size() != capacities.size())
    throw ConfigError("scenario.classes",
                      "expected " + std::to_string(capacities.size()) +
                          " classes (one per partition), got " +
                          std::to_string(classes_json.size()));

  std::vector<TrafficClass> classes;
  int id = 1;
  for (const auto& cj : classes_json) {
    const std::string where = "scenario.classes[" + std::to_string(id - 1) + "]";
    if (!cj.is_object()) throw ConfigError(where, "expected an object");
    TrafficClass cls;
    cls.class_id = id++;
    cls.arrival_rate = detail::as_number(require_field(cj, where + ".", "rate"), where + ".rate");
    if (cls.arrival_rate < 0.0) throw ConfigError(where + ".rate", "rate must be nonnegative");
    std::string session = cj.value("session", "steady");
    if (session == "steady")
      cls.session_kind = SessionKind::steady;
    else if (session == "interactive")
      cls.session_kind = SessionKind::interactive;
    else
      throw ConfigError(where + ".session", "expected 'steady' or 'interactive'");
    if (cj.contains("hold"))
      cls.hold_law = detail::hold_law_from_json(cj["hold"], where + ".hold");
    else
      cls.hold_law = HoldLaw::uniform_max(cls.session_kind == SessionKind::steady ? 120.0 : 80.0);
    classes.push_back(cls);
  }

  Scenario scenario{.id = j.value("id", ""),
                    .plan = PartitionPlan(capacities),
                    .classes = std::move(classes)};
  scenario.horizon = j.value("horizon", 400.0);
  scenario.seed = j.value("seed", std::uint64_t{1});
  scenario.warmup_fraction = j.value("warmup_fraction", 0.1);
  scenario.trajectory_sample_interval = j.value("trajectory_sample_interval", 1.0);

  const std::string policy = j.value("cascade_policy", "forward-no-wrap");
  if (policy == "forward-no-wrap")
    scenario.cascade_policy = CascadePolicy::forward_no_wrap;
  else if (policy == "forward-wrap")
    scenario.cascade_policy = CascadePolicy::forward_wrap;
  else
    throw ConfigError("scenario.cascade_policy",
                      "expected 'forward-no-wrap' or 'forward-wrap'");

  if (j.contains("popularity")) {
    const auto& pj = j["popularity"];
    if (!pj.is_object()) throw ConfigError("scenario.popularity", "expected an object");
    const int titles = require_field(pj, "scenario.popularity.", "titles").get<int>();
    const int popular = require_field(pj, "scenario.popularity.", "popular").get<int>();
    const double skew =
        detail::as_number(require_field(pj, "scenario.popularity.", "skew"),
                          "scenario.popularity.skew");
    try {
      scenario.popularity.emplace(titles, popular, skew);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("scenario.popularity", e.what());
    }
    const std::string routing = pj.value("routing", "metadata-only");
    if (routing == "metadata-only")
      scenario.title_routing = TitleRouting::metadata_only;
    else if (routing == "home-by-title")
      scenario.title_routing = TitleRouting::home_by_title;
    else
      throw ConfigError("scenario.popularity.routing",
                        "expected 'metadata-only' or 'home-by-title'");
  }

  try {
    scenario.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("scenario", e.what());
  }
  return scenario;
}

inline nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json j;
  if (!s.id.empty()) j["id"] = s.id;
  j["partitions"] = s.plan.capacities();
  j["classes"] = nlohmann::json::array();
  for (const auto& c : s.classes) {
    j["classes"].push_back(
        {{"rate", c.arrival_rate},
         {"session", c.session_kind == SessionKind::steady ? "steady" : "interactive"},
         {"hold", detail::hold_law_to_json(c.hold_law)}});
  }
  j["horizon"] = s.horizon;
  j["seed"] = s.seed;
  j["warmup_fraction"] = s.warmup_fraction;
  j["trajectory_sample_interval"] = s.trajectory_sample_interval;
  j["cascade_policy"] = s.cascade_policy == CascadePolicy::forward_no_wrap
                            ? "forward-no-wrap"
                            : "forward-wrap";
  if (s.popularity) {
    j["popularity"] = {{"titles", s.popularity->total_titles()},
                       {"popular", s.popularity->popular_titles()},
                       {"skew", s.popularity->skew()},
                       {"routing", s.title_routing == TitleRouting::metadata_only
                                       ? "metadata-only"
                                       : "home-by-title"}};
  }
  return j;
}

inline ScenarioConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  ScenarioConfig config{.scenario = scenario_from_json(
      detail::require_field(j, "", "scenario"))};
  if (j.contains("sweep")) {
    const auto& sj = j["sweep"];
    if (!sj.is_object()) throw ConfigError("sweep", "expected an object");
    SweepSpec sweep;
    sweep.parameter = detail::require_field(sj, "sweep.", "parameter").get<std::string>();
    if (sj.contains("points")) {
      if (!sj["points"].is_array() || sj["points"].empty())
        throw ConfigError("sweep.points", "expected a nonempty array");
      for (const auto& p : sj["points"])
        sweep.points.push_back(detail::as_number(p, "sweep.points"));
    } else {
      sweep.start = detail::as_number(detail::require_field(sj, "sweep.", "start"), "sweep.start");
      sweep.stop = detail::as_number(detail::require_field(sj, "sweep.", "stop"), "sweep.stop");
      sweep.step = detail::as_number(detail::require_field(sj, "sweep.", "step"), "sweep.step");
    }
    sweep.validate();
    config.sweep = std::move(sweep);
  }
  config.replications = j.value("replications", 30);
  config.output_dir = j.value("output_dir", "out");
  config.validate();
  return config;
}

/// Loads and validates a scenario/experiment configuration. Missing files,
/// malformed JSON, schema problems and invariant violations are reported as
/// ConfigError with the offending field named.
inline ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("file", "cannot open config file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("json", std::string("parse error: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace vodsim

#endif  // VODSIM_CONFIG_HPP
