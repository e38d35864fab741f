#ifndef VODSIM_TRAFFIC_HPP
#define VODSIM_TRAFFIC_HPP

#include <stdexcept>
#include <string>

#include "vodsim/rng.hpp"

namespace vodsim {

enum class SessionKind { steady, interactive };

/// Hold-time law for one traffic class. The default is uniform on
/// (0, max_hold], honoring the "holds the link for at most X seconds"
/// reading; exponential with a configurable mean enables exact M/M/c/c
/// comparison; constant is a convenience for hand-traceable setups.
struct HoldLaw {
  enum class Kind { uniform, exponential, constant };

  Kind kind = Kind::uniform;
  double param = 120.0;  // uniform: max hold; exponential: mean; constant: value

  static HoldLaw uniform_max(double max_hold) {
    require_positive(max_hold);
    return {Kind::uniform, max_hold};
  }
  static HoldLaw exponential_mean(double mean) {
    require_positive(mean);
    return {Kind::exponential, mean};
  }
  static HoldLaw constant_value(double value) {
    require_positive(value);
    return {Kind::constant, value};
  }

  double mean() const {
    switch (kind) {
      case Kind::uniform: return param / 2.0;
      case Kind::exponential: return param;
      case Kind::constant: return param;
    }
    return param;
  }

  bool operator==(const HoldLaw&) const = default;

 private:
  static void require_positive(double v) {
    if (!(v > 0.0)) throw std::invalid_argument("HoldLaw: parameter must be positive");
  }
};

/// One request class: Poisson arrivals at `arrival_rate` homed at partition
/// `class_id`, holding a port for a random duration under `hold_law`.
struct TrafficClass {
  int class_id = 1;
  double arrival_rate = 0.0;  // requests per second
  SessionKind session_kind = SessionKind::steady;
  HoldLaw hold_law = HoldLaw{};

  /// Steady playback session, holds a port for at most 120 s by default.
  static TrafficClass steady(int id, double rate, double max_hold = 120.0) {
    return {id, rate, SessionKind::steady, HoldLaw::uniform_max(max_hold)};
  }

  /// Interactive session, holds a port for at most 80 s by default.
  static TrafficClass interactive(int id, double rate, double max_hold = 80.0) {
    return {id, rate, SessionKind::interactive, HoldLaw::uniform_max(max_hold)};
  }

  void validate() const {
    if (class_id < 1)
      throw std::invalid_argument("TrafficClass: class_id must be >= 1");
    if (!(arrival_rate >= 0.0))
      throw std::invalid_argument("TrafficClass: arrival rate must be nonnegative");
    if (!(hold_law.param > 0.0))
      throw std::invalid_argument("TrafficClass: hold-law parameter must be positive");
  }

  bool operator==(const TrafficClass&) const = default;
};

/// Draws one hold time. Uniform yields a value in (0, max]; exponential a
/// strictly positive value with the configured mean.
inline double draw_hold_time(const TrafficClass& cls, Rng& rng) {
  switch (cls.hold_law.kind) {
    case HoldLaw::Kind::uniform: return cls.hold_law.param * rng.uniform_open01();
    case HoldLaw::Kind::exponential: return rng.exponential(cls.hold_law.param);
    case HoldLaw::Kind::constant: return cls.hold_law.param;
  }
  throw std::logic_error("draw_hold_time: unknown hold law");
}

}  // namespace vodsim

#endif  // VODSIM_TRAFFIC_HPP
