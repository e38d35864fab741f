// Builds a four-partition scenario in code, runs it once, and prints the
// simulated vs analytic comparison.

#include <iostream>

#include "vodsim/engine.hpp"
#include "vodsim/experiment.hpp"

int main() {
  using namespace vodsim;

  Scenario scenario{
      .id = "minimal",
      .plan = PartitionPlan({10, 10, 10, 10}),
      .classes = {TrafficClass::steady(1, 0.12), TrafficClass::steady(2, 0.12),
                  TrafficClass::interactive(3, 0.15), TrafficClass::interactive(4, 0.15)}};
  scenario.horizon = 400.0;
  scenario.seed = 7;

  const MetricsReport report = run(scenario);
  std::cout << "offered " << report.offered << ", admitted " << report.admitted
            << ", denied " << report.denied << "\n";
  if (report.blocking)
    std::cout << "overall blocking " << report.blocking->estimate << "\n";
  std::cout << "traffic intensity " << report.traffic_intensity_erlangs
            << " erlangs\n\n";

  compare_analytic(scenario, 20).render(std::cout);
  return 0;
}
