// Prints a small Erlang-B blocking table and a forward-cascade example.

#include <cstdio>

#include "vodsim/analytic.hpp"

int main() {
  using namespace vodsim;

  std::printf("Erlang-B blocking probability B(E, c)\n");
  std::printf("%8s", "E \\ c");
  const int ports[] = {1, 2, 5, 8, 10, 20};
  for (int c : ports) std::printf("%12d", c);
  std::printf("\n");
  for (double e : {0.5, 1.0, 2.0, 5.0, 8.0, 12.0, 20.0}) {
    std::printf("%8.1f", e);
    for (int c : ports) std::printf("%12.6f", erlang_b(e, c));
    std::printf("\n");
  }

  const PartitionPlan plan({10, 10, 10, 10});
  const std::vector<double> loads{9.0, 9.0, 9.0, 9.0};
  std::printf("\nforward cascade over four 10-port partitions, 9 erlangs each\n");
  for (int home = 1; home <= 4; ++home)
    std::printf("  class %d end-to-end denial estimate: %.6f\n", home,
                end_to_end_denial(loads, plan, home));
  std::printf("  (independence approximation; overflow traffic is peaked)\n");
  return 0;
}
