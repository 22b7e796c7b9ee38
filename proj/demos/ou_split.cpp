// Stationary OU: the law of the shifted path barely moves, while the
// square-mean gap E|X(t+s) - X(t)|^2 stays near 2 sigma^2.
#include <cstdio>

#include "aalab/diagnostics/distribution.hpp"
#include "aalab/processes/ou.hpp"

using namespace aalab;

int main() {
  const auto ens = simulate_ou({1.0, 1.0}, TimeGrid{0.0, 0.1, 400}, 2000, 7);
  DiagnosticOptions opt;
  opt.atom_cap = 300;
  const std::vector<double> shifts{1.0, 5.0, 20.0};
  const auto curve = path_distribution_curve(ens, {5.0}, {3, 0.1}, shifts, opt);

  std::printf("shift  d_BL/floor  E|X(5+s)-X(5)|^2\n");
  const std::size_t base = 50;
  for (std::size_t i = 0; i < shifts.size(); ++i) {
    const std::size_t j = base + static_cast<std::size_t>(shifts[i] * 10.0 + 0.5);
    double gap = 0.0;
    for (std::size_t m = 0; m < ens.paths(); ++m) {
      const double d = ens.at(m, j) - ens.at(m, base);
      gap += d * d;
    }
    std::printf("%5.1f  %10.3f  %8.3f\n", shifts[i], curve.ratio[i], gap / static_cast<double>(ens.paths()));
  }
}
