// Almost periods of cos t + cos sqrt2 t, then the double-shift test on the
// Levitan function along returns 2 pi q with q a Pell denominator.
#include <cmath>
#include <iostream>

#include "aalab/recurrence/recurrence.hpp"

using namespace aalab;

int main() {
  const SampledFunction ap(catalog::ap2(1.0, std::sqrt(2.0)));
  const auto scan = almost_period_scan(ap, 0.1, {-20.0, 20.0}, 200.0, 0.01);
  std::cout << "AP2: " << scan.shifts.size() << " almost periods in [0, 200], max gap " << scan.max_gap << '\n';

  std::vector<double> shifts;
  for (double q : {70.0, 169.0, 408.0, 985.0, 2378.0, 5741.0}) shifts.push_back(2.0 * M_PI * q);
  const auto aa = aa_double_shift_test(SampledFunction(catalog::levitan()), shifts, {-10.0, 10.0}, 0.01, 0.05);
  std::cout << "LEVITAN: " << aa.verdict << ", tail oscillation " << aa.pointwise_modulus << '\n';
}
