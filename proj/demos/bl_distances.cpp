// Bounded Lipschitz distances between small point sets.
#include <cstdio>

#include "aalab/empirical/bl_distance.hpp"

using namespace aalab;

int main() {
  const auto d0 = EmpiricalMeasure::dirac({0.0});
  const EmpiricalMeasure two(1, {1.0, 3.0}, {0.5, 0.5});
  const EmpiricalMeasure plane(2, {0.0, 0.0, 1.0, 1.0, 0.5, -0.5}, {0.2, 0.3, 0.5});
  const EmpiricalMeasure moved(2, {0.1, 0.0, 1.0, 1.2}, {0.5, 0.5});

  std::printf("d(delta_0, delta_1)          = %.6f\n", bl_distance(d0, EmpiricalMeasure::dirac({1.0})).value);
  std::printf("d(delta_0, delta_3)          = %.6f\n", bl_distance(d0, EmpiricalMeasure::dirac({3.0})).value);
  std::printf("d(delta_0, (delta_1+delta_3)/2) = %.6f\n", bl_distance(d0, two).value);
  const auto r = bl_distance(plane, moved);
  std::printf("2-d example: %.6f via %s, duality gap %.2e\n", r.value, r.method.c_str(), r.duality_gap);
}
