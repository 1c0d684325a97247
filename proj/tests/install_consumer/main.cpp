#include <iostream>

#include "occtune/occupancy.hpp"

int main() {
  const auto r = occtune::occupancy(occtune::builtin_arch(occtune::Family::Kepler), {128, 27, 0});
  std::cout << r.occupancy << '\n';
  return r.occupancy == 1.0 ? 0 : 1;
}
