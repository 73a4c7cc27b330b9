#include <cstdio>

#include "property_checks.hpp"

int main() {
  const int failures = ssdim_tests::run_property_checks(true);
  if (failures) {
    std::printf("%d property check(s) failed\n", failures);
    return 1;
  }
  std::printf("all property checks passed\n");
  return 0;
}
