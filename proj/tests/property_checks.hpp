#pragma once

#include <functional>
#include <string>
#include <vector>

namespace ssdim_tests {

struct PropertyCheck {
  std::string name;
  std::function<bool(std::string&)> run; // fills a message on failure
};

/// Deterministic property checks with no Monte-Carlo spectral component:
/// brute-force oracle equivalences on small instances, f monotonicity,
/// H-matrix eigenvalue monotonicity, Lyapunov residuals, Hankel shift
/// structure and determinism under the seed.
std::vector<PropertyCheck> property_checks();

/// Runs all checks, printing one line per check; returns the failure count.
int run_property_checks(bool verbose);

} // namespace ssdim_tests
