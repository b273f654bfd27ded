#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace parking {

/// Suite names accepted by run_verify_suite, "all" excluded.
const std::vector<std::string>& verify_suite_names();

/// Runs one suite (or "all") and returns
/// {suite, passed, checks: [{name, expected, actual, tolerance, passed}]}.
/// Throws std::invalid_argument for an unknown suite.
nlohmann::json run_verify_suite(const std::string& name, unsigned workers = 1);

}  // namespace parking
