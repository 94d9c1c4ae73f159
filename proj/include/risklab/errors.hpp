#pragma once

#include <stdexcept>
#include <string>

namespace risklab {

// Invalid user-supplied configuration (bad noise level, empty pmf, ...).
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// An exact/exhaustive solver was asked to run above its size cap.
struct capacity_error : std::runtime_error {
    explicit capacity_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical solver failure: infeasible QP, margin below threshold, no convergence.
struct solver_error : std::runtime_error {
    explicit solver_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A compression scheme violated its own contract (size bound, label consistency).
struct scheme_error : std::runtime_error {
    explicit scheme_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace risklab
