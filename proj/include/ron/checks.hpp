#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "ron/objective.hpp"

namespace ron {

struct CheckResult {
    std::string suite;
    std::string name;
    bool passed = true;
    std::string detail;  // violated inequality and offending values, if any
};

struct CheckOptions {
    // Scales the EOT Hessian-Lipschitz heuristic in the lemma suite; < 1
    // deliberately weakens the bound to exercise the violation reporting.
    double eot_lh_scale = 1.0;
};

std::vector<std::string> check_suite_names();

/// Runs one named suite ("all" for every suite). Throws std::invalid_argument
/// for an unknown name.
std::vector<CheckResult> run_checks(const std::string& suite, const CheckOptions& options = {});

/// Central finite differences of the objective value, h = 1e-6 (1 + |theta|).
Eigen::VectorXd fd_gradient(const SmoothObjective& objective, const Eigen::VectorXd& theta);

/// Central finite differences of the gradient, one column per coordinate.
Eigen::MatrixXd fd_hessian(const SmoothObjective& objective, const Eigen::VectorXd& theta);

}  // namespace ron
