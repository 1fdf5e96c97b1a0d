#include "ron/nystrom.hpp"

#include <cmath>
#include <stdexcept>

#include "ron/errors.hpp"

namespace ron {

namespace {

// Index s with probability weights[s]/total; weights are entrywise >= 0.
Eigen::Index sample_proportional(SplitMix64& rng, const Eigen::VectorXd& weights, double total) {
    const double u = rng.next_double() * total;
    double cumulative = 0.0;
    Eigen::Index last_positive = -1;
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) continue;
        cumulative += weights[i];
        last_positive = i;
        if (u < cumulative) return i;
    }
    // Rounding pushed u past the accumulated mass; fall back to the last
    // positive entry.
    return last_positive;
}

}  // namespace

NystromFactor rpc_factorize(const HessianOracle& oracle, Eigen::Index k, SplitMix64 rng) {
    const Eigen::Index d = oracle.dim();
    if (k < 1 || k > d) {
        throw std::invalid_argument("rpc_factorize: column budget k must satisfy 1 <= k <= dim");
    }

    NystromFactor out;
    out.rng_seed = rng.state();

    Eigen::VectorXd residual_diag = oracle.diagonal();
    const double diag_max = residual_diag.maxCoeff();
    const double negativity_tol = 1e-12 * std::max(diag_max, 0.0);
    if (residual_diag.minCoeff() < -negativity_tol) {
        throw std::invalid_argument("rpc_factorize: diagonal has a significantly negative entry");
    }
    residual_diag = residual_diag.cwiseMax(0.0);

    const double initial_mass = residual_diag.sum();
    if (initial_mass <= 0.0) {
        // Zero matrix: nothing to factor.
        out.factor.resize(d, 0);
        return out;
    }
    const double exact_threshold = 1e-14 * initial_mass;

    Eigen::MatrixXd factor(d, k);
    Eigen::VectorXd col(d), projected(d);
    Eigen::Index m = 0;
    int consecutive_rejects = 0;
    bool exact_exit = false;

    while (m < k) {
        const double mass = residual_diag.sum();
        if (mass <= exact_threshold) {
            exact_exit = true;
            break;
        }
        const Eigen::Index s = sample_proportional(rng, residual_diag, mass);
        oracle.column(s, col);
        if (m > 0) {
            projected = col - factor.leftCols(m) * factor.row(s).head(m).transpose();
        } else {
            projected = col;
        }
        if (!(projected[s] > 0.0)) {
            // Degenerate pivot: resample once, then give up on this factorization.
            if (++consecutive_rejects >= 2) break;
            continue;
        }
        consecutive_rejects = 0;
        factor.col(m) = projected / std::sqrt(projected[s]);
        residual_diag -= factor.col(m).cwiseAbs2();
        residual_diag = residual_diag.cwiseMax(0.0);
        out.pivots.push_back(s);
        ++m;
    }

    out.factor = factor.leftCols(m);
    out.trace_residual = exact_exit ? 0.0 : std::max(residual_diag.sum(), 0.0);
    out.flops = m * oracle.column_cost();
    for (Eigen::Index n = 1; n <= m; ++n) out.flops += 2 * d * n;
    return out;
}

Eigen::VectorXd apply_factor(const NystromFactor& factor, const Eigen::VectorXd& v,
                             std::int64_t* flops) {
    if (v.size() != factor.rows()) {
        throw std::invalid_argument("apply_factor: vector length does not match factor rows");
    }
    if (flops != nullptr) *flops += 4 * factor.rows() * factor.rank();
    if (factor.rank() == 0) return Eigen::VectorXd::Zero(factor.rows());
    return factor.factor * (factor.factor.transpose() * v);
}

Eigen::Index rpc_sample_complexity(Eigen::Index r, double eps, double eta) {
    if (r < 1) throw std::invalid_argument("rpc_sample_complexity: r must be >= 1");
    if (!(eps > 0.0)) throw std::invalid_argument("rpc_sample_complexity: eps must be > 0");
    if (!(eta > 0.0) || eta > 1.0) {
        throw std::invalid_argument("rpc_sample_complexity: eta must be in (0, 1]");
    }
    const double rd = static_cast<double>(r);
    const double first = rd * std::log(1.0 / (eps * eta));
    // log(2^r / eps) evaluated in log space to dodge overflow for large r.
    const double second = rd + rd * std::max(rd * std::log(2.0) - std::log(eps), 0.0);
    const double bound = rd / eps + std::min(first, second);
    const double k = std::ceil(bound);
    return k < 1.0 ? 1 : static_cast<Eigen::Index>(k);
}

}  // namespace ron
