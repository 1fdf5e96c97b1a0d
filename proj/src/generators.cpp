#include "ron/generators.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace ron {

Eigen::VectorXd gaussian_marginal(Eigen::Index d, double mean, double sigma) {
    if (d < 1) throw std::invalid_argument("gaussian_marginal: d must be >= 1");
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_marginal: sigma must be positive");
    if (mean < 0.0 || mean > 1.0) {
        throw std::invalid_argument("gaussian_marginal: mean must lie in [0, 1]");
    }
    Eigen::VectorXd v(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(d);
        const double z = (x - mean) / sigma;
        v[i] = std::exp(-0.5 * z * z);
    }
    const double total = v.sum();
    if (total <= 0.0) {
        throw std::invalid_argument(
            "gaussian_marginal: density underflowed to zero on the whole grid; use a larger sigma");
    }
    return v / total;
}

Eigen::MatrixXd random_cost(Eigen::Index a, Eigen::Index b, SplitMix64 rng) {
    if (a < 1 || b < 1) throw std::invalid_argument("random_cost: dimensions must be >= 1");
    Eigen::MatrixXd cost(a, b);
    for (Eigen::Index i = 0; i < a; ++i) {
        for (Eigen::Index j = 0; j < b; ++j) cost(i, j) = rng.next_double();
    }
    return cost;
}

Eigen::MatrixXd grid_l1_cost(Eigen::Index h, Eigen::Index w) {
    if (h < 1 || w < 1) throw std::invalid_argument("grid_l1_cost: dimensions must be >= 1");
    const Eigen::Index n = h * w;
    const double scale = std::max<Eigen::Index>(1, (h - 1) + (w - 1));
    Eigen::MatrixXd cost(n, n);
    for (Eigen::Index p = 0; p < n; ++p) {
        const Eigen::Index pi = p / w, pj = p % w;
        for (Eigen::Index q = 0; q < n; ++q) {
            const Eigen::Index qi = q / w, qj = q % w;
            cost(p, q) = static_cast<double>(std::abs(pi - qi) + std::abs(pj - qj)) / scale;
        }
    }
    return cost;
}

Eigen::MatrixXd sv_profile_matrix(Eigen::Index p, Eigen::Index d, const Eigen::VectorXd& profile,
                                  SplitMix64 rng) {
    if (d < 1 || p < d) throw std::invalid_argument("sv_profile_matrix: need p >= d >= 1");
    if (profile.size() != d) {
        throw std::invalid_argument("sv_profile_matrix: profile length must equal d");
    }
    for (Eigen::Index i = 0; i < d; ++i) {
        if (!(profile[i] > 0.0)) {
            throw std::invalid_argument("sv_profile_matrix: profile must be positive");
        }
        if (i > 0 && profile[i] > profile[i - 1]) {
            throw std::invalid_argument("sv_profile_matrix: profile must be non-increasing");
        }
    }
    Eigen::MatrixXd gaussian(p, d);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) gaussian(i, j) = rng.next_gaussian();
    }
    const Eigen::BDCSVD<Eigen::MatrixXd> svd(gaussian, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return svd.matrixU() * profile.asDiagonal() * svd.matrixV().transpose();
}

Eigen::VectorXd sv_profile(const std::string& name, Eigen::Index d) {
    if (d < 1) throw std::invalid_argument("sv_profile: d must be >= 1");
    Eigen::VectorXd profile(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const double idx = static_cast<double>(i + 1);
        double value = 0.0;
        if (name == "fast") {
            value = std::pow(0.6, static_cast<double>(i));
        } else if (name == "medium") {
            value = 1.0 / (idx * idx);
        } else if (name == "slow") {
            value = 1.0 / std::sqrt(idx);
        } else {
            throw std::invalid_argument("sv_profile: unknown profile '" + name + "'");
        }
        profile[i] = std::max(value, 1e-6);
    }
    return profile;
}

}  // namespace ron
