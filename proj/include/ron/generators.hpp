#pragma once

#include <Eigen/Core>

#include <string>

#include "ron/rng.hpp"

namespace ron {

/// Gaussian density discretized on the cell midpoints x_i = (i - 1/2)/d of
/// [0, 1] and normalized to sum 1. Throws when the density underflows to zero
/// everywhere (sigma too small for the grid).
Eigen::VectorXd gaussian_marginal(Eigen::Index d, double mean, double sigma);

/// a x b matrix of i.i.d. Uniform[0, 1) entries, filled row-major from the
/// given stream.
Eigen::MatrixXd random_cost(Eigen::Index a, Eigen::Index b, SplitMix64 rng);

/// Pixelwise l1 distance on an h x w grid under row-major flattening,
/// normalized by (h - 1) + (w - 1) into [0, 1] (by 1 for a single cell).
Eigen::MatrixXd grid_l1_cost(Eigen::Index h, Eigen::Index w);

/// Dense p x d matrix (p >= d) with the prescribed singular values: a
/// standard-normal matrix sampled row-major, its thin SVD basis reassembled
/// around the profile.
Eigen::MatrixXd sv_profile_matrix(Eigen::Index p, Eigen::Index d, const Eigen::VectorXd& profile,
                                  SplitMix64 rng);

/// Named decay profiles for the linear inverse experiments, floored at
/// 1e-6 * sigma_1:
///   fast:   sigma_i = 0.6^(i-1)
///   medium: sigma_i = i^-2
///   slow:   sigma_i = i^-1/2
Eigen::VectorXd sv_profile(const std::string& name, Eigen::Index d);

}  // namespace ron
