#include "ron/eot.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "ron/errors.hpp"

namespace ron {

namespace {

constexpr double kMaxExponent = 700.0;  // log(DBL_MAX) ~ 709.78, with margin

// <w, x> skipping zero weights, so potentials at -inf for zero marginals do
// not poison the sum.
double dot_skip_zero(const Eigen::VectorXd& w, const Eigen::VectorXd& x) {
    double out = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w[i] != 0.0) out += w[i] * x[i];
    }
    return out;
}

void validate_marginal(const Eigen::VectorXd& v, const char* which) {
    if (v.size() < 1) throw std::invalid_argument(std::string("EotDual: empty ") + which);
    if (v.minCoeff() < 0.0) {
        throw std::invalid_argument(std::string("EotDual: negative entry in ") + which);
    }
    if (std::abs(v.sum() - 1.0) > 1e-12) {
        throw std::invalid_argument(std::string("EotDual: ") + which + " does not sum to 1");
    }
}

// Hessian of the negated dual at a fixed point, in block form
//   [[diag(Z 1), Z], [Z^T, diag(Z^T 1)]],
// with the plan Z cached at construction.
class EotHessianOracle final : public HessianOracle {
  public:
    explicit EotHessianOracle(Eigen::MatrixXd plan)
        : plan_(std::move(plan)),
          row_sums_(plan_.rowwise().sum()),
          col_sums_(plan_.colwise().sum().transpose()) {}

    Eigen::Index dim() const override { return plan_.rows() + plan_.cols(); }

    Eigen::VectorXd diagonal() const override {
        Eigen::VectorXd out(dim());
        out.head(plan_.rows()) = row_sums_;
        out.tail(plan_.cols()) = col_sums_;
        return out;
    }

    void column(Eigen::Index j, Eigen::Ref<Eigen::VectorXd> out) const override {
        const Eigen::Index a = plan_.rows();
        if (j < 0 || j >= dim()) throw std::out_of_range("EotHessianOracle: column index");
        out.setZero();
        if (j < a) {
            out[j] = row_sums_[j];
            out.tail(plan_.cols()) = plan_.row(j).transpose();
        } else {
            out.head(a) = plan_.col(j - a);
            out[j] = col_sums_[j - a];
        }
    }

    std::int64_t column_cost() const override { return 2 * dim(); }

  private:
    Eigen::MatrixXd plan_;
    Eigen::VectorXd row_sums_, col_sums_;
};

}  // namespace

EotDual::EotDual(Eigen::VectorXd row_marginal, Eigen::VectorXd col_marginal,
                 const Eigen::MatrixXd& cost, double epsilon)
    : r_(std::move(row_marginal)), c_(std::move(col_marginal)), epsilon_(epsilon) {
    validate_marginal(r_, "row marginal");
    validate_marginal(c_, "column marginal");
    if (cost.rows() != r_.size() || cost.cols() != c_.size()) {
        throw std::invalid_argument("EotDual: cost matrix shape does not match marginals");
    }
    if (!(epsilon_ > 0.0)) throw std::invalid_argument("EotDual: epsilon must be positive");

    w_ = ((-cost / epsilon_).array().exp() * (r_ * c_.transpose()).array()).matrix();
    if (!w_.allFinite()) throw std::invalid_argument("EotDual: kernel has non-finite entries");
    const double w_max = w_.maxCoeff();
    log_w_max_ = w_max > 0.0 ? std::log(w_max) : -std::numeric_limits<double>::infinity();
}

void EotDual::guard_exponents(const Eigen::VectorXd& theta) const {
    if (theta.size() != dim()) throw std::invalid_argument("EotDual: parameter length mismatch");
    const double alpha_max = theta.head(rows()).maxCoeff();
    const double beta_max = theta.tail(cols()).maxCoeff();
    if (alpha_max + beta_max + log_w_max_ > kMaxExponent) {
        throw OverflowError("EotDual: exp(alpha_i + beta_j) exceeds the double exponent range "
                            "(potentials diverged; check L_H or marginal feasibility)");
    }
}

Eigen::MatrixXd EotDual::plan(const Eigen::VectorXd& theta) const {
    guard_exponents(theta);
    const Eigen::ArrayXd u = theta.head(rows()).array().exp();
    const Eigen::ArrayXd v = theta.tail(cols()).array().exp();
    return (w_.array().colwise() * u).rowwise() * v.transpose();
}

double EotDual::value(const Eigen::VectorXd& theta) const {
    guard_exponents(theta);
    const Eigen::VectorXd u = theta.head(rows()).array().exp();
    const Eigen::VectorXd v = theta.tail(cols()).array().exp();
    const double mass = u.dot(w_ * v);
    return mass - dot_skip_zero(r_, theta.head(rows())) - dot_skip_zero(c_, theta.tail(cols()));
}

Eigen::VectorXd EotDual::gradient(const Eigen::VectorXd& theta) const {
    guard_exponents(theta);
    const Eigen::VectorXd u = theta.head(rows()).array().exp();
    const Eigen::VectorXd v = theta.tail(cols()).array().exp();
    Eigen::VectorXd out(dim());
    out.head(rows()) = u.cwiseProduct(w_ * v) - r_;
    out.tail(cols()) = v.cwiseProduct(w_.transpose() * u) - c_;
    return out;
}

std::unique_ptr<HessianOracle> EotDual::hessian_oracle(const Eigen::VectorXd& theta) const {
    return std::make_unique<EotHessianOracle>(plan(theta));
}

Eigen::MatrixXd EotDual::hessian_dense(const Eigen::VectorXd& theta) const {
    const Eigen::MatrixXd z = plan(theta);
    const Eigen::Index a = rows(), b = cols();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(a + b, a + b);
    h.topLeftCorner(a, a).diagonal() = z.rowwise().sum();
    h.topRightCorner(a, b) = z;
    h.bottomLeftCorner(b, a) = z.transpose();
    h.bottomRightCorner(b, b).diagonal() = z.colwise().sum();
    return h;
}

double EotDual::suggested_lipschitz_hessian(const Eigen::VectorXd& theta0) const {
    const double alpha_inf = theta0.head(rows()).cwiseAbs().maxCoeff();
    const double beta_inf = theta0.tail(cols()).cwiseAbs().maxCoeff();
    return 3.0 * w_.maxCoeff() * std::exp(alpha_inf + beta_inf + 2.0);
}

double EotDual::suggested_lipschitz_hessian() const {
    return suggested_lipschitz_hessian(Eigen::VectorXd::Zero(dim()));
}

}  // namespace ron
