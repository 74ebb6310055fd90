#pragma once

#include "emdscale/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>

namespace emdscale {

struct OlsResult {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd std_errors;
    double ssr = 0.0;  ///< residual sum of squares
    double tss = 0.0;  ///< total sum of squares about the mean of y
    std::size_t nobs = 0;

    [[nodiscard]] double t_stat(Eigen::Index j) const { return coefficients(j) / std_errors(j); }
    [[nodiscard]] double r_squared() const { return tss > 0.0 ? 1.0 - ssr / tss : 1.0; }
};

/**
 * Least squares by column-pivoted Householder QR on unit-norm columns.
 * A column whose pivot falls below `rank_tol` (relative to unit norm) makes
 * the design rank deficient.
 */
inline OlsResult ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, double rank_tol = 1e-10) {
    const Eigen::Index nobs = design.rows();
    const Eigen::Index p = design.cols();
    detail::require(y.size() == nobs, Errc::InvalidArgument, "design and response differ in length");
    detail::require(nobs > p, Errc::TooShort, "more observations than regressors required");

    Eigen::VectorXd norms = design.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < p; ++j) {
        if (!(norms(j) > 0.0)) {
            detail::fail(Errc::RankDeficient, "regressor column is identically zero");
        }
    }
    const Eigen::MatrixXd scaled = design * norms.cwiseInverse().asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
    qr.setThreshold(rank_tol);
    if (qr.rank() < p) {
        detail::fail(Errc::RankDeficient, "regressor matrix is rank deficient");
    }

    OlsResult out;
    out.nobs = static_cast<std::size_t>(nobs);
    const Eigen::VectorXd scaled_beta = qr.solve(y);
    out.coefficients = scaled_beta.cwiseQuotient(norms);
    const Eigen::VectorXd residual = y - design * out.coefficients;
    out.ssr = residual.squaredNorm();
    out.tss = (y.array() - y.mean()).matrix().squaredNorm();

    const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).template triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv =
        r.template triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::MatrixXd unscaled = r_inv * r_inv.transpose();
    const auto& perm = qr.colsPermutation();
    const Eigen::MatrixXd cov = perm * unscaled * perm.transpose();
    const double sigma2 = out.ssr / static_cast<double>(nobs - p);
    out.std_errors.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        out.std_errors(j) = std::sqrt(sigma2 * cov(j, j)) / norms(j);
    }
    return out;
}

}  // namespace emdscale
