#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace varest {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative eigenvalue floor below which a covariance is treated as singular.
inline constexpr double kSingularityTolerance = 1e-10;

/// Known distribution of the raw covariates: mean, covariance and the fourth
/// moments of the *whitened* columns. Immutable once constructed.
class CovariateModel {
public:
    CovariateModel(Vector mean, Matrix covariance, Vector fourth_moments, bool independent_columns,
                   bool gaussian);

    /// Already-whitened covariates: mean 0, identity covariance, common fourth moment.
    static CovariateModel standard(std::size_t p, double fourth_moment, bool gaussian,
                                   bool independent_columns = true);
    static CovariateModel standard_gaussian(std::size_t p) { return standard(p, 3.0, true); }

    std::size_t p() const { return static_cast<std::size_t>(mean_.size()); }
    const Vector& mean() const { return mean_; }
    const Matrix& covariance() const { return covariance_; }
    const Vector& fourth_moments() const { return fourth_moments_; }
    bool independent_columns() const { return independent_columns_; }
    bool gaussian() const { return gaussian_; }

    /// True when mean is exactly zero and covariance exactly the identity.
    bool is_standardized() const;

private:
    Vector mean_;
    Matrix covariance_;
    Vector fourth_moments_;
    bool independent_columns_;
    bool gaussian_;
};

/// Observed sample (X, Y). X is expected to be whitened before any estimator runs.
class LabeledDataset {
public:
    LabeledDataset(Matrix x, Vector y, bool whitened = true);

    std::size_t n() const { return static_cast<std::size_t>(x_.rows()); }
    std::size_t p() const { return static_cast<std::size_t>(x_.cols()); }
    const Matrix& x() const { return x_; }
    const Vector& y() const { return y_; }
    bool whitened() const { return whitened_; }

    /// Rows listed in `rows`, in that order (duplicates allowed).
    LabeledDataset take_rows(const std::vector<std::size_t>& rows) const;
    /// Contiguous block of rows [first, first + count).
    LabeledDataset row_block(std::size_t first, std::size_t count) const;

private:
    Matrix x_;
    Vector y_;
    bool whitened_;
};

/// W_ij = X_ij * Y_i together with per-column sums used by the fast kernels.
class WMatrix {
public:
    explicit WMatrix(Matrix w);

    std::size_t n() const { return static_cast<std::size_t>(w_.rows()); }
    std::size_t p() const { return static_cast<std::size_t>(w_.cols()); }
    const Matrix& w() const { return w_; }
    const Vector& column_sums() const { return column_sums_; }
    const Vector& column_square_sums() const { return column_square_sums_; }

private:
    Matrix w_;
    Vector column_sums_;
    Vector column_square_sums_;
};

/// True regression coefficients; only available in simulations.
struct CoefficientVector {
    Vector beta;
    bool oracle_only = true;

    std::size_t p() const { return static_cast<std::size_t>(beta.size()); }
    double tau2() const;
};

/// Rows of `x_raw` mapped to Σ^{-1/2}(x - μ) using the symmetric inverse square root.
/// Throws NearSingularCovariance when min eigenvalue <= 1e-10 * max eigenvalue.
Matrix whiten(const Matrix& x_raw, const CovariateModel& model);

/// Whitens `x_raw` and packages it with `y`; optionally centers y in-sample.
LabeledDataset make_whitened_dataset(const Matrix& x_raw, Vector y, const CovariateModel& model,
                                     bool center_y = false);

WMatrix build_w(const LabeledDataset& ds);

/// Unbiased sample variance (n - 1 divisor).
double sample_variance_y(const Vector& y);

}  // namespace varest
