#include "varest/core_model.hpp"

#include <cmath>
#include <string>

#include "varest/errors.hpp"
#include "varest/summation.hpp"

namespace varest {

namespace {

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace

CovariateModel::CovariateModel(Vector mean, Matrix covariance, Vector fourth_moments,
                               bool independent_columns, bool gaussian)
    : mean_(std::move(mean)),
      covariance_(std::move(covariance)),
      fourth_moments_(std::move(fourth_moments)),
      independent_columns_(independent_columns),
      gaussian_(gaussian) {
    const auto p = mean_.size();
    if (p == 0) throw InvalidModel("covariate model needs at least one column");
    if (covariance_.rows() != p || covariance_.cols() != p)
        throw InvalidModel("covariance must be " + std::to_string(p) + "x" + std::to_string(p));
    if (fourth_moments_.size() != p)
        throw InvalidModel("fourth_moments must have length " + std::to_string(p));
    if (!mean_.allFinite() || !all_finite(covariance_) || !fourth_moments_.allFinite())
        throw InvalidModel("covariate model contains non-finite entries");

    const double scale = covariance_.cwiseAbs().maxCoeff();
    if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw InvalidModel("covariance is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(covariance_, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() <= 0.0)
        throw InvalidModel("covariance is not positive definite");

    for (Eigen::Index j = 0; j < p; ++j) {
        if (fourth_moments_[j] < 1.0)
            throw InvalidModel("fourth moment of column " + std::to_string(j + 1) +
                               " is below 1");
        if (gaussian_ && fourth_moments_[j] != 3.0)
            throw InvalidModel("gaussian model requires fourth moments equal to 3");
    }
}

CovariateModel CovariateModel::standard(std::size_t p, double fourth_moment, bool gaussian,
                                        bool independent_columns) {
    const auto sp = static_cast<Eigen::Index>(p);
    return CovariateModel(Vector::Zero(sp), Matrix::Identity(sp, sp),
                          Vector::Constant(sp, fourth_moment), independent_columns, gaussian);
}

bool CovariateModel::is_standardized() const {
    const auto p = covariance_.rows();
    return (mean_.array() == 0.0).all() && covariance_ == Matrix::Identity(p, p);
}

LabeledDataset::LabeledDataset(Matrix x, Vector y, bool whitened)
    : x_(std::move(x)), y_(std::move(y)), whitened_(whitened) {
    if (x_.rows() != y_.size())
        throw DimensionMismatch("x has " + std::to_string(x_.rows()) + " rows but y has " +
                                std::to_string(y_.size()) + " entries");
    if (x_.rows() < 2) throw TooFewObservations(static_cast<std::size_t>(x_.rows()), 2);
    if (x_.cols() < 1) throw InvalidDataset("dataset has no covariate columns");
    if (!x_.allFinite() || !y_.allFinite()) throw InvalidDataset("dataset has non-finite entries");
}

LabeledDataset LabeledDataset::take_rows(const std::vector<std::size_t>& rows) const {
    Matrix x(static_cast<Eigen::Index>(rows.size()), x_.cols());
    Vector y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto r = static_cast<Eigen::Index>(rows[k]);
        x.row(static_cast<Eigen::Index>(k)) = x_.row(r);
        y[static_cast<Eigen::Index>(k)] = y_[r];
    }
    return LabeledDataset(std::move(x), std::move(y), whitened_);
}

LabeledDataset LabeledDataset::row_block(std::size_t first, std::size_t count) const {
    const auto f = static_cast<Eigen::Index>(first);
    const auto c = static_cast<Eigen::Index>(count);
    return LabeledDataset(x_.middleRows(f, c), y_.segment(f, c), whitened_);
}

WMatrix::WMatrix(Matrix w) : w_(std::move(w)) {
    const auto p = w_.cols();
    const auto n = static_cast<std::size_t>(w_.rows());
    column_sums_.resize(p);
    column_square_sums_.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double* col = w_.col(j).data();
        CompensatedSum s, s2;
        for (std::size_t i = 0; i < n; ++i) {
            s += col[i];
            s2 += col[i] * col[i];
        }
        column_sums_[j] = s.value();
        column_square_sums_[j] = s2.value();
    }
}

double CoefficientVector::tau2() const {
    return compensated_dot(beta.data(), beta.data(), static_cast<std::size_t>(beta.size()));
}

Matrix whiten(const Matrix& x_raw, const CovariateModel& model) {
    if (static_cast<std::size_t>(x_raw.cols()) != model.p())
        throw DimensionMismatch("data has " + std::to_string(x_raw.cols()) +
                                " columns but model has " + std::to_string(model.p()));
    if (model.is_standardized()) return x_raw;

    Eigen::SelfAdjointEigenSolver<Matrix> eig(model.covariance());
    const Vector& lambda = eig.eigenvalues();
    if (lambda.minCoeff() <= kSingularityTolerance * lambda.maxCoeff())
        throw NearSingularCovariance("covariance eigenvalue ratio below 1e-10");
    const Matrix& v = eig.eigenvectors();
    const Matrix inv_sqrt = v * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
    // Row-vector convention: (x - μ)ᵀ Σ^{-1/2}, Σ^{-1/2} symmetric.
    return (x_raw.rowwise() - model.mean().transpose()) * inv_sqrt;
}

LabeledDataset make_whitened_dataset(const Matrix& x_raw, Vector y, const CovariateModel& model,
                                     bool center_y) {
    if (center_y && y.size() > 0) {
        const double mean = compensated_sum(y) / static_cast<double>(y.size());
        y.array() -= mean;
    }
    return LabeledDataset(whiten(x_raw, model), std::move(y), true);
}

WMatrix build_w(const LabeledDataset& ds) {
    return WMatrix(ds.y().asDiagonal() * ds.x());
}

double sample_variance_y(const Vector& y) {
    const auto n = static_cast<std::size_t>(y.size());
    if (n < 2) throw TooFewObservations(n, 2);
    const double mean = compensated_sum(y) / static_cast<double>(n);
    CompensatedSum ss;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = y[static_cast<Eigen::Index>(i)] - mean;
        ss += d * d;
    }
    return ss.value() / static_cast<double>(n - 1);
}

}  // namespace varest
