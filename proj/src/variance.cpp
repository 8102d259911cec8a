#include "varest/variance.hpp"

#include <algorithm>

#include "varest/errors.hpp"
#include "varest/summation.hpp"

namespace varest {

namespace {

double dn(std::size_t v) { return static_cast<double>(v); }

void require_independent(const CovariateModel& model) {
    if (!model.independent_columns())
        throw UnsupportedDependenceStructure(
            "analytic moment formulas require independent whitened columns");
}

void check_beta(const CoefficientVector& beta, const CovariateModel& model) {
    if (beta.p() != model.p())
        throw DimensionMismatch("beta length " + std::to_string(beta.p()) +
                                " differs from model width " + std::to_string(model.p()));
}

// Σ_{j∈B} b_j²(κ_j - 1) + 2 Σ_{j≠j'∈B} b_j b_j', where b_j is a squared coefficient.
double reduction_bracket(const Vector& squared_coef, const IndexSet& set, const Vector& kurt) {
    CompensatedSum fourth_terms, linear, squares;
    for (const auto j : set) {
        const auto k = static_cast<Eigen::Index>(j);
        const double b = squared_coef[k];
        fourth_terms += b * b * (kurt[k] - 1.0);
        linear += b;
        squares += b * b;
    }
    const double s = linear.value();
    return fourth_terms.value() + 2.0 * (s * s - squares.value());
}

IndexSet all_columns(std::size_t p) {
    IndexSet out(p);
    for (std::size_t j = 0; j < p; ++j) out[j] = j;
    return out;
}

IndexSet validated_set(const IndexSet& set, std::size_t p) {
    IndexSet out = set;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    for (const auto j : out)
        if (j >= p) throw IndexOutOfRange(j, p);
    return out;
}

}  // namespace

MomentMatrixA moment_matrix_a(const CoefficientVector& beta, double sigma2,
                              const CovariateModel& model) {
    require_independent(model);
    check_beta(beta, model);
    const double sigma_y2 = beta.tau2() + sigma2;
    const auto p = static_cast<Eigen::Index>(beta.p());
    MomentMatrixA out;
    out.derivation = MomentDerivation::analytic_independent_columns;
    out.a = 2.0 * beta.beta * beta.beta.transpose();
    for (Eigen::Index j = 0; j < p; ++j) {
        const double b = beta.beta[j];
        out.a(j, j) = sigma_y2 + b * b * (model.fourth_moments()[j] - 1.0);
    }
    return out;
}

MomentMatrixA provided_moment_matrix(Matrix a) {
    if (a.rows() != a.cols()) throw DimensionMismatch("A must be square");
    const double scale = a.cwiseAbs().maxCoeff();
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw InvalidModel("A must be symmetric");
    return MomentMatrixA{std::move(a), MomentDerivation::provided};
}

double var_naive_theory(const MomentMatrixA& a, const CoefficientVector& beta, std::size_t n) {
    if (n < 2) throw TooFewObservations(n, 2);
    if (static_cast<std::size_t>(a.a.rows()) != beta.p())
        throw DimensionMismatch("A and beta disagree in dimension");
    const double tau2 = beta.tau2();
    const double beta4 = tau2 * tau2;
    const Vector ab = a.a * beta.beta;
    const double bab = compensated_dot(beta.beta.data(), ab.data(), beta.p());
    CompensatedSum frob;
    for (Eigen::Index c = 0; c < a.a.cols(); ++c)
        for (Eigen::Index r = 0; r < a.a.rows(); ++r) frob += a.a(r, c) * a.a(r, c);
    const double nn = dn(n);
    return 4.0 * (nn - 2.0) / (nn * (nn - 1.0)) * (bab - beta4) +
           2.0 / (nn * (nn - 1.0)) * (frob.value() - beta4);
}

double var_naive_theory(const CoefficientVector& beta, double sigma2, const CovariateModel& model,
                        std::size_t n) {
    return var_naive_theory(moment_matrix_a(beta, sigma2, model), beta, n);
}

double asymptotic_psi(double tau2, double sigma2, std::size_t p, std::size_t n) {
    const double ratio = dn(p) / dn(n);
    const double sy2 = sigma2 + tau2;
    return 2.0 * ((1.0 + ratio) * sy2 * sy2 - sigma2 * sigma2 + 3.0 * tau2 * tau2);
}

double var_t_oracle_theory(const CoefficientVector& beta, double sigma2,
                           const CovariateModel& model, std::size_t n) {
    return var_t_b_theory(beta, sigma2, model, n, all_columns(beta.p()));
}

double var_t_b_theory(const CoefficientVector& beta, double sigma2, const CovariateModel& model,
                      std::size_t n, const IndexSet& b_set) {
    const double base = var_naive_theory(beta, sigma2, model, n);
    const IndexSet set = validated_set(b_set, beta.p());
    const Vector b2 = beta.beta.cwiseAbs2();
    return base - 4.0 / dn(n) * reduction_bracket(b2, set, model.fourth_moments());
}

double var_t_cstar_theory(const CoefficientVector& beta, double sigma2,
                          const CovariateModel& model, std::size_t n) {
    if (beta.p() < 2) throw DegenerateZeroEstimator("c* needs p >= 2");
    require_independent(model);
    const double base = var_naive_theory(beta, sigma2, model, n);
    const double sum_beta = compensated_sum(beta.beta);
    const double cov_term = 2.0 * (sum_beta * sum_beta - beta.tau2());
    const double var_g = dn(beta.p()) * dn(beta.p() - 1) / 2.0;
    return base - cov_term * cov_term / (dn(n) * var_g);
}

double var_t_full_theory(const CoefficientVector& beta, double sigma2,
                         const CovariateModel& model, std::size_t n, std::size_t p) {
    const double sigma_y2 = beta.tau2() + sigma2;
    const double nn = dn(n);
    return var_t_oracle_theory(beta, sigma2, model, n) +
           8.0 * dn(p) * dn(p) * sigma_y2 * sigma_y2 / (nn * nn * nn);
}

double var_hat_naive_gaussian(double tau2_hat, double sigma_y2_hat, std::size_t n, std::size_t p) {
    const double nn = dn(n);
    const double t2 = tau2_hat;
    const double t4 = t2 * t2;
    const double s2 = sigma_y2_hat;
    const double s4 = s2 * s2;
    return 4.0 / nn *
           ((nn - 2.0) / (nn - 1.0) * (s2 * t2 + t4) +
            1.0 / (2.0 * (nn - 1.0)) * (dn(p) * s4 + 4.0 * s2 * t2 + 3.0 * t4));
}

double var_hat_t_gamma(double var_hat_naive, const Vector& beta2, const IndexSet& b_gamma,
                       std::size_t n) {
    const IndexSet set = validated_set(b_gamma, static_cast<std::size_t>(beta2.size()));
    CompensatedSum tb;
    for (const auto j : set) tb += beta2[static_cast<Eigen::Index>(j)];
    const double t = tb.value();
    return var_hat_naive - 8.0 / dn(n) * t * t;
}

TildeComponents tilde_components(const WMatrix& w, const GramMatrix& g) {
    const auto n = w.n();
    if (n < 3) throw TooFewObservations(n, 3);
    if (g.n() != n) throw DimensionMismatch("Gram matrix size differs from W rows");
    const double nn = dn(n);
    TildeComponents out;
    out.beta_a_beta = chain_sum_distinct(g) / (nn * (nn - 1.0) * (nn - 2.0));
    out.frobenius_a2 = offdiag_square_sum(g) / (nn * (nn - 1.0));
    const double tau2 = compensated_sum(g.row_sums_offdiag) / (nn * (nn - 1.0));
    out.beta_norm4 = tau2 * tau2;
    return out;
}

double var_tilde_naive(const WMatrix& w, const GramMatrix& g, std::size_t n) {
    if (n != w.n()) throw DimensionMismatch("n differs from W rows");
    const TildeComponents c = tilde_components(w, g);
    const double nn = dn(n);
    return 4.0 * (nn - 2.0) / (nn * (nn - 1.0)) * (c.beta_a_beta - c.beta_norm4) +
           2.0 / (nn * (nn - 1.0)) * (c.frobenius_a2 - c.beta_norm4);
}

double var_tilde_t_gamma(double var_tilde, const Vector& beta2, const IndexSet& b_gamma,
                         const CovariateModel& model, std::size_t n) {
    if (model.p() != static_cast<std::size_t>(beta2.size()))
        throw DimensionMismatch("beta2 length differs from model width");
    const IndexSet set = validated_set(b_gamma, model.p());
    return var_tilde - 4.0 / dn(n) * reduction_bracket(beta2, set, model.fourth_moments());
}

double var_tilde_t_chat(double var_tilde, const WMatrix& w, const SingleZeroStat& single,
                        std::size_t n) {
    const double numer = single_numerator(w, single);
    return var_tilde - numer * numer / (dn(n) * single.var_g);
}

}  // namespace varest
