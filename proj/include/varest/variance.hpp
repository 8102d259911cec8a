#pragma once

// Exact and leading-order variances of the τ² estimators (theory side, used as
// test oracles and in reports) plus the feasible variance estimators.

#include "varest/estimators.hpp"
#include "varest/ustat_kernels.hpp"

namespace varest {

enum class MomentDerivation { analytic_independent_columns, provided };

/// A = E(W_i W_iᵀ).
struct MomentMatrixA {
    Matrix a;
    MomentDerivation derivation = MomentDerivation::provided;
};

/// Analytic A for independent whitened columns:
/// A_jj = σ_Y² + β_j²(E X_j⁴ - 1), A_jj' = 2 β_j β_j'.
MomentMatrixA moment_matrix_a(const CoefficientVector& beta, double sigma2,
                              const CovariateModel& model);

/// Wraps a user-supplied symmetric A.
MomentMatrixA provided_moment_matrix(Matrix a);

/// Exact finite-n variance of the naive estimator.
double var_naive_theory(const MomentMatrixA& a, const CoefficientVector& beta, std::size_t n);
double var_naive_theory(const CoefficientVector& beta, double sigma2, const CovariateModel& model,
                        std::size_t n);

/// Asymptotic variance scale ψ of √n(τ̂² - τ²) under Gaussian covariates.
double asymptotic_psi(double tau2, double sigma2, std::size_t p, std::size_t n);

/// Exact for independent columns.
double var_t_oracle_theory(const CoefficientVector& beta, double sigma2,
                           const CovariateModel& model, std::size_t n);

/// Leading order: the O(n⁻²) remainder is dropped.
double var_t_b_theory(const CoefficientVector& beta, double sigma2, const CovariateModel& model,
                      std::size_t n, const IndexSet& b_set);

double var_t_cstar_theory(const CoefficientVector& beta, double sigma2,
                          const CovariateModel& model, std::size_t n);

/// Leading order: Var(T_oracle) + 8 p² σ_Y⁴ / n³.
double var_t_full_theory(const CoefficientVector& beta, double sigma2,
                         const CovariateModel& model, std::size_t n, std::size_t p);

/// Gaussian plug-in estimate of Var(τ̂²).
double var_hat_naive_gaussian(double tau2_hat, double sigma_y2_hat, std::size_t n, std::size_t p);

/// Var̂(τ̂²) - (8/n) (Σ_{j∈B} β̂_j²)²; may be negative.
double var_hat_t_gamma(double var_hat_naive, const Vector& beta2, const IndexSet& b_gamma,
                       std::size_t n);

/// U-statistic estimates of βᵀAβ, ‖A‖²_F and ‖β‖⁴.
struct TildeComponents {
    double beta_a_beta = 0.0;
    double frobenius_a2 = 0.0;
    double beta_norm4 = 0.0;
};

TildeComponents tilde_components(const WMatrix& w, const GramMatrix& g);

/// Distribution-free estimate of Var(τ̂²); requires n >= 3.
double var_tilde_naive(const WMatrix& w, const GramMatrix& g, std::size_t n);

double var_tilde_t_gamma(double var_tilde, const Vector& beta2, const IndexSet& b_gamma,
                         const CovariateModel& model, std::size_t n);

/// var_tilde - [single_numerator]² / (n Var(g_i)).
double var_tilde_t_chat(double var_tilde, const WMatrix& w, const SingleZeroStat& single,
                        std::size_t n);

}  // namespace varest
