#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "varest/core_model.hpp"

namespace varest {

/// Stable identifiers; their string forms appear in CSV outputs.
enum class EstimatorId { naive, dicker, oracle, full, single, selection, empirical };

std::string_view to_string(EstimatorId id);
/// Throws ParseError for unknown names.
EstimatorId parse_estimator_id(std::string_view name);
std::vector<EstimatorId> parse_estimator_list(std::string_view comma_separated);

using IndexSet = std::vector<std::size_t>;
using AuxMap = std::map<std::string, std::string>;

/// Point estimate of τ² and σ² = σ̂_Y² - τ̂², both unclamped.
struct EstimateReport {
    double tau2 = 0.0;
    double sigma2 = 0.0;
    EstimatorId estimator_id = EstimatorId::naive;
    std::optional<double> variance_estimate;
    AuxMap aux;
};

/// printf("%.*g") rendering used for aux values and CSV cells.
std::string format_double(double value, int significant_digits = 17);

EstimateReport make_report(EstimatorId id, double tau2, double sigma_y2);
/// max(0, ·) applied to τ̂² and σ̂² for display; breaks unbiasedness.
EstimateReport clamped(EstimateReport report);

/// Per-observation zero-estimator g_i = Σ_{j<j'} X_ij X_ij' and its known variance.
struct SingleZeroStat {
    Vector g_per_obs;
    double g_n = 0.0;
    double var_g = 0.0;
};

/// Σ_j Σ_{i1≠i2} W_{i1 j} W_{i2 j} / (n(n-1)).
double naive_tau2(const WMatrix& w);

/// (‖XᵀY‖² - p‖Y‖²) / (n(n+1)).
double dicker_tau2(const LabeledDataset& ds);

double sigma2_from(double tau2, double sigma_y2);

/// τ̂² - 2 Σ_{j,j'} β_j β_j' h_jj' with the true β (simulation only).
double t_oracle(const LabeledDataset& ds, const WMatrix& w, const CoefficientVector& beta,
                const CovariateModel& model);

/// Mean-zero U-statistic estimating β_j β_j' h_jj'; O(n).
double psi_hat(const LabeledDataset& ds, const WMatrix& w, std::size_t j, std::size_t jp,
               const CovariateModel& model);

/// τ̂² - 2 Σ_{j,j' ∈ B} ψ̂_jj' for a data-independent set B; O(|B|² n).
double t_b(const LabeledDataset& ds, const WMatrix& w, const IndexSet& b_set,
           const CovariateModel& model);

/// τ̂² - 2 Σ_{all j,j'} ψ̂_jj', evaluated through the n×n matrix XXᵀ in O(n²p).
double t_full(const LabeledDataset& ds, const WMatrix& w, const CovariateModel& model);

SingleZeroStat build_single_zero(const LabeledDataset& ds, const CovariateModel& model);

/// 2 Σ_j β_j θ_j / Var(g_i) with Σ_j β_j θ_j = (Σ_j β_j)² - τ².
double c_star_oracle(const CoefficientVector& beta, const SingleZeroStat& single,
                     const CovariateModel& model);

/// (2/(n(n-1))) Σ_{i1≠i2} Σ_j W_{i1 j} S_{i2 j}, the unbiased estimate of 2 Σ_j β_j θ_j.
double single_numerator(const WMatrix& w, const SingleZeroStat& single);

double c_hat_star(const WMatrix& w, const SingleZeroStat& single);

/// τ̂² - c g_n for an arbitrary coefficient (oracle c* or estimated ĉ*).
double t_c_star(const WMatrix& w, const SingleZeroStat& single, double c);

double t_c_hat_star(const WMatrix& w, const SingleZeroStat& single);

}  // namespace varest
