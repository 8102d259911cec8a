#pragma once

#include <optional>

#include "varest/estimators.hpp"

namespace varest {

/// Outcome of the largest-gap covariate selection.
struct SelectionResult {
    IndexSet selected;  ///< original (0-based) column indices, ascending
    double threshold_value = 0.0;
    Vector gaps;  ///< λ between consecutive order statistics, ascending order
    bool split_used = false;
};

struct SelectionOptions {
    bool split = false;
    double split_fraction = 0.5;
    /// Upper bound on |B_γ|; the largest β̂_j² are kept. nullopt disables the cap.
    std::optional<std::size_t> cap = 50;
};

/// β̂_j² = Σ_{i1≠i2} W_{i1 j} W_{i2 j} / (n(n-1)) per column.
Vector beta_squared_estimates(const WMatrix& w);

/// Sorts β̂², finds the position j* of the largest gap λ (ties -> lowest position) and
/// selects {j : β̂_j² > β̂²_(j*)}. The order statistic at the gap itself is excluded.
SelectionResult gap_select(const Vector& beta2);

/// Selection estimator with the bookkeeping needed for its variance estimates.
struct GammaFit {
    EstimateReport report;
    SelectionResult selection;
    Vector beta2_eval;     ///< β̂² on the rows used for τ̂² and ψ̂
    std::size_t n_eval = 0;
};

GammaFit fit_t_gamma(const LabeledDataset& ds, const CovariateModel& model,
                     const SelectionOptions& options = {});

/// τ̂² - 2 Σ_{j,j' ∈ B_γ} ψ̂_jj'; aux["selected"] lists 1-based column numbers.
EstimateReport t_gamma(const LabeledDataset& ds, const CovariateModel& model,
                       const SelectionOptions& options = {});

/// "3;7;12" style rendering of 0-based indices as 1-based column numbers.
std::string format_index_set(const IndexSet& set);

}  // namespace varest
