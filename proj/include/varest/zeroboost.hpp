#pragma once

#include <cstdint>
#include <functional>

#include "varest/estimators.hpp"
#include "varest/selection.hpp"

namespace varest {

/// Any τ² estimator; must be a pure function of its dataset.
using InitialEstimator = std::function<double(const LabeledDataset&)>;

struct BootstrapConfig {
    std::size_t n_boot = 200;
    std::uint64_t seed = 0;
    EstimatorId initial_estimator = EstimatorId::naive;
    /// Overrides `initial_estimator` when set.
    InitialEstimator custom_initial;
    unsigned threads = 1;
};

/// Callable for a built-in estimator id. Oracle and empirical are not valid initial
/// estimators (the former needs β, the latter would recurse).
InitialEstimator initial_estimator_for(EstimatorId id, const CovariateModel& model,
                                       const SelectionOptions& selection = {});

/// Bootstrap-calibrated single zero-estimator correction of an arbitrary initial estimator:
/// c̃* = Ĉov*(τ̃², g_n) / (Var(g_i)/n) and T_emp = τ̃² - c̃* g_n, with g_n from the full data.
/// aux carries c_tilde and n_boot.
EstimateReport empirical_estimator(const LabeledDataset& ds, const CovariateModel& model,
                                   const BootstrapConfig& cfg);

}  // namespace varest
