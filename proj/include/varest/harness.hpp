#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "varest/estimators.hpp"
#include "varest/selection.hpp"
#include "varest/simgen.hpp"

namespace varest {

enum class VarianceMethod { none, theory, gaussian_plugin, tilde };

std::string to_string(VarianceMethod method);
/// Accepts "none", "theory", "gaussian-plugin" and "tilde".
VarianceMethod parse_variance_method(std::string_view text);

/// Settings shared by the simulation harness and the estimate command.
struct EvaluationOptions {
    SelectionOptions selection;
    std::size_t n_boot = 200;
    EstimatorId initial = EstimatorId::naive;
    VarianceMethod variance = VarianceMethod::none;
    bool record_timing = true;
};

/// Result of one estimator on one dataset. `report` is empty when the estimator threw.
struct EstimatorOutcome {
    EstimatorId id = EstimatorId::naive;
    std::optional<EstimateReport> report;
    std::string error;
    bool degenerate = false;  ///< failure was a DegenerateZeroEstimator
    double wall_ms = 0.0;
};

/// Simulation-only knowledge: true coefficients, noise level and strong set.
struct SimulationTruth {
    CoefficientVector beta;
    double sigma2 = 0.0;
    IndexSet strong;
};

/// Runs every estimator in `ids` on one dataset. `truth` is needed by the oracle estimator
/// and by the theory variance method; `boot_seed` feeds the empirical estimator.
std::vector<EstimatorOutcome> evaluate_estimators(const LabeledDataset& ds,
                                                  const CovariateModel& model,
                                                  const std::vector<EstimatorId>& ids,
                                                  const EvaluationOptions& options,
                                                  const SimulationTruth* truth,
                                                  std::uint64_t boot_seed);

struct RepRecord {
    std::size_t rep_index = 0;
    EstimatorId estimator_id = EstimatorId::naive;
    double tau2_hat = 0.0;
    double sigma2_hat = 0.0;
    std::optional<double> variance_estimate;
    double wall_ms = 0.0;
    AuxMap aux;
    bool failed = false;
    std::string error;
};

struct HarnessOptions {
    EvaluationOptions evaluation;
    /// 0 means hardware concurrency; VAREST_THREADS caps it either way.
    unsigned threads = 0;
};

/// reps × estimators records ordered by (rep, position in `ids`). Estimator failures
/// produce flagged records with NaN estimates instead of aborting the run.
std::vector<RepRecord> run_scenario(const ScenarioConfig& cfg, const std::vector<EstimatorId>& ids,
                                    const HarnessOptions& options = {});

struct SummaryStats {
    EstimatorId estimator_id = EstimatorId::naive;
    std::size_t count = 0;
    double mean = 0.0;
    double bias = 0.0;  ///< true τ² - mean
    double se = 0.0;    ///< sample SD, n - 1 divisor
    double rmse = 0.0;
    double rmse_sd = 0.0;  ///< sd(e²) / (2 rmse √m)
};

/// One row per estimator present, in estimator-id order. Failed records are skipped.
/// Throws InsufficientRecords when an estimator has fewer than two usable records.
std::vector<SummaryStats> summarize(const std::vector<RepRecord>& records, double true_tau2);

}  // namespace varest
