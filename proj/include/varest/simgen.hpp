#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "varest/core_model.hpp"

namespace varest {

enum class XDistribution { gaussian, scaled_t, rademacher_mix };

std::string to_string(XDistribution dist);
/// Accepts "gaussian", "scaled-t", "scaled-t(<df>)" and "rademacher-mix". A df given in
/// parentheses is written to *df_out when non-null.
XDistribution parse_x_distribution(std::string_view text, double* df_out = nullptr);

struct ScenarioConfig {
    std::size_t n = 400;
    std::size_t p = 400;
    double tau2 = 1.0;
    double tau2_b = 1.0 / 3.0;
    double sigma2 = 1.0;
    std::size_t b_size = 5;
    std::size_t reps = 100;
    std::uint64_t seed = 0;
    XDistribution x_dist = XDistribution::gaussian;
    /// Degrees of freedom of the scaled-t covariates (> 4).
    double df = 8.0;
    /// Probability of a ±1 draw in the Rademacher/normal mixture.
    double mix_weight = 0.5;
};

/// Throws InvalidScenario describing the first violated constraint.
void validate(const ScenarioConfig& cfg);

/// Standardized fourth moment E X⁴ of one covariate under `cfg.x_dist`.
double fourth_moment(const ScenarioConfig& cfg);

/// Known whitened covariate model of the scenario (independent columns).
CovariateModel scenario_model(const ScenarioConfig& cfg);

/// β_j = √(τ_B²/|B|) on the first b_size columns and √((τ² - τ_B²)/(p - b_size)) elsewhere.
CoefficientVector build_beta(const ScenarioConfig& cfg);

/// Y = Xβ + ε with X drawn row by row, then ε ~ N(0, σ²). The stream depends only on
/// (cfg.seed, rep_index).
LabeledDataset generate_dataset(const ScenarioConfig& cfg, const CoefficientVector& beta,
                                std::size_t rep_index);

/// The strong set {0, ..., b_size - 1}.
std::vector<std::size_t> strong_set(const ScenarioConfig& cfg);

}  // namespace varest
