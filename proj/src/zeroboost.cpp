#include "varest/zeroboost.hpp"

#include <vector>

#include "varest/errors.hpp"
#include "varest/parallel.hpp"
#include "varest/rng.hpp"
#include "varest/summation.hpp"

namespace varest {

namespace {

constexpr std::uint32_t kBootstrapDomain = 0xB007;

}  // namespace

InitialEstimator initial_estimator_for(EstimatorId id, const CovariateModel& model,
                                       const SelectionOptions& selection) {
    switch (id) {
        case EstimatorId::naive:
            return [](const LabeledDataset& ds) { return naive_tau2(build_w(ds)); };
        case EstimatorId::dicker:
            return [](const LabeledDataset& ds) { return dicker_tau2(ds); };
        case EstimatorId::full:
            return [model](const LabeledDataset& ds) { return t_full(ds, build_w(ds), model); };
        case EstimatorId::single:
            return [model](const LabeledDataset& ds) {
                return t_c_hat_star(build_w(ds), build_single_zero(ds, model));
            };
        case EstimatorId::selection:
            return [model, selection](const LabeledDataset& ds) {
                return t_gamma(ds, model, selection).tau2;
            };
        case EstimatorId::oracle:
        case EstimatorId::empirical:
            break;
    }
    throw InvalidModel("'" + std::string(to_string(id)) + "' cannot serve as an initial estimator");
}

EstimateReport empirical_estimator(const LabeledDataset& ds, const CovariateModel& model,
                                   const BootstrapConfig& cfg) {
    if (cfg.n_boot < 2) throw InvalidModel("bootstrap needs at least 2 resamples");
    const InitialEstimator initial =
        cfg.custom_initial ? cfg.custom_initial : initial_estimator_for(cfg.initial_estimator, model);

    const SingleZeroStat single = build_single_zero(ds, model);
    const double tau2_full = initial(ds);
    const auto n = ds.n();

    std::vector<double> tau2_boot(cfg.n_boot), g_boot(cfg.n_boot);
    parallel_for(cfg.n_boot, cfg.threads, [&](std::size_t b) {
        auto rng = make_stream(cfg.seed, b, kBootstrapDomain);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::vector<std::size_t> rows(n);
        for (auto& r : rows) r = pick(rng);
        const LabeledDataset resample = ds.take_rows(rows);
        try {
            tau2_boot[b] = initial(resample);
        } catch (const std::exception& e) {
            throw InitialEstimatorFailure(b, e.what());
        }
        // g_i depends only on row i, so the resample's g_n is a mean of the picked g_i.
        CompensatedSum g;
        for (const auto r : rows) g += single.g_per_obs[static_cast<Eigen::Index>(r)];
        g_boot[b] = g.value() / static_cast<double>(n);
    });

    const double mean_tau = compensated_sum(tau2_boot) / static_cast<double>(cfg.n_boot);
    const double mean_g = compensated_sum(g_boot) / static_cast<double>(cfg.n_boot);
    CompensatedSum cov;
    for (std::size_t b = 0; b < cfg.n_boot; ++b)
        cov += (tau2_boot[b] - mean_tau) * (g_boot[b] - mean_g);
    const double covariance = cov.value() / static_cast<double>(cfg.n_boot - 1);
    const double var_g_n = single.var_g / static_cast<double>(n);
    const double c_tilde = covariance / var_g_n;

    EstimateReport report = make_report(EstimatorId::empirical, tau2_full - c_tilde * single.g_n,
                                        sample_variance_y(ds.y()));
    report.aux["c_tilde"] = format_double(c_tilde);
    report.aux["n_boot"] = std::to_string(cfg.n_boot);
    report.aux["initial"] = cfg.custom_initial ? "custom" : std::string(to_string(cfg.initial_estimator));
    return report;
}

}  // namespace varest
