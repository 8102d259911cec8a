#include "varest/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>

#include "varest/errors.hpp"
#include "varest/parallel.hpp"
#include "varest/rng.hpp"
#include "varest/summation.hpp"
#include "varest/ustat_kernels.hpp"
#include "varest/variance.hpp"
#include "varest/zeroboost.hpp"

namespace varest {

namespace {

constexpr std::uint32_t kBootSeedDomain = 0xB5EED;

double as_double(std::size_t v) { return static_cast<double>(v); }

/// Lazily built quantities shared by the estimators of one dataset.
class DatasetCache {
public:
    DatasetCache(const LabeledDataset& ds, const CovariateModel& model) : ds_(ds), model_(model) {}

    const WMatrix& w() {
        if (!w_) w_.emplace(build_w(ds_));
        return *w_;
    }
    double sigma_y2() {
        if (!sigma_y2_) sigma_y2_ = sample_variance_y(ds_.y());
        return *sigma_y2_;
    }
    const SingleZeroStat& single() {
        if (!single_) single_.emplace(build_single_zero(ds_, model_));
        return *single_;
    }
    double var_tilde() {
        if (!var_tilde_) var_tilde_ = var_tilde_naive(w(), gram(w()), ds_.n());
        return *var_tilde_;
    }

private:
    const LabeledDataset& ds_;
    const CovariateModel& model_;
    std::optional<WMatrix> w_;
    std::optional<double> sigma_y2_;
    std::optional<SingleZeroStat> single_;
    std::optional<double> var_tilde_;
};

std::optional<double> theory_variance(EstimatorId id, const SimulationTruth& truth,
                                      const CovariateModel& model, std::size_t n, std::size_t n_eval) {
    switch (id) {
        case EstimatorId::naive:
        case EstimatorId::dicker:
            return var_naive_theory(truth.beta, truth.sigma2, model, n);
        case EstimatorId::oracle:
            return var_t_oracle_theory(truth.beta, truth.sigma2, model, n);
        case EstimatorId::full:
            return var_t_full_theory(truth.beta, truth.sigma2, model, n, model.p());
        case EstimatorId::single:
            return var_t_cstar_theory(truth.beta, truth.sigma2, model, n);
        case EstimatorId::selection:
            return var_t_b_theory(truth.beta, truth.sigma2, model, n_eval, truth.strong);
        case EstimatorId::empirical:
            break;
    }
    return std::nullopt;
}

struct Computed {
    EstimateReport report;
    std::optional<GammaFit> gamma;
};

Computed compute_point(EstimatorId id, const LabeledDataset& ds, const CovariateModel& model,
                       const EvaluationOptions& options, const SimulationTruth* truth,
                       std::uint64_t boot_seed, DatasetCache& cache) {
    Computed out;
    switch (id) {
        case EstimatorId::naive:
            out.report = make_report(id, naive_tau2(cache.w()), cache.sigma_y2());
            break;
        case EstimatorId::dicker:
            out.report = make_report(id, dicker_tau2(ds), cache.sigma_y2());
            break;
        case EstimatorId::oracle:
            if (!truth) throw InvalidModel("oracle estimator needs the true coefficients");
            out.report = make_report(id, t_oracle(ds, cache.w(), truth->beta, model), cache.sigma_y2());
            break;
        case EstimatorId::full:
            out.report = make_report(id, t_full(ds, cache.w(), model), cache.sigma_y2());
            break;
        case EstimatorId::single: {
            const double c = c_hat_star(cache.w(), cache.single());
            out.report = make_report(id, t_c_star(cache.w(), cache.single(), c), cache.sigma_y2());
            out.report.aux["c_hat"] = format_double(c);
            break;
        }
        case EstimatorId::selection:
            out.gamma = fit_t_gamma(ds, model, options.selection);
            out.report = out.gamma->report;
            break;
        case EstimatorId::empirical: {
            BootstrapConfig cfg;
            cfg.n_boot = options.n_boot;
            cfg.seed = boot_seed;
            cfg.initial_estimator = options.initial;
            cfg.custom_initial = initial_estimator_for(options.initial, model, options.selection);
            out.report = empirical_estimator(ds, model, cfg);
            out.report.aux["initial"] = std::string(to_string(options.initial));
            break;
        }
    }
    return out;
}

std::optional<double> estimated_variance(const Computed& c, const LabeledDataset& ds,
                                         const CovariateModel& model, VarianceMethod method,
                                         DatasetCache& cache) {
    const EstimatorId id = c.report.estimator_id;
    const auto n = ds.n();
    const auto p = ds.p();
    if (method == VarianceMethod::gaussian_plugin) {
        switch (id) {
            case EstimatorId::naive:
            case EstimatorId::dicker:
                return var_hat_naive_gaussian(c.report.tau2, cache.sigma_y2(), n, p);
            case EstimatorId::single: {
                const double base = var_hat_naive_gaussian(naive_tau2(cache.w()), cache.sigma_y2(), n, p);
                const double numer = single_numerator(cache.w(), cache.single());
                return base - numer * numer / (as_double(n) * cache.single().var_g);
            }
            case EstimatorId::selection: {
                const GammaFit& fit = *c.gamma;
                const double naive_eval = compensated_sum(fit.beta2_eval);
                const double base = var_hat_naive_gaussian(naive_eval, cache.sigma_y2(), fit.n_eval, p);
                return var_hat_t_gamma(base, fit.beta2_eval, fit.selection.selected, fit.n_eval);
            }
            default:
                return std::nullopt;
        }
    }
    if (method == VarianceMethod::tilde) {
        switch (id) {
            case EstimatorId::naive:
            case EstimatorId::dicker:
                return cache.var_tilde();
            case EstimatorId::single:
                return var_tilde_t_chat(cache.var_tilde(), cache.w(), cache.single(), n);
            case EstimatorId::selection: {
                const GammaFit& fit = *c.gamma;
                double base = 0.0;
                if (fit.selection.split_used) {
                    const LabeledDataset eval = ds.row_block(n - fit.n_eval, fit.n_eval);
                    const WMatrix w_eval = build_w(eval);
                    base = var_tilde_naive(w_eval, gram(w_eval), fit.n_eval);
                } else {
                    base = cache.var_tilde();
                }
                return var_tilde_t_gamma(base, fit.beta2_eval, fit.selection.selected, model,
                                         fit.n_eval);
            }
            default:
                return std::nullopt;
        }
    }
    return std::nullopt;
}

}  // namespace

std::string to_string(VarianceMethod method) {
    switch (method) {
        case VarianceMethod::none: return "none";
        case VarianceMethod::theory: return "theory";
        case VarianceMethod::gaussian_plugin: return "gaussian-plugin";
        case VarianceMethod::tilde: return "tilde";
    }
    return "unknown";
}

VarianceMethod parse_variance_method(std::string_view text) {
    if (text == "none") return VarianceMethod::none;
    if (text == "theory") return VarianceMethod::theory;
    if (text == "gaussian-plugin") return VarianceMethod::gaussian_plugin;
    if (text == "tilde") return VarianceMethod::tilde;
    throw ParseError("unknown variance method '" + std::string(text) + "'");
}

std::vector<EstimatorOutcome> evaluate_estimators(const LabeledDataset& ds,
                                                  const CovariateModel& model,
                                                  const std::vector<EstimatorId>& ids,
                                                  const EvaluationOptions& options,
                                                  const SimulationTruth* truth,
                                                  std::uint64_t boot_seed) {
    DatasetCache cache(ds, model);
    std::vector<EstimatorOutcome> outcomes;
    outcomes.reserve(ids.size());
    for (const EstimatorId id : ids) {
        EstimatorOutcome outcome;
        outcome.id = id;
        const auto start = std::chrono::steady_clock::now();
        try {
            Computed c = compute_point(id, ds, model, options, truth, boot_seed, cache);
            std::optional<double> var;
            if (options.variance == VarianceMethod::theory) {
                if (!truth) throw InvalidModel("theory variance needs the true coefficients");
                const std::size_t n_eval = c.gamma ? c.gamma->n_eval : ds.n();
                var = theory_variance(id, *truth, model, ds.n(), n_eval);
            } else if (options.variance == VarianceMethod::gaussian_plugin && !model.gaussian()) {
                c.report.aux["var_note"] = "gaussian-plugin needs a Gaussian model";
            } else {
                var = estimated_variance(c, ds, model, options.variance, cache);
            }
            if (var) {
                c.report.variance_estimate = *var;
                if (*var < 0.0) c.report.aux["var_negative"] = "1";
            }
            outcome.report = std::move(c.report);
        } catch (const DegenerateZeroEstimator& e) {
            outcome.degenerate = true;
            outcome.error = e.what();
        } catch (const std::exception& e) {
            outcome.error = e.what();
        }
        if (options.record_timing)
            outcome.wall_ms = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - start)
                                  .count();
        outcomes.push_back(std::move(outcome));
    }
    return outcomes;
}

std::vector<RepRecord> run_scenario(const ScenarioConfig& cfg, const std::vector<EstimatorId>& ids,
                                    const HarnessOptions& options) {
    validate(cfg);
    if (ids.empty()) throw InvalidScenario("no estimators requested");
    const CovariateModel model = scenario_model(cfg);
    SimulationTruth truth;
    truth.beta = build_beta(cfg);
    truth.sigma2 = cfg.sigma2;
    truth.strong = strong_set(cfg);

    std::vector<std::vector<RepRecord>> slots(cfg.reps);
    parallel_for(cfg.reps, worker_count(options.threads), [&](std::size_t rep) {
        const LabeledDataset ds = generate_dataset(cfg, truth.beta, rep);
        auto seeder = make_stream(cfg.seed, rep, kBootSeedDomain);
        const std::uint64_t boot_seed = seeder();
        const auto outcomes = evaluate_estimators(ds, model, ids, options.evaluation, &truth, boot_seed);
        auto& out = slots[rep];
        out.reserve(outcomes.size());
        for (const auto& o : outcomes) {
            RepRecord r;
            r.rep_index = rep;
            r.estimator_id = o.id;
            r.wall_ms = o.wall_ms;
            if (o.report) {
                r.tau2_hat = o.report->tau2;
                r.sigma2_hat = o.report->sigma2;
                r.variance_estimate = o.report->variance_estimate;
                r.aux = o.report->aux;
            } else {
                r.failed = true;
                r.error = o.error;
                r.tau2_hat = std::numeric_limits<double>::quiet_NaN();
                r.sigma2_hat = std::numeric_limits<double>::quiet_NaN();
            }
            out.push_back(std::move(r));
        }
    });

    std::vector<RepRecord> records;
    records.reserve(cfg.reps * ids.size());
    for (auto& s : slots)
        for (auto& r : s) records.push_back(std::move(r));
    return records;
}

std::vector<SummaryStats> summarize(const std::vector<RepRecord>& records, double true_tau2) {
    if (records.empty()) throw InsufficientRecords("no records to summarize");
    std::map<EstimatorId, std::vector<double>> by_id;
    for (const auto& r : records) {
        auto& values = by_id[r.estimator_id];
        if (!r.failed && std::isfinite(r.tau2_hat)) values.push_back(r.tau2_hat);
    }

    std::vector<SummaryStats> out;
    for (auto& [id, values] : by_id) {
        const std::size_t m = values.size();
        if (m < 2)
            throw InsufficientRecords("estimator '" + std::string(to_string(id)) + "' has " +
                                      std::to_string(m) + " usable records, need 2");
        // Sorting makes every sum independent of the record order.
        std::sort(values.begin(), values.end());
        const double md = as_double(m);
        const double mean = compensated_sum(values) / md;

        CompensatedSum dev2, err2;
        std::vector<double> sq(m);
        for (std::size_t k = 0; k < m; ++k) {
            const double d = values[k] - mean;
            dev2 += d * d;
            const double e = values[k] - true_tau2;
            sq[k] = e * e;
            err2 += sq[k];
        }
        const double mse = err2.value() / md;
        CompensatedSum sq_dev;
        for (const double s : sq) sq_dev += (s - mse) * (s - mse);

        SummaryStats s;
        s.estimator_id = id;
        s.count = m;
        s.mean = mean;
        s.bias = true_tau2 - mean;
        s.se = std::sqrt(dev2.value() / (md - 1.0));
        s.rmse = std::sqrt(mse);
        const double sd_sq = std::sqrt(sq_dev.value() / (md - 1.0));
        s.rmse_sd = s.rmse > 0.0 ? sd_sq / (2.0 * s.rmse * std::sqrt(md)) : 0.0;
        out.push_back(s);
    }
    return out;
}

}  // namespace varest
