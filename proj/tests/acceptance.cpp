// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance            run all twelve
//   acceptance --only 4,8 run a subset
//   acceptance --known-failure 6
//                         still report criterion 6, but do not let it set the exit status

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support/montecarlo.hpp"
#include "support/oracles.hpp"
#include "varest/estimators.hpp"
#include "varest/harness.hpp"
#include "varest/parallel.hpp"
#include "varest/selection.hpp"
#include "varest/simgen.hpp"
#include "varest/ustat_kernels.hpp"
#include "varest/variance.hpp"
#include "varest/zeroboost.hpp"

using namespace varest;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* pattern, double a) {
    char buf[96];
    std::snprintf(buf, sizeof buf, pattern, a);
    return buf;
}

std::string fmt(const char* pattern, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, a, b);
    return buf;
}

std::string fmt(const char* pattern, double a, double b, double c) {
    char buf[200];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

unsigned g_threads = 0;

/// columns[k][rep] filled by fn(rep, row) with row.size() == k.
std::vector<std::vector<double>> collect(std::size_t reps, std::size_t k,
                                         const std::function<void(std::size_t, double*)>& fn) {
    std::vector<std::vector<double>> rows(reps, std::vector<double>(k));
    parallel_for(reps, worker_count(g_threads), [&](std::size_t r) { fn(r, rows[r].data()); });
    std::vector<std::vector<double>> cols(k, std::vector<double>(reps));
    for (std::size_t r = 0; r < reps; ++r)
        for (std::size_t c = 0; c < k; ++c) cols[c][r] = rows[r][c];
    return cols;
}

ScenarioConfig scenario(std::size_t n, std::size_t p, double tau2, double tau2_b, std::uint64_t seed,
                        std::size_t b_size = 5) {
    ScenarioConfig cfg;
    cfg.n = n;
    cfg.p = p;
    cfg.tau2 = tau2;
    cfg.tau2_b = tau2_b;
    cfg.sigma2 = 1.0;
    cfg.b_size = tau2_b > 0.0 ? b_size : 0;
    cfg.seed = seed;
    validate(cfg);
    return cfg;
}

bool within(double value, double centre, double half_width) {
    return std::abs(value - centre) <= half_width;
}

// ---------------------------------------------------------------------------

Verdict kernels() {
    const auto start = Clock::now();
    std::array<double, 8> worst{};
    const char* names[] = {"pair", "triple", "chain", "offdiag-square", "psi", "c-hat numerator",
                           "beta'A beta", "|A|_F^2"};
    std::mt19937_64 rng(20240101);
    for (int inst = 0; inst < 500; ++inst) {
        const auto n = static_cast<Eigen::Index>(std::uniform_int_distribution<int>(3, 30)(rng));
        const auto p = static_cast<Eigen::Index>(std::uniform_int_distribution<int>(2, 8)(rng));
        const Matrix x = oracle::random_matrix(rng, n, p);
        const Vector y = oracle::random_vector(rng, n);
        const Vector u = oracle::random_vector(rng, n), v = oracle::random_vector(rng, n),
                     t = oracle::random_vector(rng, n);
        const auto model = CovariateModel::standard_gaussian(static_cast<std::size_t>(p));
        const LabeledDataset ds(x, y);
        const WMatrix w = build_w(ds);
        const GramMatrix g = gram(w);
        const Matrix wm = oracle::w_matrix(x, y);
        const Matrix gm = oracle::gram(wm);
        const auto tilde = tilde_components(w, g);

        auto note = [&](std::size_t k, double fast, double slow) {
            worst[k] = std::max(worst[k], oracle::rel_err(fast, slow));
        };
        note(0, pair_sum_distinct(u, v), oracle::pair_sum(u, v));
        note(1, triple_sum_distinct(u, v, t), oracle::triple_sum(u, v, t));
        note(2, chain_sum_distinct(g), oracle::chain_sum(gm));
        note(3, offdiag_square_sum(g), oracle::offdiag_square_sum(gm));
        std::uniform_int_distribution<Eigen::Index> col(0, p - 1);
        const Eigen::Index j = col(rng), jp = col(rng);
        note(4, psi_hat(ds, w, static_cast<std::size_t>(j), static_cast<std::size_t>(jp), model),
             oracle::psi(x, y, j, jp));
        note(4, psi_hat(ds, w, static_cast<std::size_t>(j), static_cast<std::size_t>(j), model),
             oracle::psi(x, y, j, j));
        note(5, single_numerator(w, build_single_zero(ds, model)), oracle::single_numerator(x, y));
        note(6, tilde.beta_a_beta, oracle::beta_a_beta(wm));
        note(7, tilde.frobenius_a2, oracle::frobenius_a2(wm));
    }
    const double secs = seconds_since(start);
    double max_err = 0.0;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < worst.size(); ++k)
        if (worst[k] >= max_err) max_err = worst[k], arg = k;
    return {max_err <= 1e-10 && secs < 60.0,
            fmt("max rel err %.2e", max_err) + " (" + names[arg] + "), " + fmt("%.1f s", secs)};
}

Verdict unbiasedness() {
    const auto start = Clock::now();
    const auto cfg = scenario(50, 20, 1.0, 1.0 / 3.0, 2);
    const auto beta = build_beta(cfg);
    const auto model = scenario_model(cfg);
    const auto b_set = strong_set(cfg);
    const auto cols = collect(20000, 4, [&](std::size_t r, double* out) {
        const auto ds = generate_dataset(cfg, beta, r);
        const WMatrix w = build_w(ds);
        out[0] = naive_tau2(w);
        out[1] = t_oracle(ds, w, beta, model);
        out[2] = t_full(ds, w, model);
        out[3] = t_b(ds, w, b_set, model);
    });
    const char* names[] = {"naive", "oracle", "full", "t_b"};
    bool pass = true;
    std::string detail;
    for (std::size_t k = 0; k < 4; ++k) {
        const auto m = mc::moments(cols[k]);
        const double z = (m.mean - 1.0) / m.se_mean;
        pass = pass && std::abs(z) <= 3.0;
        detail += std::string(k ? ", " : "") + names[k] + fmt(" z=%+.2f", z);
    }
    const double secs = seconds_since(start);
    return {pass && secs < 300.0, detail + fmt(", %.1f s", secs)};
}

Verdict exact_variance() {
    const auto start = Clock::now();
    const auto cfg = scenario(8, 3, 1.0, 0.6, 3, 1);
    const auto beta = build_beta(cfg);
    const auto cols = collect(100000, 1, [&](std::size_t r, double* out) {
        out[0] = naive_tau2(build_w(generate_dataset(cfg, beta, r)));
    });
    const auto m = mc::moments(cols[0]);
    const double theory = var_naive_theory(beta, cfg.sigma2, scenario_model(cfg), cfg.n);
    const double z = (m.var - theory) / m.se_var;
    const double secs = seconds_since(start);
    return {std::abs(z) <= 3.0 && secs < 120.0,
            fmt("empirical %.5f, theory %.5f", m.var, theory) + fmt(", z=%+.2f, %.1f s", z, secs)};
}

// Criteria 4 and 5 share one set of datasets.
struct FlatRun {
    std::vector<std::vector<double>> cols;  // naive, oracle, T_c*, c-hat
    double c_star = 0.0;
    double seconds = 0.0;
};

const FlatRun& flat_run() {
    static const FlatRun run = [] {
        const auto start = Clock::now();
        const auto cfg = scenario(200, 200, 1.0, 0.0, 4);
        const auto beta = build_beta(cfg);
        const auto model = scenario_model(cfg);
        FlatRun out;
        out.c_star = c_star_oracle(beta, build_single_zero(generate_dataset(cfg, beta, 0), model), model);
        out.cols = collect(50000, 4, [&](std::size_t r, double* row) {
            const auto ds = generate_dataset(cfg, beta, r);
            const WMatrix w = build_w(ds);
            const auto single = build_single_zero(ds, model);
            row[0] = naive_tau2(w);
            row[1] = t_oracle(ds, w, beta, model);
            row[2] = t_c_star(w, single, out.c_star);
            row[3] = c_hat_star(w, single);
        });
        out.seconds = seconds_since(start);
        return out;
    }();
    return run;
}

Verdict oracle_constants() {
    const auto& run = flat_run();
    const double n = 200.0;
    const double naive = n * mc::moments(run.cols[0]).var;
    const double oracle_v = n * mc::moments(run.cols[1]).var;
    return {within(naive, 20.0, 1.5) && within(oracle_v, 12.0, 1.5) && run.seconds < 600.0,
            fmt("n·Var naive %.2f (20±1.5), n·Var oracle %.2f (12±1.5)", naive, oracle_v) +
                fmt(", %.1f s", run.seconds)};
}

Verdict single_constant() {
    const auto& run = flat_run();
    const double n = 200.0;
    const double v = n * mc::moments(run.cols[2]).var;
    const auto c = mc::moments(run.cols[3]);
    const double z = (c.mean - 4.0 / 200.0) / c.se_mean;
    return {within(v, 12.0, 1.5) && std::abs(z) <= 3.0,
            fmt("n·Var T_c* %.2f (12±1.5), mean c-hat %.5f", v, c.mean) + fmt(" vs 4/p, z=%+.2f", z)};
}

Verdict full_cost() {
    const auto start = Clock::now();
    const auto cfg = scenario(200, 200, 1.0, 0.0, 6);
    const auto beta = build_beta(cfg);
    const auto model = scenario_model(cfg);
    const auto cols = collect(20000, 1, [&](std::size_t r, double* out) {
        const auto ds = generate_dataset(cfg, beta, r);
        out[0] = t_full(ds, build_w(ds), model);
    });
    const double v = 200.0 * mc::moments(cols[0]).var;
    const double secs = seconds_since(start);
    return {within(v, 44.0, 4.0), fmt("n·Var full %.2f (44±4), %.1f s", v, secs)};
}

Verdict selection_reduction() {
    const auto start = Clock::now();
    const auto cfg = scenario(200, 200, 1.0, 0.5, 7);
    const auto beta = build_beta(cfg);
    const auto model = scenario_model(cfg);
    const auto b_set = strong_set(cfg);
    const auto cols = collect(50000, 2, [&](std::size_t r, double* out) {
        const auto ds = generate_dataset(cfg, beta, r);
        const WMatrix w = build_w(ds);
        out[0] = naive_tau2(w);
        out[1] = t_b(ds, w, b_set, model);
    });
    const double diff = 200.0 * (mc::moments(cols[0]).var - mc::moments(cols[1]).var);
    const double secs = seconds_since(start);
    return {within(diff, 2.0, 0.6), fmt("n·[Var naive - Var t_b] %.3f (2±0.6), %.1f s", diff, secs)};
}

struct TableRow {
    double tau2, share;
    std::array<double, 4> rmse;     // naive, selection, single, OOE
    std::array<double, 4> rmse_sd;  // 1000·σ̂_RMSE / 1000
};

const TableRow kPublishedRmse[] = {
    {1.0, 1.0 / 3.0, {0.258, 0.244, 0.213, 0.193}, {0.019, 0.018, 0.014, 0.014}},
    {1.0, 2.0 / 3.0, {0.259, 0.219, 0.233, 0.185}, {0.021, 0.018, 0.018, 0.015}},
    {1.0, 0.99, {0.261, 0.171, 0.253, 0.171}, {0.028, 0.013, 0.028, 0.015}},
    {2.0, 1.0 / 3.0, {0.435, 0.410, 0.342, 0.286}, {0.033, 0.030, 0.022, 0.021}},
    {2.0, 2.0 / 3.0, {0.441, 0.360, 0.392, 0.273}, {0.038, 0.030, 0.030, 0.022}},
    {2.0, 0.99, {0.458, 0.265, 0.443, 0.250}, {0.051, 0.020, 0.050, 0.022}},
};

Verdict published_rmse() {
    const auto start = Clock::now();
    const std::vector<EstimatorId> ids{EstimatorId::naive, EstimatorId::selection, EstimatorId::single,
                                       EstimatorId::oracle};
    HarnessOptions opts;
    opts.threads = g_threads;
    opts.evaluation.record_timing = false;
    bool pass = true;
    std::ostringstream detail;
    double worst = 0.0;
    for (std::size_t s = 0; s < std::size(kPublishedRmse); ++s) {
        const auto& row = kPublishedRmse[s];
        ScenarioConfig cfg = scenario(400, 400, row.tau2, row.share * row.tau2, 80 + s);
        cfg.reps = 400;
        const auto stats = summarize(run_scenario(cfg, ids, opts), cfg.tau2);
        detail << "\n       tau2=" << row.tau2 << " B=" << fmt("%.0f%%", 100.0 * row.share) << ":";
        for (std::size_t k = 0; k < ids.size(); ++k) {
            const auto it = std::find_if(stats.begin(), stats.end(),
                                         [&](const SummaryStats& st) { return st.estimator_id == ids[k]; });
            const double sd = std::hypot(it->rmse_sd, row.rmse_sd[k]);
            const double z = (it->rmse - row.rmse[k]) / sd;
            worst = std::max(worst, std::abs(z));
            pass = pass && std::abs(z) <= 3.0;
            detail << " " << to_string(ids[k]) << fmt(" %.3f/%.3f", it->rmse, row.rmse[k]) << fmt("(z=%+.1f)", z);
        }
    }
    const double secs = seconds_since(start);
    return {pass && secs < 1800.0, fmt("worst |z| %.2f, %.1f s", worst, secs) + detail.str()};
}

Verdict dicker_equivalence() {
    const auto start = Clock::now();
    std::vector<double> medians;
    for (const std::size_t n : {100, 200, 400}) {
        const auto cfg = scenario(n, n, 1.0, 0.0, 9);
        const auto beta = build_beta(cfg);
        auto cols = collect(200, 1, [&](std::size_t r, double* out) {
            const auto ds = generate_dataset(cfg, beta, r);
            out[0] = std::sqrt(static_cast<double>(n)) * std::abs(naive_tau2(build_w(ds)) - dicker_tau2(ds));
        });
        auto& v = cols[0];
        std::nth_element(v.begin(), v.begin() + 100, v.end());
        const double hi = v[100];
        const double lo = *std::max_element(v.begin(), v.begin() + 100);
        medians.push_back(0.5 * (lo + hi));
    }
    const bool pass = medians[0] > medians[1] && medians[1] > medians[2];
    return {pass, fmt("medians %.4f > %.4f > %.4f", medians[0], medians[1], medians[2]) +
                      fmt(", %.1f s", seconds_since(start))};
}

Verdict variance_consistency() {
    const auto start = Clock::now();
    ScenarioConfig cfg = scenario(400, 400, 1.0, 1.0 / 3.0, 10);
    cfg.reps = 200;
    const std::vector<EstimatorId> ids{EstimatorId::naive, EstimatorId::single, EstimatorId::selection};
    HarnessOptions opts;
    opts.threads = g_threads;
    opts.evaluation.record_timing = false;

    auto ratios = [&](VarianceMethod method) {
        opts.evaluation.variance = method;
        const auto records = run_scenario(cfg, ids, opts);
        std::vector<double> out;
        for (const auto id : ids) {
            std::vector<double> est, var;
            for (const auto& r : records)
                if (r.estimator_id == id && !r.failed && r.variance_estimate) {
                    est.push_back(r.tau2_hat);
                    var.push_back(*r.variance_estimate);
                }
            out.push_back(mc::moments(var).mean / mc::moments(est).var);
        }
        return out;
    };
    const auto plug = ratios(VarianceMethod::gaussian_plugin);
    const auto tilde = ratios(VarianceMethod::tilde);
    bool pass = std::abs(plug[0] - 1.0) <= 0.10;
    for (const double r : tilde) pass = pass && std::abs(r - 1.0) <= 0.20;
    return {pass, fmt("ratio mean(var-hat)/Var: gaussian naive %.3f (±10%%); tilde naive %.3f, ", plug[0],
                      tilde[0]) +
                      fmt("single %.3f, selection %.3f (±20%%)", tilde[1], tilde[2]) +
                      fmt(", %.1f s", seconds_since(start))};
}

Verdict bootstrap_non_degradation() {
    const auto start = Clock::now();
    ScenarioConfig cfg = scenario(400, 400, 2.0, 2.0 / 3.0, 11);
    cfg.reps = 100;
    const std::vector<EstimatorId> ids{EstimatorId::naive, EstimatorId::empirical};
    HarnessOptions opts;
    opts.evaluation.record_timing = false;
    opts.evaluation.n_boot = 200;
    opts.evaluation.initial = EstimatorId::naive;

    opts.threads = 1;
    const auto serial = run_scenario(cfg, ids, opts);
    opts.threads = 4;
    const auto parallel = run_scenario(cfg, ids, opts);
    bool identical = serial.size() == parallel.size();
    for (std::size_t i = 0; identical && i < serial.size(); ++i)
        identical = serial[i].tau2_hat == parallel[i].tau2_hat && serial[i].sigma2_hat == parallel[i].sigma2_hat &&
                    serial[i].aux == parallel[i].aux;

    // Worker count inside a single bootstrap run.
    const auto beta = build_beta(cfg);
    const auto ds = generate_dataset(cfg, beta, 0);
    BootstrapConfig bc;
    bc.n_boot = 200;
    bc.seed = 99;
    bc.threads = 1;
    const double one = empirical_estimator(ds, scenario_model(cfg), bc).tau2;
    bc.threads = 4;
    identical = identical && one == empirical_estimator(ds, scenario_model(cfg), bc).tau2;

    const auto stats = summarize(serial, cfg.tau2);
    const double se_naive = stats[0].se, se_emp = stats[1].se;
    const bool pass = identical && se_emp <= 1.05 * se_naive;
    return {pass, fmt("SE empirical %.4f vs 1.05·SE naive %.4f", se_emp, 1.05 * se_naive) +
                      (identical ? ", bitwise identical across workers" : ", NOT identical across workers") +
                      fmt(", %.1f s", seconds_since(start))};
}

Verdict performance() {
    ScenarioConfig cfg = scenario(400, 400, 1.0, 1.0 / 3.0, 12);
    cfg.reps = 100;
    HarnessOptions opts;
    opts.threads = g_threads;
    auto start = Clock::now();
    run_scenario(cfg, {EstimatorId::naive, EstimatorId::single, EstimatorId::selection, EstimatorId::oracle},
                 opts);
    const double scenario_secs = seconds_since(start);

    ScenarioConfig big = scenario(2000, 2000, 1.0, 1.0 / 3.0, 12);
    const auto ds = generate_dataset(big, build_beta(big), 0);
    start = Clock::now();
    const double est = naive_tau2(build_w(ds));
    const double naive_secs = seconds_since(start);
    return {scenario_secs < 60.0 && naive_secs < 1.0 && std::isfinite(est),
            fmt("scenario %.2f s (<60, %.0f workers), naive n=p=2000 %.3f s (<1)", scenario_secs,
                static_cast<double>(worker_count(g_threads)), naive_secs)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::vector<int> only, known;
    app.add_option("--only", only, "criterion numbers to run")->delimiter(',');
    app.add_option("--known-failure", known, "criteria whose failure is documented")->delimiter(',');
    app.add_option("--threads", g_threads, "worker threads (0 = all)");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"kernel oracle equivalence", kernels},
        {"unbiasedness", unbiasedness},
        {"exact variance of naive", exact_variance},
        {"oracle reduction constants 20/n and 12/n", oracle_constants},
        {"single zero-estimator constant 12/n", single_constant},
        {"cost of full estimation 44/n", full_cost},
        {"selection reduction 8 tau_B^4", selection_reduction},
        {"published RMSE reproduction", published_rmse},
        {"naive/Dicker equivalence", dicker_equivalence},
        {"variance-estimator consistency", variance_consistency},
        {"bootstrap estimator non-degradation and determinism", bootstrap_non_degradation},
        {"performance gate", performance},
    };
    const std::set<int> selected(only.begin(), only.end());
    const std::set<int> documented(known.begin(), known.end());
    int failures = 0, expected = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(id)) continue;
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const bool known_failure = documented.count(id) > 0;
        if (!v.pass) ++(known_failure ? expected : failures);
        std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << id << ". " << criteria[i].first << ": " << v.detail
                  << (!v.pass && known_failure ? " (known failure)" : "") << std::endl;
    }
    std::cout << failures << " unexpected failures, " << expected << " known failures" << std::endl;
    return failures ? 1 : 0;
}
