#include "varest/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "varest/errors.hpp"
#include "varest/harness.hpp"
#include "varest/io.hpp"

namespace varest {

namespace {

/// Raised for invalid user configuration; maps to exit status 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonFlags {
    std::string estimators;
    bool select_split = false;
    double select_split_fraction = 0.5;
    std::size_t select_cap = 50;
    bool empirical = false;
    std::string initial = "naive";
    std::size_t boot = 200;
    std::string variance = "none";
};

struct SimulateFlags {
    std::string scenario;
    std::size_t n = 0, p = 0, b_size = 5, reps = 0;
    double tau2 = 0.0, tau2b = 0.0, sigma2 = 1.0, df = 8.0, mix_weight = 0.5;
    std::uint64_t seed = 0;
    std::string x_dist = "gaussian";
    std::string records, summary;
    unsigned threads = 0;
    bool no_timing = false;
};

struct EstimateFlags {
    std::string data, model, output;
    std::uint64_t seed = 0;
    bool clamp = false;
    bool center_y = false;
};

struct SummarizeFlags {
    std::string records, summary;
    double true_tau2 = 0.0;
};

void add_common(CLI::App* cmd, CommonFlags& f, const std::string& default_estimators) {
    f.estimators = default_estimators;
    cmd->add_option("--estimators", f.estimators, "Comma-separated estimator ids")
        ->capture_default_str();
    cmd->add_flag("--select-split", f.select_split, "Select B_gamma on a separate row block");
    cmd->add_option("--select-split-fraction", f.select_split_fraction,
                    "Fraction of rows used for selection")
        ->capture_default_str();
    cmd->add_option("--select-cap", f.select_cap, "Largest allowed |B_gamma| (0 disables the cap)")
        ->capture_default_str();
    cmd->add_flag("--empirical", f.empirical, "Add the bootstrap empirical estimator");
    cmd->add_option("--initial", f.initial, "Initial estimator of the empirical estimator")
        ->capture_default_str();
    cmd->add_option("--boot", f.boot, "Bootstrap resamples")->capture_default_str();
    cmd->add_option("--variance", f.variance, "none | theory | gaussian-plugin | tilde")
        ->capture_default_str();
}

std::vector<EstimatorId> estimator_list(const CommonFlags& f) {
    std::vector<EstimatorId> ids = parse_estimator_list(f.estimators);
    if (f.empirical && std::find(ids.begin(), ids.end(), EstimatorId::empirical) == ids.end())
        ids.push_back(EstimatorId::empirical);
    return ids;
}

EvaluationOptions evaluation_options(const CommonFlags& f) {
    EvaluationOptions o;
    o.selection.split = f.select_split;
    o.selection.split_fraction = f.select_split_fraction;
    if (f.select_cap == 0)
        o.selection.cap.reset();
    else
        o.selection.cap = f.select_cap;
    o.n_boot = f.boot;
    o.initial = parse_estimator_id(f.initial);
    if (o.initial == EstimatorId::oracle || o.initial == EstimatorId::empirical)
        throw ConfigError("--initial cannot be '" + f.initial + "'");
    if (o.n_boot < 2) throw ConfigError("--boot must be at least 2");
    if (!(f.select_split_fraction > 0.0 && f.select_split_fraction < 1.0))
        throw ConfigError("--select-split-fraction must lie strictly between 0 and 1");
    o.variance = parse_variance_method(f.variance);
    return o;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    return in;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << content;
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::string render_records(const std::vector<RepRecord>& records) {
    std::ostringstream os;
    write_records_csv(os, records);
    return os.str();
}

std::string render_summary(const std::vector<SummaryStats>& stats) {
    std::ostringstream os;
    write_summary_csv(os, stats);
    return os.str();
}

int cmd_simulate(CLI::App& cmd, const SimulateFlags& f, const CommonFlags& common, std::ostream& out,
                 std::ostream& err) {
    ScenarioConfig cfg;
    std::vector<std::string> from_file;
    if (!f.scenario.empty()) {
        auto in = open_input(f.scenario);
        cfg = read_scenario_json(in, cfg, &from_file);
    }
    auto given = [&](const char* flag, const char* key) {
        return cmd.count(flag) > 0 ||
               std::find(from_file.begin(), from_file.end(), key) != from_file.end();
    };
    const std::pair<const char*, const char*> required[] = {
        {"--n", "n"}, {"--p", "p"}, {"--tau2", "tau2"}, {"--tau2b", "tau2_b"}, {"--reps", "reps"},
        {"--seed", "seed"}};
    for (const auto& [flag, key] : required)
        if (!given(flag, key)) throw ConfigError(std::string("missing required option ") + flag);

    if (cmd.count("--n")) cfg.n = f.n;
    if (cmd.count("--p")) cfg.p = f.p;
    if (cmd.count("--tau2")) cfg.tau2 = f.tau2;
    if (cmd.count("--tau2b")) cfg.tau2_b = f.tau2b;
    if (cmd.count("--sigma2")) cfg.sigma2 = f.sigma2;
    if (cmd.count("--b-size")) cfg.b_size = f.b_size;
    if (cmd.count("--reps")) cfg.reps = f.reps;
    if (cmd.count("--seed")) cfg.seed = f.seed;
    if (cmd.count("--df")) cfg.df = f.df;
    if (cmd.count("--mix-weight")) cfg.mix_weight = f.mix_weight;
    if (cmd.count("--x-dist")) cfg.x_dist = parse_x_distribution(f.x_dist, &cfg.df);
    validate(cfg);

    HarnessOptions options;
    options.evaluation = evaluation_options(common);
    options.evaluation.record_timing = !f.no_timing;
    options.threads = f.threads;
    const auto ids = estimator_list(common);

    const auto records = run_scenario(cfg, ids, options);
    const std::string records_text = render_records(records);
    if (!f.records.empty()) write_file(f.records, records_text);

    // Summarizing the rendered records keeps this output identical to `summarize`.
    std::istringstream reread(records_text);
    const auto stats = summarize(read_records_csv(reread), cfg.tau2);
    if (!f.summary.empty()) write_file(f.summary, render_summary(stats));
    out << format_summary_table(stats);

    std::size_t failures = 0;
    for (const auto& r : records) failures += r.failed ? 1 : 0;
    if (failures) err << "warning: " << failures << " estimator evaluations failed\n";
    return 0;
}

int cmd_estimate(const EstimateFlags& f, const CommonFlags& common, std::ostream& out,
                 std::ostream& err) {
    if (f.data.empty()) throw ConfigError("missing required option --data");
    if (f.model.empty()) throw ConfigError("missing required option --model");
    const auto ids = estimator_list(common);
    if (std::find(ids.begin(), ids.end(), EstimatorId::oracle) != ids.end())
        throw ConfigError("the oracle estimator needs the true coefficients and is simulation-only");
    EvaluationOptions options = evaluation_options(common);
    if (options.variance == VarianceMethod::theory)
        throw ConfigError("--variance theory needs the true coefficients; use gaussian-plugin or tilde");
    options.record_timing = false;

    RawDataset raw;
    {
        auto in = open_input(f.data);
        raw = read_dataset_csv(in);
    }
    CovariateModel model = [&] {
        auto in = open_input(f.model);
        return read_model_json(in);
    }();
    if (model.p() != static_cast<std::size_t>(raw.x.cols()))
        throw ConfigError("dataset has " + std::to_string(raw.x.cols()) +
                          " covariates but the model describes " + std::to_string(model.p()));
    const LabeledDataset ds = make_whitened_dataset(raw.x, raw.y, model, f.center_y);

    auto outcomes = evaluate_estimators(ds, model, ids, options, nullptr, f.seed);
    bool hard_failure = false;
    for (auto& o : outcomes) {
        if (o.report && f.clamp) o.report = clamped(*o.report);
        if (!o.report) {
            hard_failure = hard_failure || !o.degenerate;
            err << (o.degenerate ? "warning: " : "error: ") << to_string(o.id) << ": " << o.error << '\n';
        }
    }
    std::ostringstream os;
    write_estimates_csv(os, outcomes);
    if (f.output.empty())
        out << os.str();
    else
        write_file(f.output, os.str());
    return hard_failure ? 1 : 0;
}

int cmd_summarize(const SummarizeFlags& f, std::ostream& out) {
    std::vector<RepRecord> records;
    {
        auto in = open_input(f.records);
        records = read_records_csv(in);
    }
    std::vector<SummaryStats> stats;
    try {
        stats = summarize(records, f.true_tau2);
    } catch (const InsufficientRecords& e) {
        throw ConfigError(e.what());
    }
    const std::string text = render_summary(stats);
    if (f.summary.empty())
        out << text;
    else
        write_file(f.summary, text);
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Unbiased estimation of explained variance with a known covariate distribution",
                 "varest"};
    app.require_subcommand(1);

    SimulateFlags sim;
    CommonFlags sim_common;
    auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo scenario");
    simulate->add_option("--scenario", sim.scenario, "Scenario JSON file");
    simulate->add_option("--n", sim.n, "Observations");
    simulate->add_option("--p", sim.p, "Covariates");
    simulate->add_option("--tau2", sim.tau2, "Signal level");
    simulate->add_option("--tau2b", sim.tau2b, "Signal mass on the strong set");
    simulate->add_option("--sigma2", sim.sigma2, "Noise variance")->capture_default_str();
    simulate->add_option("--b-size", sim.b_size, "Size of the strong set")->capture_default_str();
    simulate->add_option("--reps", sim.reps, "Replications");
    simulate->add_option("--seed", sim.seed, "Random seed");
    simulate->add_option("--x-dist", sim.x_dist, "gaussian | scaled-t | scaled-t(<df>) | rademacher-mix")
        ->capture_default_str();
    simulate->add_option("--df", sim.df, "Degrees of freedom for scaled-t")->capture_default_str();
    simulate->add_option("--mix-weight", sim.mix_weight, "Rademacher share of rademacher-mix")
        ->capture_default_str();
    simulate->add_option("--records", sim.records, "Per-replication records CSV path");
    simulate->add_option("--summary", sim.summary, "Summary CSV path");
    simulate->add_option("--threads", sim.threads, "Worker threads (0 = all cores)");
    simulate->add_flag("--no-timing", sim.no_timing, "Write wall_ms as 0 for byte-stable records");
    add_common(simulate, sim_common, "naive,single,selection,oracle");

    EstimateFlags est;
    CommonFlags est_common;
    auto* estimate = app.add_subcommand("estimate", "Estimate tau2 and sigma2 from a dataset");
    estimate->add_option("--data", est.data, "Dataset CSV with header y,x1,...,xp");
    estimate->add_option("--model", est.model, "Covariate model JSON");
    estimate->add_option("--output", est.output, "Output CSV path (default stdout)");
    estimate->add_option("--seed", est.seed, "Bootstrap seed")->capture_default_str();
    estimate->add_flag("--clamp", est.clamp, "Report max(0, .) of tau2 and sigma2");
    estimate->add_flag("--center-y", est.center_y, "Center y before estimation");
    add_common(estimate, est_common, "naive");

    SummarizeFlags summ;
    auto* summarize_cmd = app.add_subcommand("summarize", "Summarize a records CSV");
    summarize_cmd->add_option("--records", summ.records, "Records CSV")->required();
    summarize_cmd->add_option("--true-tau2", summ.true_tau2, "True signal level")->required();
    summarize_cmd->add_option("--summary", summ.summary, "Summary CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(*simulate, sim, sim_common, out, err);
        if (estimate->parsed()) return cmd_estimate(est, est_common, out, err);
        return cmd_summarize(summ, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const InvalidScenario& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const InvalidModel& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const NearSingularCovariance& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const InvalidDataset& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace varest
