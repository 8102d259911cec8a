#include "varest/simgen.hpp"

#include <cmath>
#include <random>
#include <string>

#include "varest/errors.hpp"
#include "varest/rng.hpp"

namespace varest {

namespace {

constexpr std::uint32_t kDataDomain = 0xDA7A;

double as_double(std::size_t v) { return static_cast<double>(v); }

struct Sampler {
    XDistribution dist;
    std::normal_distribution<double> normal{0.0, 1.0};
    std::student_t_distribution<double> student;
    std::bernoulli_distribution coin;
    std::bernoulli_distribution sign{0.5};
    double t_scale;

    explicit Sampler(const ScenarioConfig& cfg)
        : dist(cfg.x_dist),
          student(cfg.df > 0.0 ? cfg.df : 1.0),
          coin(cfg.mix_weight),
          t_scale(cfg.df > 2.0 ? std::sqrt((cfg.df - 2.0) / cfg.df) : 1.0) {}

    double operator()(std::mt19937_64& rng) {
        switch (dist) {
            case XDistribution::gaussian:
                return normal(rng);
            case XDistribution::scaled_t:
                return t_scale * student(rng);
            case XDistribution::rademacher_mix:
                if (coin(rng)) return sign(rng) ? 1.0 : -1.0;
                return normal(rng);
        }
        return 0.0;
    }
};

}  // namespace

std::string to_string(XDistribution dist) {
    switch (dist) {
        case XDistribution::gaussian: return "gaussian";
        case XDistribution::scaled_t: return "scaled-t";
        case XDistribution::rademacher_mix: return "rademacher-mix";
    }
    return "unknown";
}

XDistribution parse_x_distribution(std::string_view text, double* df_out) {
    if (text == "gaussian") return XDistribution::gaussian;
    if (text == "rademacher-mix") return XDistribution::rademacher_mix;
    if (text == "scaled-t") return XDistribution::scaled_t;
    constexpr std::string_view prefix = "scaled-t(";
    if (text.size() > prefix.size() + 1 && text.substr(0, prefix.size()) == prefix &&
        text.back() == ')') {
        const std::string inner(text.substr(prefix.size(), text.size() - prefix.size() - 1));
        std::size_t used = 0;
        double df = 0.0;
        try {
            df = std::stod(inner, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != inner.size() || inner.empty())
            throw ParseError("bad degrees of freedom in '" + std::string(text) + "'");
        if (df_out) *df_out = df;
        return XDistribution::scaled_t;
    }
    throw ParseError("unknown covariate distribution '" + std::string(text) + "'");
}

void validate(const ScenarioConfig& cfg) {
    auto fail = [](const std::string& what) { throw InvalidScenario(what); };
    if (cfg.n < 2) fail("n must be at least 2");
    if (cfg.p < 1) fail("p must be at least 1");
    if (cfg.reps < 1) fail("reps must be at least 1");
    if (!std::isfinite(cfg.tau2) || cfg.tau2 < 0.0) fail("tau2 must be finite and >= 0");
    if (!std::isfinite(cfg.tau2_b) || cfg.tau2_b < 0.0) fail("tau2_b must be finite and >= 0");
    if (cfg.tau2_b > cfg.tau2) fail("tau2_b exceeds tau2");
    if (!std::isfinite(cfg.sigma2) || cfg.sigma2 < 0.0) fail("sigma2 must be finite and >= 0");
    if (cfg.b_size >= cfg.p) fail("b_size must be smaller than p");
    if (cfg.b_size == 0 && cfg.tau2_b > 0.0) fail("tau2_b > 0 needs b_size >= 1");
    if (cfg.x_dist == XDistribution::scaled_t && !(cfg.df > 4.0))
        fail("scaled-t covariates need df > 4 for a finite fourth moment");
    if (cfg.x_dist == XDistribution::rademacher_mix && !(cfg.mix_weight >= 0.0 && cfg.mix_weight <= 1.0))
        fail("mix_weight must lie in [0, 1]");
}

double fourth_moment(const ScenarioConfig& cfg) {
    switch (cfg.x_dist) {
        case XDistribution::gaussian: return 3.0;
        case XDistribution::scaled_t: return 3.0 * (cfg.df - 2.0) / (cfg.df - 4.0);
        case XDistribution::rademacher_mix: return 3.0 - 2.0 * cfg.mix_weight;
    }
    return 3.0;
}

CovariateModel scenario_model(const ScenarioConfig& cfg) {
    validate(cfg);
    return CovariateModel::standard(cfg.p, fourth_moment(cfg), cfg.x_dist == XDistribution::gaussian);
}

CoefficientVector build_beta(const ScenarioConfig& cfg) {
    validate(cfg);
    CoefficientVector out;
    out.beta.resize(static_cast<Eigen::Index>(cfg.p));
    const double strong = cfg.b_size ? std::sqrt(cfg.tau2_b / as_double(cfg.b_size)) : 0.0;
    const double weak = std::sqrt((cfg.tau2 - cfg.tau2_b) / as_double(cfg.p - cfg.b_size));
    for (std::size_t j = 0; j < cfg.p; ++j)
        out.beta[static_cast<Eigen::Index>(j)] = j < cfg.b_size ? strong : weak;
    return out;
}

LabeledDataset generate_dataset(const ScenarioConfig& cfg, const CoefficientVector& beta,
                                std::size_t rep_index) {
    validate(cfg);
    if (beta.p() != cfg.p) throw DimensionMismatch("beta length differs from scenario p");
    auto rng = make_stream(cfg.seed, rep_index, kDataDomain);
    Sampler draw(cfg);
    const auto n = static_cast<Eigen::Index>(cfg.n);
    const auto p = static_cast<Eigen::Index>(cfg.p);
    Matrix x(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) x(i, j) = draw(rng);
    std::normal_distribution<double> noise(0.0, std::sqrt(cfg.sigma2));
    Vector y = x * beta.beta;
    if (cfg.sigma2 > 0.0)
        for (Eigen::Index i = 0; i < n; ++i) y[i] += noise(rng);
    return LabeledDataset(std::move(x), std::move(y), true);
}

std::vector<std::size_t> strong_set(const ScenarioConfig& cfg) {
    std::vector<std::size_t> out(cfg.b_size);
    for (std::size_t j = 0; j < cfg.b_size; ++j) out[j] = j;
    return out;
}

}  // namespace varest
