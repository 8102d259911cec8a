#include "varest/estimators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "varest/errors.hpp"
#include "varest/summation.hpp"
#include "varest/ustat_kernels.hpp"

namespace varest {

namespace {

constexpr std::array<std::pair<EstimatorId, std::string_view>, 7> kNames{{
    {EstimatorId::naive, "naive"},
    {EstimatorId::dicker, "dicker"},
    {EstimatorId::oracle, "oracle"},
    {EstimatorId::full, "full"},
    {EstimatorId::single, "single"},
    {EstimatorId::selection, "selection"},
    {EstimatorId::empirical, "empirical"},
}};

double as_double(std::size_t v) { return static_cast<double>(v); }

void check_model(const LabeledDataset& ds, const CovariateModel& model) {
    if (model.p() != ds.p())
        throw DimensionMismatch("dataset has " + std::to_string(ds.p()) +
                                " columns but covariate model has " + std::to_string(model.p()));
    if (!ds.whitened()) throw InvalidDataset("estimators require whitened covariates");
}

void require_independent(const CovariateModel& model) {
    if (!model.independent_columns())
        throw UnsupportedDependenceStructure(
            "single zero-estimator path requires independent whitened columns");
}

}  // namespace

std::string_view to_string(EstimatorId id) {
    for (const auto& [key, name] : kNames)
        if (key == id) return name;
    return "unknown";
}

EstimatorId parse_estimator_id(std::string_view name) {
    for (const auto& [key, label] : kNames)
        if (label == name) return key;
    throw ParseError("unknown estimator '" + std::string(name) + "'");
}

std::vector<EstimatorId> parse_estimator_list(std::string_view text) {
    std::vector<EstimatorId> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto end = comma == std::string_view::npos ? text.size() : comma;
        const auto token = text.substr(start, end - start);
        if (token.empty()) throw ParseError("empty estimator name in list");
        out.push_back(parse_estimator_id(token));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string format_double(double value, int significant_digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", significant_digits, value);
    return buf;
}

EstimateReport make_report(EstimatorId id, double tau2, double sigma_y2) {
    EstimateReport r;
    r.estimator_id = id;
    r.tau2 = tau2;
    r.sigma2 = sigma2_from(tau2, sigma_y2);
    return r;
}

EstimateReport clamped(EstimateReport report) {
    report.tau2 = std::max(0.0, report.tau2);
    report.sigma2 = std::max(0.0, report.sigma2);
    return report;
}

double naive_tau2(const WMatrix& w) {
    const auto n = w.n();
    if (n < 2) throw TooFewObservations(n, 2);
    CompensatedSum s;
    for (Eigen::Index j = 0; j < w.w().cols(); ++j) {
        const double cs = w.column_sums()[j];
        s += cs * cs;
        s -= w.column_square_sums()[j];
    }
    return s.value() / (as_double(n) * as_double(n - 1));
}

double dicker_tau2(const LabeledDataset& ds) {
    const double n = as_double(ds.n());
    const double p = as_double(ds.p());
    CompensatedSum xty2;
    for (Eigen::Index j = 0; j < ds.x().cols(); ++j) {
        const double s = compensated_dot(ds.x().col(j).data(), ds.y().data(), ds.n());
        xty2 += s * s;
    }
    const double yy = compensated_dot(ds.y().data(), ds.y().data(), ds.n());
    return (xty2.value() - p * yy) / (n * (n + 1.0));
}

double sigma2_from(double tau2, double sigma_y2) { return sigma_y2 - tau2; }

double t_oracle(const LabeledDataset& ds, const WMatrix& w, const CoefficientVector& beta,
                const CovariateModel& model) {
    check_model(ds, model);
    if (beta.p() != ds.p())
        throw DimensionMismatch("beta has length " + std::to_string(beta.p()) + ", expected " +
                                std::to_string(ds.p()));
    // With whitened covariates E(X_ij X_ij') = δ_jj', so
    // Σ_{j,j'} β_j β_j' h_jj' = n⁻¹ Σ_i [(X_i·β)² - ‖β‖²].
    const Vector xb = ds.x() * beta.beta;
    const double tau2 = beta.tau2();
    CompensatedSum s;
    for (Eigen::Index i = 0; i < xb.size(); ++i) {
        s += xb[i] * xb[i];
        s -= tau2;
    }
    const double correction = s.value() / as_double(ds.n());
    return naive_tau2(w) - 2.0 * correction;
}

double psi_hat(const LabeledDataset& ds, const WMatrix& w, std::size_t j, std::size_t jp,
               const CovariateModel& model) {
    check_model(ds, model);
    const auto n = ds.n();
    if (n < 3) throw TooFewObservations(n, 3);
    if (j >= ds.p()) throw IndexOutOfRange(j, ds.p());
    if (jp >= ds.p()) throw IndexOutOfRange(jp, ds.p());
    const auto cj = static_cast<Eigen::Index>(j);
    const auto cjp = static_cast<Eigen::Index>(jp);
    const double delta = j == jp ? 1.0 : 0.0;
    const Vector centered = (ds.x().col(cj).array() * ds.x().col(cjp).array() - delta).matrix();
    const double total = triple_sum_distinct(w.w().col(cj), w.w().col(cjp), centered);
    return total / (as_double(n) * as_double(n - 1) * as_double(n - 2));
}

double t_b(const LabeledDataset& ds, const WMatrix& w, const IndexSet& b_set,
           const CovariateModel& model) {
    check_model(ds, model);
    if (ds.n() < 3) throw TooFewObservations(ds.n(), 3);
    IndexSet b = b_set;
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    for (const auto j : b)
        if (j >= ds.p()) throw IndexOutOfRange(j, ds.p());

    // ψ̂_jj' is symmetric in (j, j'), so off-diagonal pairs count twice.
    CompensatedSum corr;
    for (std::size_t a = 0; a < b.size(); ++a) {
        corr += psi_hat(ds, w, b[a], b[a], model);
        for (std::size_t c = a + 1; c < b.size(); ++c)
            corr += 2.0 * psi_hat(ds, w, b[a], b[c], model);
    }
    return naive_tau2(w) - 2.0 * corr.value();
}

double t_full(const LabeledDataset& ds, const WMatrix& w, const CovariateModel& model) {
    check_model(ds, model);
    const auto n = ds.n();
    if (n < 3) throw TooFewObservations(n, 3);

    // Σ_{j,j'} W_aj W_bj' (X_cj X_cj' - δ_jj') = M_ac M_bc - G_ab with
    // M = W Xᵀ = diag(y) K and G = W Wᵀ = diag(y) K diag(y), K = X Xᵀ.
    // Summing the second term over distinct triples gives (n-2) n(n-1) τ̂².
    const GramMatrix k = gram(ds.x());
    const Vector& y = ds.y();
    CompensatedSum q;
    for (Eigen::Index c = 0; c < k.g.cols(); ++c) {
        const double* kc = k.g.col(c).data();
        CompensatedSum lin, sq;
        for (Eigen::Index a = 0; a < k.g.rows(); ++a) {
            if (a == c) continue;
            const double m = y[a] * kc[a];
            lin += m;
            sq += m * m;
        }
        q += lin.value() * lin.value();
        q -= sq.value();
    }
    const double norm = as_double(n) * as_double(n - 1) * as_double(n - 2);
    const double tau2 = naive_tau2(w);
    CompensatedSum out;
    out += tau2;
    out -= 2.0 * q.value() / norm;
    out += 2.0 * tau2;
    return out.value();
}

SingleZeroStat build_single_zero(const LabeledDataset& ds, const CovariateModel& model) {
    check_model(ds, model);
    const auto p = ds.p();
    if (p < 2)
        throw DegenerateZeroEstimator("single zero-estimator needs p >= 2 (g_i is an empty sum)");
    require_independent(model);

    const auto n = static_cast<Eigen::Index>(ds.n());
    std::vector<CompensatedSum> lin(static_cast<std::size_t>(n)), sq(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < ds.x().cols(); ++j) {
        const double* col = ds.x().col(j).data();
        for (Eigen::Index i = 0; i < n; ++i) {
            lin[static_cast<std::size_t>(i)] += col[i];
            sq[static_cast<std::size_t>(i)] += col[i] * col[i];
        }
    }
    SingleZeroStat out;
    out.g_per_obs.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double s = lin[static_cast<std::size_t>(i)].value();
        out.g_per_obs[i] = 0.5 * (s * s - sq[static_cast<std::size_t>(i)].value());
    }
    out.g_n = compensated_sum(out.g_per_obs) / static_cast<double>(n);
    // Independent unit-variance columns: E(g_i²) = Σ_{j<j'} E X_j² E X_j'².
    out.var_g = as_double(p) * as_double(p - 1) / 2.0;
    return out;
}

double c_star_oracle(const CoefficientVector& beta, const SingleZeroStat& single,
                     const CovariateModel& model) {
    if (beta.p() < 2) throw DegenerateZeroEstimator("c* needs p >= 2");
    require_independent(model);
    if (beta.p() != model.p()) throw DimensionMismatch("beta length differs from model width");
    const double sum_beta = compensated_sum(beta.beta);
    const double numerator = sum_beta * sum_beta - beta.tau2();
    return 2.0 * numerator / single.var_g;
}

double single_numerator(const WMatrix& w, const SingleZeroStat& single) {
    const auto n = w.n();
    if (n < 2) throw TooFewObservations(n, 2);
    if (w.p() < 2) throw DegenerateZeroEstimator("single zero-estimator needs p >= 2");
    if (static_cast<std::size_t>(single.g_per_obs.size()) != n)
        throw LengthMismatch("g_i vector length differs from number of observations");
    CompensatedSum s;
    for (Eigen::Index j = 0; j < w.w().cols(); ++j) {
        const Vector sj = w.w().col(j).cwiseProduct(single.g_per_obs);
        s += pair_sum_distinct(w.w().col(j), sj);
    }
    return 2.0 * s.value() / (as_double(n) * as_double(n - 1));
}

double c_hat_star(const WMatrix& w, const SingleZeroStat& single) {
    return single_numerator(w, single) / single.var_g;
}

double t_c_star(const WMatrix& w, const SingleZeroStat& single, double c) {
    return naive_tau2(w) - c * single.g_n;
}

double t_c_hat_star(const WMatrix& w, const SingleZeroStat& single) {
    return t_c_star(w, single, c_hat_star(w, single));
}

}  // namespace varest
