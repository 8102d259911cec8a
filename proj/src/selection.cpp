#include "varest/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "varest/errors.hpp"
#include "varest/ustat_kernels.hpp"

namespace varest {

Vector beta_squared_estimates(const WMatrix& w) {
    const auto n = w.n();
    if (n < 2) throw TooFewObservations(n, 2);
    const double norm = static_cast<double>(n) * static_cast<double>(n - 1);
    Vector out(w.w().cols());
    for (Eigen::Index j = 0; j < out.size(); ++j) {
        const double cs = w.column_sums()[j];
        out[j] = (cs * cs - w.column_square_sums()[j]) / norm;
    }
    return out;
}

SelectionResult gap_select(const Vector& beta2) {
    const auto p = static_cast<std::size_t>(beta2.size());
    if (p < 2) throw TooFewColumns(p, 2);

    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return beta2[static_cast<Eigen::Index>(a)] < beta2[static_cast<Eigen::Index>(b)];
    });

    SelectionResult out;
    out.gaps.resize(static_cast<Eigen::Index>(p - 1));
    std::size_t best = 1;
    for (std::size_t k = 1; k < p; ++k) {
        const double gap = beta2[static_cast<Eigen::Index>(order[k])] -
                           beta2[static_cast<Eigen::Index>(order[k - 1])];
        out.gaps[static_cast<Eigen::Index>(k - 1)] = gap;
        if (gap > out.gaps[static_cast<Eigen::Index>(best - 1)]) best = k;
    }
    out.threshold_value = beta2[static_cast<Eigen::Index>(order[best])];
    for (std::size_t j = 0; j < p; ++j)
        if (beta2[static_cast<Eigen::Index>(j)] > out.threshold_value) out.selected.push_back(j);
    return out;
}

namespace {

void apply_cap(SelectionResult& sel, const Vector& beta2, std::optional<std::size_t> cap) {
    if (!cap) return;
    const auto limit = std::min<std::size_t>(*cap, static_cast<std::size_t>(beta2.size()));
    if (sel.selected.size() <= limit) return;
    std::stable_sort(sel.selected.begin(), sel.selected.end(), [&](std::size_t a, std::size_t b) {
        return beta2[static_cast<Eigen::Index>(a)] > beta2[static_cast<Eigen::Index>(b)];
    });
    sel.selected.resize(limit);
    std::sort(sel.selected.begin(), sel.selected.end());
}

}  // namespace

GammaFit fit_t_gamma(const LabeledDataset& ds, const CovariateModel& model,
                     const SelectionOptions& options) {
    const auto n = ds.n();
    const double sigma_y2 = sample_variance_y(ds.y());
    GammaFit fit;

    if (options.split) {
        if (n < 6) throw TooFewObservations(n, 6);
        if (!(options.split_fraction > 0.0 && options.split_fraction < 1.0))
            throw InvalidDataset("split fraction must lie strictly between 0 and 1");
        auto n_select = static_cast<std::size_t>(
            std::floor(options.split_fraction * static_cast<double>(n)));
        n_select = std::clamp<std::size_t>(n_select, 3, n - 3);
        const LabeledDataset select_part = ds.row_block(0, n_select);
        const LabeledDataset eval_part = ds.row_block(n_select, n - n_select);

        const WMatrix w_select = build_w(select_part);
        const Vector beta2_select = beta_squared_estimates(w_select);
        fit.selection = gap_select(beta2_select);
        apply_cap(fit.selection, beta2_select, options.cap);
        fit.selection.split_used = true;

        const WMatrix w_eval = build_w(eval_part);
        fit.beta2_eval = beta_squared_estimates(w_eval);
        fit.n_eval = eval_part.n();
        fit.report = make_report(EstimatorId::selection,
                                 t_b(eval_part, w_eval, fit.selection.selected, model), sigma_y2);
    } else {
        if (n < 3) throw TooFewObservations(n, 3);
        const WMatrix w = build_w(ds);
        fit.beta2_eval = beta_squared_estimates(w);
        fit.selection = gap_select(fit.beta2_eval);
        apply_cap(fit.selection, fit.beta2_eval, options.cap);
        fit.n_eval = n;
        fit.report = make_report(EstimatorId::selection,
                                 t_b(ds, w, fit.selection.selected, model), sigma_y2);
    }
    fit.report.aux["selected"] = format_index_set(fit.selection.selected);
    fit.report.aux["split"] = fit.selection.split_used ? "1" : "0";
    return fit;
}

EstimateReport t_gamma(const LabeledDataset& ds, const CovariateModel& model,
                       const SelectionOptions& options) {
    return fit_t_gamma(ds, model, options).report;
}

std::string format_index_set(const IndexSet& set) {
    std::string out;
    for (std::size_t k = 0; k < set.size(); ++k) {
        if (k) out += ';';
        out += std::to_string(set[k] + 1);
    }
    return out;
}

}  // namespace varest
