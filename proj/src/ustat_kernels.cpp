#include "varest/ustat_kernels.hpp"

#include <string>

#include "varest/errors.hpp"
#include "varest/summation.hpp"

namespace varest {

namespace {

void require_same_length(const VectorRef& a, const VectorRef& b) {
    if (a.size() != b.size())
        throw LengthMismatch("vector lengths differ: " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
}

}  // namespace

double pair_sum_distinct(const VectorRef& u, const VectorRef& v) {
    require_same_length(u, v);
    const auto n = static_cast<std::size_t>(u.size());
    if (n < 2) throw TooFewObservations(n, 2);
    CompensatedSum su, sv, suv;
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        su += u[k];
        sv += v[k];
        suv += u[k] * v[k];
    }
    CompensatedSum out;
    out += su.value() * sv.value();
    out -= suv.value();
    return out.value();
}

double triple_sum_distinct(const VectorRef& u, const VectorRef& v, const VectorRef& w) {
    require_same_length(u, v);
    require_same_length(u, w);
    const auto n = static_cast<std::size_t>(u.size());
    if (n < 3) throw TooFewObservations(n, 3);
    CompensatedSum su, sv, sw, suv, suw, svw, suvw;
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        const double a = u[k], b = v[k], c = w[k];
        su += a;
        sv += b;
        sw += c;
        suv += a * b;
        suw += a * c;
        svw += b * c;
        suvw += a * b * c;
    }
    // Inclusion-exclusion over coincident index patterns.
    CompensatedSum out;
    out += su.value() * sv.value() * sw.value();
    out -= suv.value() * sw.value();
    out -= suw.value() * sv.value();
    out -= svw.value() * su.value();
    out += 2.0 * suvw.value();
    return out.value();
}

GramMatrix gram(const Matrix& rows) {
    const auto n = rows.rows();
    if (n < 2) throw TooFewObservations(static_cast<std::size_t>(n), 2);
    GramMatrix out;
    out.g = Matrix::Zero(n, n);
    out.g.selfadjointView<Eigen::Lower>().rankUpdate(rows);
    Matrix full = out.g.selfadjointView<Eigen::Lower>();
    out.g = std::move(full);
    out.row_sums_offdiag.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double* col = out.g.col(i).data();
        CompensatedSum s;
        for (Eigen::Index k = 0; k < n; ++k)
            if (k != i) s += col[k];
        out.row_sums_offdiag[i] = s.value();
    }
    return out;
}

GramMatrix gram(const WMatrix& w) { return gram(w.w()); }

double offdiag_square_sum(const GramMatrix& gm) {
    const auto n = gm.g.rows();
    if (n < 2) throw TooFewObservations(static_cast<std::size_t>(n), 2);
    CompensatedSum s;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double* col = gm.g.col(i).data();
        for (Eigen::Index k = 0; k < n; ++k)
            if (k != i) s += col[k] * col[k];
    }
    return s.value();
}

double chain_sum_distinct(const GramMatrix& gm) {
    const auto n = gm.g.rows();
    if (n < 3) throw TooFewObservations(static_cast<std::size_t>(n), 3);
    // For a middle index i2: (Σ_{i1≠i2} g)² counts i1 = i3, which must be removed.
    CompensatedSum s;
    for (Eigen::Index mid = 0; mid < n; ++mid) {
        const double* col = gm.g.col(mid).data();
        CompensatedSum sq;
        for (Eigen::Index k = 0; k < n; ++k)
            if (k != mid) sq += col[k] * col[k];
        const double r = gm.row_sums_offdiag[mid];
        s += r * r;
        s -= sq.value();
    }
    return s.value();
}

}  // namespace varest
