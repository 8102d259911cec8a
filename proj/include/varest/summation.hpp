#pragma once

#include <cmath>
#include <cstddef>

namespace varest {

// Kahan-Babuska (Neumaier) accumulator. The correction term also captures the
// low-order bits lost when the incoming term is larger than the running sum,
// so mixed-sign sums are accurate regardless of order.
class CompensatedSum {
public:
    CompensatedSum() = default;
    explicit CompensatedSum(double init) : sum_(init) {}

    CompensatedSum& operator+=(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
        return *this;
    }

    CompensatedSum& operator-=(double x) { return *this += -x; }

    CompensatedSum& operator+=(const CompensatedSum& other) {
        *this += other.sum_;
        *this += other.comp_;
        return *this;
    }

    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

template <typename Range>
double compensated_sum(const Range& r) {
    CompensatedSum acc;
    for (const double v : r) acc += v;
    return acc.value();
}

/// Σ a_i b_i over `n` elements with strides (works on Eigen columns and raw buffers).
template <typename A, typename B>
double compensated_dot(const A& a, const B& b, std::size_t n) {
    CompensatedSum acc;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc.value();
}

}  // namespace varest
