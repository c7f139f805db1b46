#pragma once

#include <cmath>

namespace flatctl::detail {

/// Neumaier compensated accumulator.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    CompensatedSum& operator+=(double x) noexcept {
        add(x);
        return *this;
    }

    double value() const noexcept { return sum_ + comp_; }

    void scale(double factor) noexcept {
        sum_ *= factor;
        comp_ *= factor;
    }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace flatctl::detail
