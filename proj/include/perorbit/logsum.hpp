#ifndef PERORBIT_LOGSUM_HPP
#define PERORBIT_LOGSUM_HPP

#include <cmath>
#include <limits>

namespace perorbit {

// Streaming log-sum-exp accumulator: value() = log(sum of exp(v) over added v),
// stable for terms spanning many orders of magnitude. Empty sum -> -inf.
struct LogSumAcc {
    double mx = -std::numeric_limits<double>::infinity();
    double s = 0.0;

    void add(double v) {
        if (v == -std::numeric_limits<double>::infinity()) return;
        if (v <= mx) {
            s += std::exp(v - mx);
        } else {
            s = (mx == -std::numeric_limits<double>::infinity()) ? 1.0
                                                                 : s * std::exp(mx - v) + 1.0;
            mx = v;
        }
    }

    double value() const {
        return (mx == -std::numeric_limits<double>::infinity()) ? mx : mx + std::log(s);
    }
};

}  // namespace perorbit

#endif  // PERORBIT_LOGSUM_HPP
