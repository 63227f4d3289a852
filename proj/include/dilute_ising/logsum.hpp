#pragma once

#include <cmath>
#include <limits>

namespace dising {

// Streaming log-sum-exp: accumulates log(sum_i exp(x_i)) without leaving
// log space. Safe against -inf terms (treated as zero contributions).
class LogSum {
public:
    void add(double log_term) {
        if (std::isinf(log_term) && log_term < 0) return;
        if (n_ == 0 || log_term > max_) {
            if (n_ > 0) sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
            else sum_ = 1.0;
            max_ = log_term;
        } else {
            sum_ += std::exp(log_term - max_);
        }
        ++n_;
    }

    // Weighted variant: adds w * exp(x), w > 0.
    void add_scaled(double log_term, double weight) {
        add(log_term + std::log(weight));
    }

    double value() const {
        if (n_ == 0 || sum_ <= 0.0)
            return -std::numeric_limits<double>::infinity();
        return max_ + std::log(sum_);
    }

    bool empty() const { return n_ == 0; }

private:
    double max_ = -std::numeric_limits<double>::infinity();
    double sum_ = 0.0;
    std::size_t n_ = 0;
};

}  // namespace dising
