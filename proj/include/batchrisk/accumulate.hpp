#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace batchrisk {

// Neumaier variant of Kahan summation. Subset enumerations add up to millions
// of similar-magnitude terms; the compensation keeps the mean exact to a few ulp.
class StableSum {
public:
    StableSum() = default;
    explicit StableSum(double init) : sum_(init) {}

    void add(double value) {
        const double t = sum_ + value;
        if (std::abs(sum_) >= std::abs(value)) {
            compensation_ += (sum_ - t) + value;
        } else {
            compensation_ += (value - t) + sum_;
        }
        sum_ = t;
    }

    double get() const { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

inline double stable_mean(std::span<const double> values) {
    StableSum s;
    for (double v : values) s.add(v);
    return s.get() / static_cast<double>(values.size());
}

// Streaming mean and sample standard deviation (Welford).
class MeanVariance {
public:
    void add(double value) {
        ++count_;
        const double delta = value - mean_;
        mean_ += delta / static_cast<double>(count_);
        m2_ += delta * (value - mean_);
    }

    std::uint64_t count() const { return count_; }
    double mean() const { return mean_; }

    // Unbiased sample variance; zero when fewer than two observations.
    double sample_variance() const {
        return count_ < 2 ? 0.0 : m2_ / static_cast<double>(count_ - 1);
    }

    double std_error() const {
        return count_ < 2 ? 0.0
                          : std::sqrt(sample_variance() / static_cast<double>(count_));
    }

private:
    std::uint64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

} // namespace batchrisk
