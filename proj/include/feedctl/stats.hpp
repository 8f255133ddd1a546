#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include <boost/math/distributions/students_t.hpp>

#include "feedctl/errors.hpp"

namespace feedctl {

// One-sample summary: mean, sample standard deviation, standard error and the
// two-sided 95% confidence interval of the mean from the Student t quantile
// with n - 1 degrees of freedom. A single sample has zero spread.
struct SampleSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double std_dev = 0.0;
    double std_err = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

inline double t_critical_95(std::size_t n) {
    if (n < 2) return 0.0;
    boost::math::students_t_distribution<double> dist(static_cast<double>(n - 1));
    return boost::math::quantile(dist, 0.975);
}

inline SampleSummary summarize(std::span<const double> values) {
    if (values.empty()) throw EmptyInputError("cannot summarize an empty sample");
    SampleSummary s;
    s.n = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std_dev = std::sqrt(ss / static_cast<double>(s.n - 1));
        s.std_err = s.std_dev / std::sqrt(static_cast<double>(s.n));
    }
    const double half = t_critical_95(s.n) * s.std_err;
    s.ci_low = s.mean - half;
    s.ci_high = s.mean + half;
    return s;
}

}  // namespace feedctl
