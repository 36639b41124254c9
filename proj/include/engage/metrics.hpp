#ifndef ENGAGE_METRICS_HPP
#define ENGAGE_METRICS_HPP

#include <cstddef>
#include <span>
#include <string>

#include "engage/features.hpp"
#include "engage/multioutput.hpp"

namespace engage {

struct TargetMetrics {
    double oom_accuracy = 0.0;
    double mae_orders = 0.0;
    double mae = 0.0;
    double rmse = 0.0;
    double r2 = 0.0;
    std::size_t n_rows = 0;
};

struct MetricsReport {
    TargetMetrics comments;
    TargetMetrics likes;
    std::size_t floored_predictions = 0;  // back-transform outputs clamped to 0
};

// Order of magnitude: floor(log10(max(x, 1))). Counts below 1 share order 0.
// Decade boundaries compare against an integer power-of-ten table, so
// order_of(10^k) == k exactly.
int order_of(double x);

// Fraction of rows whose predicted and true orders of magnitude agree.
double oom_accuracy(std::span<const double> pred, std::span<const double> truth);

// Mean |log10(max(pred,1)) - log10(max(truth,1))|.
double mae_orders(std::span<const double> pred, std::span<const double> truth);

double mae(std::span<const double> pred, std::span<const double> truth);
double rmse(std::span<const double> pred, std::span<const double> truth);

// 1 - sum((t-p)^2) / sum((t-mean(t))^2). Raises ConstantTruth when the
// denominator is zero.
double r2(std::span<const double> pred, std::span<const double> truth);

// Predicts on the test design, back-transforms to raw counts with the test
// views, and computes the full metric suite per target. `test` must have been
// built in transform mode with the model's pipeline state.
MetricsReport evaluate(const EngagementModel& model, const DesignMatrices& test);

// Aligned text table, metrics as rows, Comments / Likes as columns.
std::string format_report_table(const MetricsReport& report);

}  // namespace engage

#endif
