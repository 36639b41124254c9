#include "engage/metrics.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <vector>

#include "engage/errors.hpp"

namespace engage {

namespace {

// 10^k for k = 0..18; every entry is exactly representable as a double, so the
// boundary comparisons below are exact.
constexpr std::int64_t kPow10[] = {
    1LL,
    10LL,
    100LL,
    1000LL,
    10000LL,
    100000LL,
    1000000LL,
    10000000LL,
    100000000LL,
    1000000000LL,
    10000000000LL,
    100000000000LL,
    1000000000000LL,
    10000000000000LL,
    100000000000000LL,
    1000000000000000LL,
    10000000000000000LL,
    100000000000000000LL,
    1000000000000000000LL,
};
constexpr int kPow10Max = 18;

void check_pair(std::span<const double> pred, std::span<const double> truth) {
    if (pred.size() != truth.size()) throw LengthMismatch("pred and truth sizes differ");
    if (pred.empty()) throw EmptyInput("metric over empty spans");
    for (double v : pred)
        if (!std::isfinite(v)) throw DomainError("non-finite prediction");
    for (double v : truth)
        if (!std::isfinite(v)) throw DomainError("non-finite truth value");
}

double log10_floored(double x) { return std::log10(x < 1.0 ? 1.0 : x); }

}  // namespace

int order_of(double x) {
    if (!std::isfinite(x) || x < 0.0) throw DomainError("order_of needs a finite x >= 0");
    if (x < 1.0) return 0;
    if (x >= static_cast<double>(kPow10[kPow10Max]))
        return static_cast<int>(std::floor(std::log10(x)));
    int k = 0;
    while (k < kPow10Max && x >= static_cast<double>(kPow10[k + 1])) ++k;
    return k;
}

double oom_accuracy(std::span<const double> pred, std::span<const double> truth) {
    check_pair(pred, truth);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (order_of(pred[i]) == order_of(truth[i])) ++hits;
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double mae_orders(std::span<const double> pred, std::span<const double> truth) {
    check_pair(pred, truth);
    for (double v : pred)
        if (v < 0.0) throw DomainError("mae_orders needs nonnegative predictions");
    for (double v : truth)
        if (v < 0.0) throw DomainError("mae_orders needs nonnegative truth values");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        sum += std::fabs(log10_floored(pred[i]) - log10_floored(truth[i]));
    return sum / static_cast<double>(pred.size());
}

double mae(std::span<const double> pred, std::span<const double> truth) {
    check_pair(pred, truth);
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) sum += std::fabs(pred[i] - truth[i]);
    return sum / static_cast<double>(pred.size());
}

double rmse(std::span<const double> pred, std::span<const double> truth) {
    check_pair(pred, truth);
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(pred.size()));
}

double r2(std::span<const double> pred, std::span<const double> truth) {
    check_pair(pred, truth);
    double mean = 0.0;
    for (double t : truth) mean += t;
    mean /= static_cast<double>(truth.size());
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double r = truth[i] - pred[i];
        const double c = truth[i] - mean;
        ss_res += r * r;
        ss_tot += c * c;
    }
    if (ss_tot == 0.0) throw ConstantTruth();
    return 1.0 - ss_res / ss_tot;
}

MetricsReport evaluate(const EngagementModel& model, const DesignMatrices& test) {
    if (test.X.rows() == 0) throw EmptyInput("evaluate over an empty design");
    const Matrix preds = predict_multi(model, test.X);

    BackTransformStats stats;
    const std::size_t n = test.X.rows();
    std::vector<double> pred_comments(n), pred_likes(n), true_comments(n), true_likes(n);
    for (std::size_t i = 0; i < n; ++i) {
        const BackTransformed bt = back_transform(preds(i, 0), preds(i, 1), test.views[i], &stats);
        pred_comments[i] = bt.comments;
        pred_likes[i] = bt.likes;
        true_comments[i] = test.true_counts(i, 0);
        true_likes[i] = test.true_counts(i, 1);
    }

    auto fill = [n](std::span<const double> p, std::span<const double> t) {
        TargetMetrics m;
        m.oom_accuracy = oom_accuracy(p, t);
        m.mae_orders = mae_orders(p, t);
        m.mae = mae(p, t);
        m.rmse = rmse(p, t);
        m.r2 = r2(p, t);
        m.n_rows = n;
        return m;
    };

    MetricsReport report;
    report.comments = fill(pred_comments, true_comments);
    report.likes = fill(pred_likes, true_likes);
    report.floored_predictions = stats.floored;
    return report;
}

std::string format_report_table(const MetricsReport& report) {
    char line[128];
    std::string out;
    auto row = [&](const char* label, double comments, double likes, bool percent) {
        if (percent)
            std::snprintf(line, sizeof(line), "%-34s %12.2f%% %12.2f%%\n", label, comments * 100.0,
                          likes * 100.0);
        else
            std::snprintf(line, sizeof(line), "%-34s %13.2f %13.2f\n", label, comments, likes);
        out += line;
    };
    std::snprintf(line, sizeof(line), "%-34s %13s %13s\n", "Metric", "Comments", "Likes");
    out += line;
    row("Order-of-Magnitude Accuracy", report.comments.oom_accuracy, report.likes.oom_accuracy, true);
    row("Mean Absolute Error (Orders)", report.comments.mae_orders, report.likes.mae_orders, false);
    row("Mean Absolute Error (MAE)", report.comments.mae, report.likes.mae, false);
    row("Root Mean Squared Error (RMSE)", report.comments.rmse, report.likes.rmse, false);
    row("Coefficient of Determination (R2)", report.comments.r2, report.likes.r2, false);
    return out;
}

}  // namespace engage
