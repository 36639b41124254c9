#ifndef ENGAGE_FEATURES_HPP
#define ENGAGE_FEATURES_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "engage/dates.hpp"
#include "engage/matrix.hpp"
#include "engage/tabular.hpp"

namespace engage {

struct PipelineConfig {
    // Empty means "latest upload date in the fitted table".
    std::optional<Date> reference_date;
    double clip_quantile = 0.99;
    // log_clr is built from the Comments column, which also feeds the log_cr
    // target; set false to exclude it from the feature matrix.
    bool include_log_clr = true;

    // Feature column order: the 10 emotion scores, then age_days, log_views,
    // upload_month, upload_dow, and (unless excluded) log_clr.
    std::vector<std::string> feature_order() const;
};

struct ClipThresholds {
    double cr = 0.0;
    double lr = 0.0;
    double clr = 0.0;
};

// Fitted preprocessing state; immutable after fit, reused verbatim in
// transform mode.
struct PipelineState {
    Date resolved_reference_date;
    ClipThresholds clip_thresholds;
    PipelineConfig config;
};

struct DesignMatrices {
    Matrix X;                         // n x |feature_order|
    Matrix Y;                         // n x 2, columns [log_cr, log_lr]
    std::vector<std::int64_t> views;  // raw view counts per row
    Matrix true_counts;               // n x 2, columns [comments, likes]
};

struct TemporalParts {
    std::int64_t age_days = 0;
    int upload_month = 1;  // 1..12
    int upload_dow = 0;    // Monday=0 .. Sunday=6
};

// Whole days between the dates plus calendar parts of the upload date.
// Raises NegativeAge when reference < upload.
TemporalParts derive_temporal(const Date& upload, const Date& reference);

// log(1 + x) with the domain pinned to finite x >= 0.
double checked_log1p(double x);

struct Ratios {
    double cr = 0.0;   // comments / views
    double lr = 0.0;   // likes / views
    double clr = 0.0;  // comments / likes
};

Ratios compute_ratios(std::int64_t views, std::int64_t likes, std::int64_t comments);

// q-quantile by sorting with linear interpolation at position (n-1)*q.
// Values above the returned threshold get clamped to it later.
double fit_clip(std::vector<double> values, double q);

// Fit mode: resolves the reference date, fits clip thresholds on this table,
// and assembles X/Y. The table must already be cleaned.
std::pair<DesignMatrices, PipelineState> build_design(const RawTable& table,
                                                      const PipelineConfig& config);

// Transform mode: reuses a fitted state, never refits.
DesignMatrices build_design(const RawTable& table, const PipelineState& state);

struct BackTransformed {
    double comments = 0.0;
    double likes = 0.0;
};

struct BackTransformStats {
    std::size_t floored = 0;  // predictions with negative expm1 output, clamped to 0
};

// Inverse of the target transform: count_hat = expm1(pred_log_ratio) * views,
// floored at 0.
BackTransformed back_transform(double pred_log_cr, double pred_log_lr, std::int64_t views,
                               BackTransformStats* stats = nullptr);

}  // namespace engage

#endif
