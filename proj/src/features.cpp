#include "engage/features.hpp"

#include <algorithm>
#include <cmath>

#include "engage/errors.hpp"

namespace engage {

std::vector<std::string> PipelineConfig::feature_order() const {
    std::vector<std::string> order(kEmotionNames.begin(), kEmotionNames.end());
    order.insert(order.end(), {"age_days", "log_views", "upload_month", "upload_dow"});
    if (include_log_clr) order.push_back("log_clr");
    return order;
}

TemporalParts derive_temporal(const Date& upload, const Date& reference) {
    if (reference < upload) throw NegativeAge(upload.to_iso(), reference.to_iso());
    TemporalParts parts;
    parts.age_days = reference.serial_day() - upload.serial_day();
    parts.upload_month = static_cast<int>(upload.month);
    parts.upload_dow = upload.day_of_week();
    return parts;
}

double checked_log1p(double x) {
    if (!std::isfinite(x) || x < 0.0)
        throw DomainError("log1p domain requires finite x >= 0, got " + std::to_string(x));
    return std::log1p(x);
}

Ratios compute_ratios(std::int64_t views, std::int64_t likes, std::int64_t comments) {
    if (views < 1 || likes < 1)
        throw DomainError("ratios require views >= 1 and likes >= 1");
    Ratios r;
    r.cr = static_cast<double>(comments) / static_cast<double>(views);
    r.lr = static_cast<double>(likes) / static_cast<double>(views);
    r.clr = static_cast<double>(comments) / static_cast<double>(likes);
    return r;
}

double fit_clip(std::vector<double> values, double q) {
    if (values.empty()) throw EmptyInput("fit_clip: empty value vector");
    if (!(q > 0.0 && q <= 1.0)) throw DomainError("clip quantile must be in (0, 1]");
    for (double v : values) {
        if (!std::isfinite(v)) throw DomainError("fit_clip: non-finite value");
    }
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    const double pos = static_cast<double>(n - 1) * q;
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= n) return values.back();
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

namespace {

double clip_to(double value, double threshold) { return value > threshold ? threshold : value; }

DesignMatrices assemble(const RawTable& table, const PipelineState& state) {
    const std::size_t n = table.records.size();
    const auto order = state.config.feature_order();
    const bool with_clr = state.config.include_log_clr;

    DesignMatrices dm;
    dm.X = Matrix(n, order.size());
    dm.Y = Matrix(n, 2);
    dm.views.resize(n);
    dm.true_counts = Matrix(n, 2);

    for (std::size_t i = 0; i < n; ++i) {
        const auto& rec = table.records[i];
        const auto ratios = compute_ratios(rec.views, rec.likes, rec.comments);
        const auto temporal = derive_temporal(rec.upload_date, state.resolved_reference_date);

        std::size_t c = 0;
        for (double e : rec.emotions) dm.X(i, c++) = e;
        dm.X(i, c++) = static_cast<double>(temporal.age_days);
        dm.X(i, c++) = checked_log1p(static_cast<double>(rec.views));
        dm.X(i, c++) = static_cast<double>(temporal.upload_month);
        dm.X(i, c++) = static_cast<double>(temporal.upload_dow);
        if (with_clr)
            dm.X(i, c++) = checked_log1p(clip_to(ratios.clr, state.clip_thresholds.clr));

        dm.Y(i, 0) = checked_log1p(clip_to(ratios.cr, state.clip_thresholds.cr));
        dm.Y(i, 1) = checked_log1p(clip_to(ratios.lr, state.clip_thresholds.lr));

        dm.views[i] = rec.views;
        dm.true_counts(i, 0) = static_cast<double>(rec.comments);
        dm.true_counts(i, 1) = static_cast<double>(rec.likes);
    }
    return dm;
}

}  // namespace

std::pair<DesignMatrices, PipelineState> build_design(const RawTable& table,
                                                      const PipelineConfig& config) {
    if (table.records.empty()) throw EmptyInput("build_design: empty table");
    if (!(config.clip_quantile > 0.0 && config.clip_quantile <= 1.0))
        throw DomainError("clip_quantile must be in (0, 1]");

    PipelineState state;
    state.config = config;
    if (config.reference_date) {
        state.resolved_reference_date = *config.reference_date;
    } else {
        Date latest = table.records.front().upload_date;
        for (const auto& rec : table.records)
            if (latest < rec.upload_date) latest = rec.upload_date;
        state.resolved_reference_date = latest;
    }

    const std::size_t n = table.records.size();
    std::vector<double> crs(n), lrs(n), clrs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& rec = table.records[i];
        const auto ratios = compute_ratios(rec.views, rec.likes, rec.comments);
        crs[i] = ratios.cr;
        lrs[i] = ratios.lr;
        clrs[i] = ratios.clr;
    }
    state.clip_thresholds.cr = fit_clip(std::move(crs), config.clip_quantile);
    state.clip_thresholds.lr = fit_clip(std::move(lrs), config.clip_quantile);
    state.clip_thresholds.clr = fit_clip(std::move(clrs), config.clip_quantile);

    return {assemble(table, state), state};
}

DesignMatrices build_design(const RawTable& table, const PipelineState& state) {
    if (table.records.empty()) throw EmptyInput("build_design: empty table");
    return assemble(table, state);
}

BackTransformed back_transform(double pred_log_cr, double pred_log_lr, std::int64_t views,
                               BackTransformStats* stats) {
    if (views < 1) throw DomainError("back_transform requires views >= 1");
    if (!std::isfinite(pred_log_cr) || !std::isfinite(pred_log_lr))
        throw DomainError("back_transform requires finite predictions");

    const auto one = [&](double pred_log_ratio) {
        const double count = std::expm1(pred_log_ratio) * static_cast<double>(views);
        if (count < 0.0) {
            if (stats) ++stats->floored;
            return 0.0;
        }
        return count;
    };
    BackTransformed bt;
    bt.comments = one(pred_log_cr);
    bt.likes = one(pred_log_lr);
    return bt;
}

}  // namespace engage
