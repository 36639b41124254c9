#include "engage/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "engage/errors.hpp"
#include "engage/rng.hpp"

namespace engage::synth {

void SynthConfig::validate() const {
    if (n_rows < 10) throw InvalidParams("n_rows must be >= 10");
    if (!(like_noise_sd >= 0.0) || !std::isfinite(like_noise_sd))
        throw InvalidParams("like_noise_sd must be finite and >= 0");
    if (!(comment_noise_sd >= 0.0) || !std::isfinite(comment_noise_sd))
        throw InvalidParams("comment_noise_sd must be finite and >= 0");
    if (date_end < date_start) throw InvalidParams("date_end is before date_start");
}

RawTable generate(const SynthConfig& config) {
    config.validate();
    Rng rng(config.seed);

    const std::int64_t day_span = config.date_end.serial_day() - config.date_start.serial_day();
    const std::chrono::sys_days start_days = config.date_start.to_days();

    RawTable table;
    table.records.reserve(config.n_rows);
    table.source_row_indices.reserve(config.n_rows);

    for (std::size_t i = 0; i < config.n_rows; ++i) {
        RawRecord rec;
        for (double& e : rec.emotions) e = rng.uniform();

        const double log_views = rng.normal(10.0, 2.0);
        rec.views = std::max<std::int64_t>(10, std::llround(std::exp(log_views)));

        const std::int64_t offset = rng.uniform_int(0, day_span);
        rec.upload_date = Date::from_days(start_days + std::chrono::days{offset});

        double like_logit = kLikeLogitIntercept;
        for (std::size_t j = 0; j < rec.emotions.size(); ++j)
            like_logit += kLikeLogitCoef[j] * rec.emotions[j];
        like_logit += rng.normal(0.0, config.like_noise_sd);
        const double like_rate = 1.0 / (1.0 + std::exp(-like_logit));
        rec.likes = std::max<std::int64_t>(
            1, std::llround(like_rate * static_cast<double>(rec.views)));

        double comment_log = kCommentLogIntercept;
        for (std::size_t j = 0; j < rec.emotions.size(); ++j)
            comment_log += kCommentLogCoef[j] * rec.emotions[j];
        comment_log += rng.normal(0.0, config.comment_noise_sd);
        const double comment_rate = std::exp(comment_log);
        rec.comments = std::max<std::int64_t>(
            0, std::llround(comment_rate * static_cast<double>(rec.views)));

        char id[32];
        std::snprintf(id, sizeof(id), "synth-%06zu", i + 1);
        rec.track_id = id;

        table.records.push_back(rec);
        // Indices as if the table had been loaded from a CSV (header is row 1),
        // so a write + reload round-trips bit for bit.
        table.source_row_indices.push_back(static_cast<std::int64_t>(i) + 2);
    }
    return table;
}

}  // namespace engage::synth
