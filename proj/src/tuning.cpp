#include "engage/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "engage/errors.hpp"
#include "engage/metrics.hpp"
#include "engage/multioutput.hpp"
#include "engage/rng.hpp"

namespace engage::tuning {

namespace {

constexpr std::uint64_t kStreamKfold = 11;

DesignMatrices take_rows(const DesignMatrices& data, const std::vector<std::size_t>& rows) {
    DesignMatrices out;
    out.X = Matrix(rows.size(), data.X.cols());
    out.Y = Matrix(rows.size(), data.Y.cols());
    out.true_counts = Matrix(rows.size(), data.true_counts.cols());
    out.views.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t r = rows[i];
        for (std::size_t c = 0; c < data.X.cols(); ++c) out.X(i, c) = data.X(r, c);
        for (std::size_t c = 0; c < data.Y.cols(); ++c) out.Y(i, c) = data.Y(r, c);
        for (std::size_t c = 0; c < data.true_counts.cols(); ++c)
            out.true_counts(i, c) = data.true_counts(r, c);
        out.views[i] = data.views[r];
    }
    return out;
}

}  // namespace

void ParamSpace::validate() const {
    if (!(learning_rate_min > 0.0) || !(learning_rate_max >= learning_rate_min) ||
        !std::isfinite(learning_rate_max))
        throw InvalidParams("learning_rate bounds must satisfy 0 < min <= max");
    if (max_leaf_nodes_choices.empty()) throw InvalidParams("max_leaf_nodes_choices is empty");
    for (int v : max_leaf_nodes_choices)
        if (v < 2) throw InvalidParams("max_leaf_nodes choices must be >= 2");
    if (min_samples_leaf_choices.empty()) throw InvalidParams("min_samples_leaf_choices is empty");
    for (int v : min_samples_leaf_choices)
        if (v < 1) throw InvalidParams("min_samples_leaf choices must be >= 1");
    if (!(l2_min > 0.0) || !(l2_max >= l2_min) || !std::isfinite(l2_max))
        throw InvalidParams("l2 bounds must satisfy 0 < min <= max");
    if (max_bins < 2 || max_bins > 255) throw InvalidParams("max_bins must be in [2, 255]");
}

void HalvingConfig::validate() const {
    if (n_candidates < 1) throw InvalidParams("n_candidates must be >= 1");
    if (factor < 2) throw InvalidParams("factor must be >= 2");
    if (min_resource < 1) throw InvalidParams("min_resource must be >= 1");
    if (max_resource < min_resource) throw InvalidParams("max_resource must be >= min_resource");
    if (cv_folds < 2) throw InvalidParams("cv_folds must be >= 2");
}

std::vector<gbt::GbtParams> sample_candidates(const ParamSpace& space, int n, std::uint64_t seed) {
    space.validate();
    if (n < 1) throw InvalidParams("need at least one candidate");

    Rng rng(seed);
    std::vector<gbt::GbtParams> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        gbt::GbtParams p;
        p.learning_rate =
            std::exp(rng.uniform(std::log(space.learning_rate_min), std::log(space.learning_rate_max)));
        p.max_leaf_nodes = space.max_leaf_nodes_choices[rng.uniform_int(
            0, static_cast<std::int64_t>(space.max_leaf_nodes_choices.size()) - 1)];
        p.min_samples_leaf = space.min_samples_leaf_choices[rng.uniform_int(
            0, static_cast<std::int64_t>(space.min_samples_leaf_choices.size()) - 1)];
        p.l2_regularization = std::exp(rng.uniform(std::log(space.l2_min), std::log(space.l2_max)));
        p.max_bins = space.max_bins;
        p.seed = seed;
        out.push_back(p);
    }
    return out;
}

std::vector<std::vector<std::size_t>> kfold_split(std::size_t n_rows, int k, std::uint64_t seed) {
    if (k < 2) throw InvalidParams("k must be >= 2");
    if (n_rows < static_cast<std::size_t>(k)) throw TooFewRows("fewer rows than folds");

    std::vector<std::size_t> order(n_rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);

    const std::size_t base = n_rows / static_cast<std::size_t>(k);
    const std::size_t extra = n_rows % static_cast<std::size_t>(k);
    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    std::size_t pos = 0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                        order.begin() + static_cast<std::ptrdiff_t>(pos + size));
        std::sort(folds[f].begin(), folds[f].end());
        pos += size;
    }
    return folds;
}

double cv_score(const gbt::GbtParams& candidate, const DesignMatrices& data,
                const std::vector<std::vector<std::size_t>>& folds, int resource,
                const PipelineState& pipeline) {
    if (folds.size() < 2) throw InvalidParams("need at least two folds");
    if (resource < 1) throw InvalidParams("resource must be >= 1");

    gbt::GbtParams params = candidate;
    params.max_iter = resource;
    // The resource IS the budget; a validation holdout inside each fold would
    // fight it.
    params.early_stopping = false;

    const std::vector<std::string> feature_order = pipeline.config.feature_order();

    double score_sum = 0.0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<std::size_t> train_rows;
        train_rows.reserve(data.X.rows() - folds[f].size());
        for (std::size_t g = 0; g < folds.size(); ++g)
            if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
        std::sort(train_rows.begin(), train_rows.end());

        const DesignMatrices train = take_rows(data, train_rows);
        const DesignMatrices hold = take_rows(data, folds[f]);

        const EngagementModel model = fit_multi(train.X, train.Y, params, pipeline, feature_order);
        const Matrix preds = predict_multi(model, hold.X);

        const std::size_t n = hold.X.rows();
        std::vector<double> pred_comments(n), pred_likes(n), true_comments(n), true_likes(n);
        for (std::size_t i = 0; i < n; ++i) {
            const BackTransformed bt = back_transform(preds(i, 0), preds(i, 1), hold.views[i]);
            pred_comments[i] = bt.comments;
            pred_likes[i] = bt.likes;
            true_comments[i] = hold.true_counts(i, 0);
            true_likes[i] = hold.true_counts(i, 1);
        }
        const double fold_mae =
            0.5 * (mae(pred_comments, true_comments) + mae(pred_likes, true_likes));
        score_sum += -fold_mae;
    }
    return score_sum / static_cast<double>(folds.size());
}

SearchResult halving_search(const DesignMatrices& data, const PipelineState& pipeline,
                            const ParamSpace& space, const HalvingConfig& config) {
    config.validate();
    const std::vector<gbt::GbtParams> candidates =
        sample_candidates(space, config.n_candidates, config.seed);
    const auto folds =
        kfold_split(data.X.rows(), config.cv_folds, derive_seed(config.seed, kStreamKfold));

    SearchResult result;
    std::vector<int> active(candidates.size());
    std::iota(active.begin(), active.end(), 0);

    int resource = config.min_resource;
    int rung = 0;
    std::vector<double> rung_scores;
    while (true) {
        rung_scores.assign(active.size(), 0.0);
        for (std::size_t i = 0; i < active.size(); ++i) {
            const int idx = active[i];
            TrialRecord trial;
            trial.rung = rung;
            trial.candidate = idx;
            trial.resource = resource;
            try {
                trial.score = cv_score(candidates[static_cast<std::size_t>(idx)], data, folds,
                                       resource, pipeline);
            } catch (const Error&) {
                trial.score = -std::numeric_limits<double>::infinity();
                trial.failed = true;
            }
            rung_scores[i] = trial.score;
            result.trial_log.push_back(trial);
        }
        result.schedule.push_back({static_cast<int>(active.size()), resource});

        const std::size_t n_next = active.size() / static_cast<std::size_t>(config.factor);
        if (n_next < 1) break;

        // Keep the top n_next by score; ties go to the lower candidate index.
        std::vector<std::size_t> order(active.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (rung_scores[a] != rung_scores[b]) return rung_scores[a] > rung_scores[b];
            return active[a] < active[b];
        });
        std::vector<int> survivors;
        survivors.reserve(n_next);
        for (std::size_t i = 0; i < n_next; ++i) survivors.push_back(active[order[i]]);
        std::sort(survivors.begin(), survivors.end());
        active = std::move(survivors);

        resource = std::min(resource * config.factor, config.max_resource);
        ++rung;
    }

    // Winner: best final-rung score, ties to the lower candidate index.
    std::size_t best_i = 0;
    for (std::size_t i = 1; i < active.size(); ++i)
        if (rung_scores[i] > rung_scores[best_i]) best_i = i;
    const int best_idx = active[best_i];

    result.best_params = candidates[static_cast<std::size_t>(best_idx)];
    // Hand back a refit-ready parameter set: the tuned budget is the final
    // rung's resource, and the refit may use a validation holdout again.
    result.best_params.max_iter = resource;
    result.best_params.early_stopping = true;
    result.best_score = rung_scores[best_i];
    return result;
}

}  // namespace engage::tuning
