#ifndef ENGAGE_TUNING_HPP
#define ENGAGE_TUNING_HPP

#include <cstdint>
#include <vector>

#include "engage/features.hpp"
#include "engage/gbt.hpp"

namespace engage::tuning {

// Random-search space over GbtParams. Continuous dimensions are log-uniform,
// discrete ones uniform over the listed choices; max_bins stays fixed.
struct ParamSpace {
    double learning_rate_min = 0.01;
    double learning_rate_max = 0.3;
    std::vector<int> max_leaf_nodes_choices = {15, 31, 63, 127};
    std::vector<int> min_samples_leaf_choices = {5, 10, 20, 50};
    double l2_min = 1e-4;
    double l2_max = 10.0;
    int max_bins = 255;

    void validate() const;
};

// The halving resource is boosting iterations (max_iter).
struct HalvingConfig {
    int n_candidates = 64;
    int factor = 3;
    int min_resource = 27;
    int max_resource = 729;
    int cv_folds = 5;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrialRecord {
    int rung = 0;
    int candidate = 0;  // index into the sampled candidate list
    int resource = 0;
    double score = 0.0;  // neg-MAE; -inf for a failed fit
    bool failed = false;
};

struct RungInfo {
    int n_candidates = 0;
    int resource = 0;
};

struct SearchResult {
    gbt::GbtParams best_params;
    double best_score = 0.0;
    std::vector<TrialRecord> trial_log;
    std::vector<RungInfo> schedule;
};

// n independent draws, deterministic per seed. Per candidate the draw order
// is learning_rate, max_leaf_nodes, min_samples_leaf, l2_regularization.
std::vector<gbt::GbtParams> sample_candidates(const ParamSpace& space, int n, std::uint64_t seed);

// Seeded shuffle into k disjoint folds; the first n % k folds take the extra
// row. Union covers all rows.
std::vector<std::vector<std::size_t>> kfold_split(std::size_t n_rows, int k, std::uint64_t seed);

// Mean over folds of the negated mean of the two per-target count-scale MAEs.
// Each fold fit runs at max_iter = resource with early stopping off.
double cv_score(const gbt::GbtParams& candidate, const DesignMatrices& data,
                const std::vector<std::vector<std::size_t>>& folds, int resource,
                const PipelineState& pipeline);

// Successive halving: rung 0 evaluates every candidate at min_resource; each
// following rung keeps the top floor(n/factor) by score (ties to the lower
// candidate index) at factor times the resource, capped at max_resource.
// A failed fit scores -inf and never aborts the search.
SearchResult halving_search(const DesignMatrices& data, const PipelineState& pipeline,
                            const ParamSpace& space, const HalvingConfig& config);

}  // namespace engage::tuning

#endif
