#ifndef ENGAGE_GBT_HPP
#define ENGAGE_GBT_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "engage/matrix.hpp"

namespace engage::gbt {

struct GbtParams {
    double learning_rate = 0.1;
    int max_iter = 100;
    int max_leaf_nodes = 31;
    int min_samples_leaf = 20;
    double l2_regularization = 0.0;
    int max_bins = 255;
    bool early_stopping = true;
    double validation_fraction = 0.1;
    int n_iter_no_change = 10;
    double tol = 1e-7;
    std::uint64_t seed = 0;
    // Debug: rebuild every subtracted histogram directly and compare.
    bool verify_histograms = false;

    // Raises InvalidParams on any out-of-range field.
    void validate() const;
};

// Per-feature bin edges. Value v lands in bin i iff
// thresholds[i-1] < v <= thresholds[i]; everything above the last threshold
// maps to the last bin.
struct BinMapper {
    std::vector<std::vector<double>> thresholds;

    std::size_t n_features() const { return thresholds.size(); }
    int n_bins(std::size_t feature) const {
        return static_cast<int>(thresholds[feature].size()) + 1;
    }
    std::uint8_t bin_of(std::size_t feature, double value) const;

    bool operator==(const BinMapper& other) const = default;
};

// Row-major matrix of bin indices (max_bins <= 255, so uint8 suffices).
struct BinnedMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> bins;
    const BinMapper* mapper = nullptr;

    std::uint8_t at(std::size_t r, std::size_t c) const { return bins[r * cols + c]; }
};

struct TreeNode {
    bool is_leaf = true;
    double value = 0.0;      // leaf only
    int feature = -1;        // split only
    int bin = -1;            // split: rows with bin index <= bin go left
    double threshold = 0.0;  // numeric equivalent of the bin boundary
    int left = -1;
    int right = -1;
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    int leaf_count() const;
    double value_for(const std::uint8_t* binned_row) const;

    bool operator==(const Tree& other) const;
};

struct GbtModel {
    double baseline = 0.0;
    std::vector<Tree> trees;
    double learning_rate = 0.1;
    BinMapper bin_mapper;
    // Training MSE, entry 0 = baseline-only, then one entry per kept tree.
    std::vector<double> train_loss_curve;
    std::optional<int> stopped_early_at;
};

struct HistogramBin {
    double g_sum = 0.0;
    double h_sum = 0.0;
    std::int64_t count = 0;
};

struct NodeStats {
    double g_sum = 0.0;
    double h_sum = 0.0;
    std::int64_t count = 0;
};

struct SplitInfo {
    int feature = -1;
    int bin = -1;  // split after this bin: bin index <= bin goes left
    double gain = 0.0;
    NodeStats left;
    NodeStats right;
};

// Quantile-based bin edges: features with at most max_bins distinct values get
// one bin per value (midpoint thresholds); denser features use midpoint
// quantile cuts. Rows beyond 50,000 are subsampled (seeded) before the
// quantile pass.
BinMapper fit_bins(const Matrix& X, int max_bins, std::uint64_t seed = 0);

BinnedMatrix apply_bins(const Matrix& X, const BinMapper& mapper);

// Best (feature, bin) by the gain
//   1/2 * [G_L^2/(H_L+l2) + G_R^2/(H_R+l2) - G_P^2/(H_P+l2)],
// subject to min_samples_leaf on both sides; ties go to the lowest feature
// index, then the lowest bin index. Empty when no split has positive gain.
std::optional<SplitInfo> find_best_split(const std::vector<std::vector<HistogramBin>>& histograms,
                                         const NodeStats& parent, const GbtParams& params);

// Leaf-wise (best-first) growth until max_leaf_nodes or no positive-gain
// split remains. Leaf value = -G / (H + l2).
Tree grow_tree(const BinnedMatrix& binned, std::span<const double> gradients,
               std::span<const double> hessians, const GbtParams& params);

// Gradient boosting with squared-error loss. Baseline is the training mean;
// each iteration fits one tree to the residual gradients and applies
// shrinkage. With early stopping on, a seeded validation split monitors the
// loss and the model keeps the best-iteration prefix of trees.
GbtModel fit(const Matrix& X, const std::vector<double>& y, const GbtParams& params);

std::vector<double> predict(const GbtModel& model, const Matrix& X);

// Single-row prediction on an already-binned row. Accumulates in tree order,
// identical to fit-time updates.
double predict_binned_row(const GbtModel& model, const std::uint8_t* binned_row);

}  // namespace engage::gbt

#endif
