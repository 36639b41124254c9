#include "engage/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <thread>

#include "engage/errors.hpp"
#include "engage/rng.hpp"

namespace engage::gbt {

namespace {

constexpr std::size_t kBinSubsampleCap = 50000;
constexpr std::size_t kParallelWorkThreshold = 1u << 18;

// Seed stream tags (see derive_seed).
constexpr std::uint64_t kStreamBinSubsample = 1;
constexpr std::uint64_t kStreamEarlyStopSplit = 2;

double mse(const std::vector<double>& pred, const std::vector<double>& truth) {
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = pred[i] - truth[i];
        acc += e * e;
    }
    return acc / static_cast<double>(pred.size());
}

// Midpoint-interpolated quantile at position (n-1)*q on a sorted vector.
double quantile_midpoint(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    const double pos = static_cast<double>(n - 1) * q;
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, n - 1);
    if (pos == static_cast<double>(lo)) return sorted[lo];
    return 0.5 * (sorted[lo] + sorted[hi]);
}

template <typename Fn>
void for_each_feature(std::size_t n_features, std::size_t row_count, Fn&& fn) {
    const std::size_t work = n_features * row_count;
    unsigned n_threads = std::thread::hardware_concurrency();
    if (work < kParallelWorkThreshold || n_features < 2 || n_threads < 2) {
        for (std::size_t f = 0; f < n_features; ++f) fn(f);
        return;
    }
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(n_features));
    std::vector<std::future<void>> futures;
    for (unsigned t = 0; t < n_threads; ++t) {
        futures.push_back(std::async(std::launch::async, [&, t] {
            for (std::size_t f = t; f < n_features; f += n_threads) fn(f);
        }));
    }
    for (auto& fut : futures) fut.get();
}

using Histograms = std::vector<std::vector<HistogramBin>>;

// Direct construction: per feature, accumulate g/h over the node's rows in
// row order. Feature results are independent, so the parallel path is
// bit-identical to the serial one.
Histograms build_histograms(const BinnedMatrix& binned, const std::vector<std::uint32_t>& rows,
                            std::span<const double> g, std::span<const double> h) {
    Histograms hists(binned.cols);
    for_each_feature(binned.cols, rows.size(), [&](std::size_t f) {
        auto& hist = hists[f];
        hist.assign(binned.mapper->n_bins(f), HistogramBin{});
        for (const std::uint32_t r : rows) {
            auto& bin = hist[binned.at(r, f)];
            bin.g_sum += g[r];
            bin.h_sum += h[r];
            ++bin.count;
        }
    });
    return hists;
}

Histograms subtract_histograms(const Histograms& parent, const Histograms& sibling) {
    Histograms out(parent.size());
    for (std::size_t f = 0; f < parent.size(); ++f) {
        out[f].resize(parent[f].size());
        for (std::size_t b = 0; b < parent[f].size(); ++b) {
            out[f][b].g_sum = parent[f][b].g_sum - sibling[f][b].g_sum;
            out[f][b].h_sum = parent[f][b].h_sum - sibling[f][b].h_sum;
            out[f][b].count = parent[f][b].count - sibling[f][b].count;
        }
    }
    return out;
}

void verify_subtracted(const Histograms& subtracted, const Histograms& direct) {
    for (std::size_t f = 0; f < subtracted.size(); ++f) {
        for (std::size_t b = 0; b < subtracted[f].size(); ++b) {
            const auto& s = subtracted[f][b];
            const auto& d = direct[f][b];
            const double scale = std::max({1.0, std::abs(d.g_sum), std::abs(d.h_sum)});
            if (s.count != d.count || std::abs(s.g_sum - d.g_sum) > 1e-12 * scale ||
                std::abs(s.h_sum - d.h_sum) > 1e-12 * scale) {
                throw Error("histogram subtraction disagrees with direct construction");
            }
        }
    }
}

double leaf_value(const NodeStats& stats, double l2) {
    return -stats.g_sum / (stats.h_sum + l2);
}

// A frontier leaf: its rows, histograms, stats, and precomputed best split.
struct LeafCtx {
    int tree_node = -1;
    std::vector<std::uint32_t> rows;
    Histograms hists;
    NodeStats stats;
    std::optional<SplitInfo> best;
    bool open = true;
};

}  // namespace

void GbtParams::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw InvalidParams("learning_rate must be finite and >= 0");
    if (max_iter < 1) throw InvalidParams("max_iter must be >= 1");
    if (max_leaf_nodes < 2) throw InvalidParams("max_leaf_nodes must be >= 2");
    if (min_samples_leaf < 1) throw InvalidParams("min_samples_leaf must be >= 1");
    if (!(l2_regularization >= 0.0) || !std::isfinite(l2_regularization))
        throw InvalidParams("l2_regularization must be finite and >= 0");
    if (max_bins < 2 || max_bins > 255) throw InvalidParams("max_bins must be in [2, 255]");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
        throw InvalidParams("validation_fraction must be in (0, 1)");
    if (n_iter_no_change < 1) throw InvalidParams("n_iter_no_change must be >= 1");
    if (!(tol >= 0.0)) throw InvalidParams("tol must be >= 0");
}

std::uint8_t BinMapper::bin_of(std::size_t feature, double value) const {
    const auto& t = thresholds[feature];
    // Bin index = number of thresholds strictly below value; a value equal to
    // a threshold stays in the lower bin, values past the last threshold land
    // in the last bin.
    const auto it = std::lower_bound(t.begin(), t.end(), value);
    return static_cast<std::uint8_t>(it - t.begin());
}

BinMapper fit_bins(const Matrix& X, int max_bins, std::uint64_t seed) {
    if (X.rows() == 0) throw EmptyInput("fit_bins: empty matrix");
    if (max_bins < 2 || max_bins > 255) throw InvalidParams("max_bins must be in [2, 255]");

    std::vector<std::size_t> sample_rows(X.rows());
    std::iota(sample_rows.begin(), sample_rows.end(), std::size_t{0});
    if (sample_rows.size() > kBinSubsampleCap) {
        Rng rng(derive_seed(seed, kStreamBinSubsample));
        rng.shuffle(sample_rows);
        sample_rows.resize(kBinSubsampleCap);
        std::sort(sample_rows.begin(), sample_rows.end());
    }

    BinMapper mapper;
    mapper.thresholds.resize(X.cols());
    for (std::size_t f = 0; f < X.cols(); ++f) {
        std::vector<double> values(sample_rows.size());
        for (std::size_t i = 0; i < sample_rows.size(); ++i) values[i] = X(sample_rows[i], f);
        for (double v : values) {
            if (!std::isfinite(v)) throw DomainError("fit_bins: non-finite feature value");
        }
        std::sort(values.begin(), values.end());

        std::vector<double> distinct;
        for (double v : values) {
            if (distinct.empty() || distinct.back() != v) distinct.push_back(v);
        }

        auto& thresholds = mapper.thresholds[f];
        if (static_cast<int>(distinct.size()) <= max_bins) {
            // Exact binning: one bin per distinct value.
            for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
                thresholds.push_back(0.5 * (distinct[i] + distinct[i + 1]));
        } else {
            for (int k = 1; k < max_bins; ++k) {
                const double cut =
                    quantile_midpoint(values, static_cast<double>(k) / max_bins);
                if (thresholds.empty() || cut > thresholds.back()) thresholds.push_back(cut);
            }
        }
    }
    return mapper;
}

BinnedMatrix apply_bins(const Matrix& X, const BinMapper& mapper) {
    if (X.cols() != mapper.n_features())
        throw DimensionMismatch("apply_bins: column count does not match mapper");
    BinnedMatrix out;
    out.rows = X.rows();
    out.cols = X.cols();
    out.mapper = &mapper;
    out.bins.resize(X.rows() * X.cols());
    for (std::size_t r = 0; r < X.rows(); ++r) {
        for (std::size_t c = 0; c < X.cols(); ++c)
            out.bins[r * X.cols() + c] = mapper.bin_of(c, X(r, c));
    }
    return out;
}

std::optional<SplitInfo> find_best_split(const Histograms& histograms, const NodeStats& parent,
                                         const GbtParams& params) {
    const double l2 = params.l2_regularization;
    const double parent_term = parent.g_sum * parent.g_sum / (parent.h_sum + l2);

    std::optional<SplitInfo> best;
    for (std::size_t f = 0; f < histograms.size(); ++f) {
        const auto& hist = histograms[f];
        NodeStats left{};
        for (std::size_t b = 0; b + 1 < hist.size(); ++b) {
            left.g_sum += hist[b].g_sum;
            left.h_sum += hist[b].h_sum;
            left.count += hist[b].count;
            if (left.count < params.min_samples_leaf) continue;

            NodeStats right;
            right.g_sum = parent.g_sum - left.g_sum;
            right.h_sum = parent.h_sum - left.h_sum;
            right.count = parent.count - left.count;
            if (right.count < params.min_samples_leaf) break;  // only shrinks further

            const double gain = 0.5 * (left.g_sum * left.g_sum / (left.h_sum + l2) +
                                       right.g_sum * right.g_sum / (right.h_sum + l2) -
                                       parent_term);
            // Strict > keeps the lowest (feature, bin) on ties.
            if (gain > 0.0 && (!best || gain > best->gain)) {
                best = SplitInfo{static_cast<int>(f), static_cast<int>(b), gain, left, right};
            }
        }
    }
    return best;
}

Tree grow_tree(const BinnedMatrix& binned, std::span<const double> gradients,
               std::span<const double> hessians, const GbtParams& params) {
    if (gradients.size() != binned.rows || hessians.size() != binned.rows)
        throw DimensionMismatch("grow_tree: gradient/hessian length mismatch");

    Tree tree;
    std::vector<LeafCtx> ctxs;

    LeafCtx root;
    root.tree_node = 0;
    root.rows.resize(binned.rows);
    std::iota(root.rows.begin(), root.rows.end(), 0u);
    root.hists = build_histograms(binned, root.rows, gradients, hessians);
    for (const std::uint32_t r : root.rows) {
        root.stats.g_sum += gradients[r];
        root.stats.h_sum += hessians[r];
    }
    root.stats.count = static_cast<std::int64_t>(binned.rows);
    root.best = find_best_split(root.hists, root.stats, params);

    tree.nodes.push_back(
        TreeNode{true, leaf_value(root.stats, params.l2_regularization), -1, -1, 0.0, -1, -1});
    ctxs.push_back(std::move(root));

    int leaf_count = 1;
    while (leaf_count < params.max_leaf_nodes) {
        // Frontier leaf with the largest gain; ties go to the earliest node.
        int pick = -1;
        for (std::size_t i = 0; i < ctxs.size(); ++i) {
            if (!ctxs[i].open || !ctxs[i].best) continue;
            if (pick < 0 || ctxs[i].best->gain > ctxs[pick].best->gain) pick = static_cast<int>(i);
        }
        if (pick < 0) break;

        LeafCtx& parent = ctxs[pick];
        const SplitInfo split = *parent.best;
        parent.open = false;

        std::vector<std::uint32_t> left_rows, right_rows;
        left_rows.reserve(static_cast<std::size_t>(split.left.count));
        right_rows.reserve(static_cast<std::size_t>(split.right.count));
        for (const std::uint32_t r : parent.rows) {
            if (binned.at(r, static_cast<std::size_t>(split.feature)) <= split.bin)
                left_rows.push_back(r);
            else
                right_rows.push_back(r);
        }

        // Build the smaller child directly, derive the larger by subtraction.
        LeafCtx left, right;
        left.rows = std::move(left_rows);
        right.rows = std::move(right_rows);
        left.stats = split.left;
        right.stats = split.right;
        const bool left_smaller = left.rows.size() <= right.rows.size();
        LeafCtx& small = left_smaller ? left : right;
        LeafCtx& large = left_smaller ? right : left;
        small.hists = build_histograms(binned, small.rows, gradients, hessians);
        large.hists = subtract_histograms(parent.hists, small.hists);
        if (params.verify_histograms) {
            verify_subtracted(large.hists,
                              build_histograms(binned, large.rows, gradients, hessians));
        }
        parent.hists.clear();  // no longer needed

        left.best = find_best_split(left.hists, left.stats, params);
        right.best = find_best_split(right.hists, right.stats, params);

        const int left_idx = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(TreeNode{true, leaf_value(left.stats, params.l2_regularization), -1,
                                      -1, 0.0, -1, -1});
        const int right_idx = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(TreeNode{true, leaf_value(right.stats, params.l2_regularization), -1,
                                      -1, 0.0, -1, -1});

        TreeNode& parent_node = tree.nodes[static_cast<std::size_t>(parent.tree_node)];
        parent_node.is_leaf = false;
        parent_node.feature = split.feature;
        parent_node.bin = split.bin;
        parent_node.threshold =
            binned.mapper->thresholds[static_cast<std::size_t>(split.feature)]
                                     [static_cast<std::size_t>(split.bin)];
        parent_node.left = left_idx;
        parent_node.right = right_idx;
        parent_node.value = 0.0;

        left.tree_node = left_idx;
        right.tree_node = right_idx;
        ctxs.push_back(std::move(left));
        ctxs.push_back(std::move(right));
        ++leaf_count;
    }
    return tree;
}

int Tree::leaf_count() const {
    int n = 0;
    for (const auto& node : nodes) n += node.is_leaf ? 1 : 0;
    return n;
}

double Tree::value_for(const std::uint8_t* binned_row) const {
    std::size_t idx = 0;
    while (!nodes[idx].is_leaf) {
        const TreeNode& node = nodes[idx];
        idx = static_cast<std::size_t>(
            binned_row[node.feature] <= node.bin ? node.left : node.right);
    }
    return nodes[idx].value;
}

bool Tree::operator==(const Tree& other) const {
    if (nodes.size() != other.nodes.size()) return false;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& a = nodes[i];
        const auto& b = other.nodes[i];
        if (a.is_leaf != b.is_leaf) return false;
        if (a.is_leaf) {
            if (a.value != b.value) return false;
        } else if (a.feature != b.feature || a.bin != b.bin || a.threshold != b.threshold ||
                   a.left != b.left || a.right != b.right) {
            return false;
        }
    }
    return true;
}

GbtModel fit(const Matrix& X, const std::vector<double>& y, const GbtParams& params) {
    params.validate();
    const std::size_t n = X.rows();
    if (n != y.size()) throw DimensionMismatch("fit: X rows and y length differ");
    if (n < 2) throw TooFewRows("fit requires at least 2 rows");
    for (double v : y) {
        if (!std::isfinite(v)) throw NonFiniteTarget("fit: non-finite target value");
    }

    // Early-stopping holdout: seeded shuffle, first slice becomes validation.
    std::vector<std::size_t> train_rows(n);
    std::iota(train_rows.begin(), train_rows.end(), std::size_t{0});
    std::vector<std::size_t> val_rows;
    if (params.early_stopping) {
        const auto n_val = static_cast<std::size_t>(static_cast<double>(n) *
                                                    params.validation_fraction);
        if (n_val < 1)
            throw TooFewRows("early stopping needs n >= ceil(1/validation_fraction)");
        Rng rng(derive_seed(params.seed, kStreamEarlyStopSplit));
        rng.shuffle(train_rows);
        val_rows.assign(train_rows.begin(), train_rows.begin() + static_cast<long>(n_val));
        train_rows.erase(train_rows.begin(), train_rows.begin() + static_cast<long>(n_val));
        std::sort(train_rows.begin(), train_rows.end());
        std::sort(val_rows.begin(), val_rows.end());
    }

    const auto subset = [&](const std::vector<std::size_t>& rows, Matrix& Xs,
                            std::vector<double>& ys) {
        Xs = Matrix(rows.size(), X.cols());
        ys.resize(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t c = 0; c < X.cols(); ++c) Xs(i, c) = X(rows[i], c);
            ys[i] = y[rows[i]];
        }
    };
    Matrix X_train, X_val;
    std::vector<double> y_train, y_val;
    subset(train_rows, X_train, y_train);
    if (!val_rows.empty()) subset(val_rows, X_val, y_val);

    GbtModel model;
    model.learning_rate = params.learning_rate;
    model.bin_mapper = fit_bins(X_train, params.max_bins, params.seed);
    const BinnedMatrix binned = apply_bins(X_train, model.bin_mapper);
    BinnedMatrix binned_val;
    if (!val_rows.empty()) binned_val = apply_bins(X_val, model.bin_mapper);

    double sum = 0.0;
    for (double v : y_train) sum += v;
    model.baseline = sum / static_cast<double>(y_train.size());

    std::vector<double> pred_train(y_train.size(), model.baseline);
    std::vector<double> pred_val(y_val.size(), model.baseline);
    std::vector<double> g(y_train.size()), h(y_train.size(), 1.0);

    model.train_loss_curve.push_back(mse(pred_train, y_train));

    double best_val = params.early_stopping ? mse(pred_val, y_val)
                                            : std::numeric_limits<double>::infinity();
    int best_iter = 0;
    int no_change = 0;

    for (int t = 1; t <= params.max_iter; ++t) {
        for (std::size_t i = 0; i < y_train.size(); ++i) g[i] = pred_train[i] - y_train[i];

        Tree tree = grow_tree(binned, g, h, params);
        for (std::size_t i = 0; i < y_train.size(); ++i)
            pred_train[i] += params.learning_rate *
                             tree.value_for(&binned.bins[i * binned.cols]);
        model.train_loss_curve.push_back(mse(pred_train, y_train));
        model.trees.push_back(std::move(tree));

        if (params.early_stopping) {
            for (std::size_t i = 0; i < y_val.size(); ++i)
                pred_val[i] += params.learning_rate *
                               model.trees.back().value_for(&binned_val.bins[i * binned_val.cols]);
            const double val_loss = mse(pred_val, y_val);
            if (best_val - val_loss > params.tol)
                no_change = 0;
            else
                ++no_change;
            if (val_loss < best_val) {  // strict: earliest iteration wins ties
                best_val = val_loss;
                best_iter = t;
            }
            if (no_change >= params.n_iter_no_change) {
                model.stopped_early_at = best_iter;
                break;
            }
        }
    }

    if (params.early_stopping) {
        // Keep only the best-iteration prefix.
        model.trees.resize(static_cast<std::size_t>(best_iter));
        model.train_loss_curve.resize(static_cast<std::size_t>(best_iter) + 1);
    }
    return model;
}

double predict_binned_row(const GbtModel& model, const std::uint8_t* binned_row) {
    double acc = model.baseline;
    for (const auto& tree : model.trees) acc += model.learning_rate * tree.value_for(binned_row);
    return acc;
}

std::vector<double> predict(const GbtModel& model, const Matrix& X) {
    if (X.cols() != model.bin_mapper.n_features())
        throw DimensionMismatch("predict: column count does not match the fitted model");
    const BinnedMatrix binned = apply_bins(X, model.bin_mapper);
    std::vector<double> out(X.rows());
    for (std::size_t r = 0; r < X.rows(); ++r)
        out[r] = predict_binned_row(model, &binned.bins[r * binned.cols]);
    return out;
}

}  // namespace engage::gbt
