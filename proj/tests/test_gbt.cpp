#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include "engage/errors.hpp"
#include "engage/gbt.hpp"
#include "engage/matrix.hpp"
#include "oracles.hpp"

using namespace engage;

namespace {

Matrix make_matrix(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
    return m;
}

Matrix column_matrix(const std::vector<double>& values) {
    Matrix m(values.size(), 1);
    for (std::size_t r = 0; r < values.size(); ++r) m(r, 0) = values[r];
    return m;
}

// Mean squared error with the same accumulation order the engine uses
// (row-order sum of squared errors, one final division).
double mse_rowwise(const std::vector<double>& pred, const std::vector<double>& truth) {
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = pred[i] - truth[i];
        acc += e * e;
    }
    return acc / static_cast<double>(pred.size());
}

// Exhaustive split enumeration over a binned matrix: every (feature, bin)
// partition is rebuilt by a row scan and scored with the gain formula.
// Shares no code with the histogram path.
struct BruteSplit {
    int feature = -1;
    int bin = -1;
    double gain = 0.0;
};

std::optional<BruteSplit> brute_force_split(const gbt::BinnedMatrix& binned,
                                            const std::vector<double>& g,
                                            const std::vector<double>& h,
                                            const std::vector<std::uint32_t>& rows,
                                            const gbt::GbtParams& params) {
    const double l2 = params.l2_regularization;
    double pg = 0.0, ph = 0.0;
    for (std::uint32_t r : rows) {
        pg += g[r];
        ph += h[r];
    }
    const double parent_term = pg * pg / (ph + l2);

    std::optional<BruteSplit> best;
    for (std::size_t f = 0; f < binned.cols; ++f) {
        for (int b = 0; b + 1 < binned.mapper->n_bins(f); ++b) {
            double lg = 0.0, lh = 0.0;
            std::int64_t lc = 0;
            for (std::uint32_t r : rows) {
                if (binned.at(r, f) <= b) {
                    lg += g[r];
                    lh += h[r];
                    ++lc;
                }
            }
            const std::int64_t rc = static_cast<std::int64_t>(rows.size()) - lc;
            if (lc < params.min_samples_leaf || rc < params.min_samples_leaf) continue;
            const double rg = pg - lg;
            const double rh = ph - lh;
            const double gain =
                0.5 * (lg * lg / (lh + l2) + rg * rg / (rh + l2) - parent_term);
            if (gain > 0.0 && (!best || gain > best->gain))
                best = BruteSplit{static_cast<int>(f), b, gain};
        }
    }
    return best;
}

std::size_t walk_to_leaf(const gbt::Tree& tree, const std::uint8_t* binned_row) {
    std::size_t idx = 0;
    while (!tree.nodes[idx].is_leaf) {
        const auto& node = tree.nodes[idx];
        idx = static_cast<std::size_t>(binned_row[node.feature] <= node.bin ? node.left
                                                                            : node.right);
    }
    return idx;
}

}  // namespace

TEST_CASE("boosting parameter bounds are enforced") {
    gbt::GbtParams p;
    CHECK_NOTHROW(p.validate());

    auto bad = [](auto&& mutate) {
        gbt::GbtParams q;
        mutate(q);
        CHECK_THROWS_AS(q.validate(), InvalidParams);
    };
    bad([](auto& q) { q.learning_rate = -0.1; });
    bad([](auto& q) { q.learning_rate = std::nan(""); });
    bad([](auto& q) { q.learning_rate = std::numeric_limits<double>::infinity(); });
    bad([](auto& q) { q.max_iter = 0; });
    bad([](auto& q) { q.max_leaf_nodes = 1; });
    bad([](auto& q) { q.min_samples_leaf = 0; });
    bad([](auto& q) { q.l2_regularization = -1.0; });
    bad([](auto& q) { q.l2_regularization = std::nan(""); });
    bad([](auto& q) { q.max_bins = 1; });
    bad([](auto& q) { q.max_bins = 256; });
    bad([](auto& q) { q.validation_fraction = 0.0; });
    bad([](auto& q) { q.validation_fraction = 1.0; });
    bad([](auto& q) { q.n_iter_no_change = 0; });
    bad([](auto& q) { q.tol = -1e-9; });

    // A zero learning rate is legal: it freezes the model at the baseline.
    p.learning_rate = 0.0;
    CHECK_NOTHROW(p.validate());
}

TEST_CASE("bin fitting uses one bin per distinct value on sparse features") {
    const auto mapper = gbt::fit_bins(column_matrix({1.0, 2.0, 3.0, 4.0}), 255);
    REQUIRE(mapper.n_features() == 1);
    CHECK(mapper.n_bins(0) == 4);
    REQUIRE(mapper.thresholds[0].size() == 3);
    CHECK(mapper.thresholds[0][0] == 1.5);
    CHECK(mapper.thresholds[0][1] == 2.5);
    CHECK(mapper.thresholds[0][2] == 3.5);

    const auto constant = gbt::fit_bins(column_matrix({7.25, 7.25, 7.25}), 255);
    CHECK(constant.n_bins(0) == 1);
    CHECK(constant.thresholds[0].empty());

    // Order of appearance is irrelevant; only the value set matters.
    const auto shuffled = gbt::fit_bins(column_matrix({4.0, 1.0, 3.0, 2.0, 3.0}), 255);
    CHECK(shuffled.thresholds[0] == std::vector<double>{1.5, 2.5, 3.5});
}

TEST_CASE("bin fitting on dense values follows midpoint quantile cuts") {
    std::mt19937_64 rng(411);
    std::uniform_real_distribution<double> dist(0.0, 100.0);
    std::vector<double> values(1000);
    for (double& v : values) v = dist(rng);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    REQUIRE(values.size() == 1000);  // continuous draws should not collide

    // Reference cuts computed straight from the sorted sample: position
    // (n-1)*q, exact hit -> that order statistic, otherwise the midpoint of
    // the two straddling ones.
    const auto cut_at = [&](double q) {
        const double pos = static_cast<double>(values.size() - 1) * q;
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        if (pos == static_cast<double>(lo)) return values[lo];
        return (values[lo] + values[lo + 1]) / 2.0;
    };

    std::vector<double> unsorted = values;
    std::shuffle(unsorted.begin(), unsorted.end(), rng);
    const auto mapper = gbt::fit_bins(column_matrix(unsorted), 4);
    REQUIRE(mapper.n_bins(0) == 4);
    CHECK(mapper.thresholds[0][0] == cut_at(0.25));
    CHECK(mapper.thresholds[0][1] == cut_at(0.50));
    CHECK(mapper.thresholds[0][2] == cut_at(0.75));

    // With 1000 distinct values the three cuts land strictly between order
    // statistics 249/250, 499/500, and 749/750, so the bins hold exactly 250
    // rows each.
    const auto binned = gbt::apply_bins(column_matrix(unsorted), mapper);
    std::array<int, 4> counts{};
    for (std::size_t r = 0; r < binned.rows; ++r) ++counts[binned.at(r, 0)];
    CHECK(counts[0] == 250);
    CHECK(counts[1] == 250);
    CHECK(counts[2] == 250);
    CHECK(counts[3] == 250);
}

TEST_CASE("bin fitting input checks") {
    CHECK_THROWS_AS(gbt::fit_bins(Matrix(0, 3), 255), EmptyInput);
    CHECK_THROWS_AS(gbt::fit_bins(column_matrix({1.0}), 1), InvalidParams);
    CHECK_THROWS_AS(gbt::fit_bins(column_matrix({1.0}), 256), InvalidParams);
    CHECK_THROWS_AS(gbt::fit_bins(column_matrix({1.0, std::nan("")}), 255), DomainError);
    CHECK_THROWS_AS(
        gbt::fit_bins(column_matrix({1.0, std::numeric_limits<double>::infinity()}), 255),
        DomainError);
}

TEST_CASE("bin fitting caps bin counts and keeps thresholds increasing") {
    std::mt19937_64 rng(412);
    std::uniform_int_distribution<int> ints(0, 49);
    std::uniform_real_distribution<double> reals(-10.0, 10.0);
    Matrix X(500, 2);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        X(r, 0) = static_cast<double>(ints(rng));  // heavy duplication
        X(r, 1) = reals(rng);                      // effectively all distinct
    }

    for (int max_bins : {2, 3, 16, 255}) {
        const auto mapper = gbt::fit_bins(X, max_bins);
        for (std::size_t f = 0; f < mapper.n_features(); ++f) {
            CHECK(mapper.n_bins(f) <= max_bins);
            const auto& t = mapper.thresholds[f];
            for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i - 1] < t[i]);
        }
        const auto binned = gbt::apply_bins(X, mapper);
        for (std::size_t r = 0; r < binned.rows; ++r)
            for (std::size_t c = 0; c < binned.cols; ++c)
                CHECK(binned.at(r, c) < binned.mapper->n_bins(c));
    }
}

TEST_CASE("bin application boundary rules") {
    const auto mapper = gbt::fit_bins(column_matrix({1.0, 2.0, 3.0, 4.0}), 255);
    // thresholds [1.5, 2.5, 3.5]
    CHECK(mapper.bin_of(0, 1.5) == 0);   // equal to a threshold -> lower bin
    CHECK(mapper.bin_of(0, 2.5) == 1);
    CHECK(mapper.bin_of(0, 3.5) == 2);
    CHECK(mapper.bin_of(0, -100.0) == 0);  // below every threshold
    CHECK(mapper.bin_of(0, 1.0) == 0);
    CHECK(mapper.bin_of(0, 1.6) == 1);
    CHECK(mapper.bin_of(0, 4.0) == 3);
    CHECK(mapper.bin_of(0, 1e9) == 3);   // beyond the last threshold -> last bin

    // Monotone values map to monotone bin indices.
    std::mt19937_64 rng(413);
    std::uniform_real_distribution<double> dist(-2.0, 7.0);
    std::vector<double> probes(200);
    for (double& p : probes) p = dist(rng);
    std::sort(probes.begin(), probes.end());
    for (std::size_t i = 1; i < probes.size(); ++i)
        CHECK(mapper.bin_of(0, probes[i - 1]) <= mapper.bin_of(0, probes[i]));

    Matrix wide(2, 3);
    CHECK_THROWS_AS(gbt::apply_bins(wide, mapper), DimensionMismatch);
}

TEST_CASE("split search follows the gain formula and tie rules") {
    gbt::GbtParams params;
    params.min_samples_leaf = 1;

    SUBCASE("hand-checked gain with regularization") {
        // One feature, two bins: left (g=-2, h=2, n=2), right (g=+2, h=1, n=1).
        std::vector<std::vector<gbt::HistogramBin>> hists{{{-2.0, 2.0, 2}, {2.0, 1.0, 1}}};
        gbt::NodeStats parent{0.0, 3.0, 3};
        params.l2_regularization = 0.5;
        const auto split = gbt::find_best_split(hists, parent, params);
        REQUIRE(split.has_value());
        CHECK(split->feature == 0);
        CHECK(split->bin == 0);
        CHECK(split->gain == doctest::Approx(0.5 * (4.0 / 2.5 + 4.0 / 1.5)).epsilon(1e-15));
        CHECK(split->left.count == 2);
        CHECK(split->right.count == 1);
        params.l2_regularization = 0.0;
    }

    SUBCASE("identical gains on two features pick the lower feature") {
        std::vector<gbt::HistogramBin> feature{{-2.0, 2.0, 2}, {2.0, 2.0, 2}};
        std::vector<std::vector<gbt::HistogramBin>> hists{feature, feature};
        gbt::NodeStats parent{0.0, 4.0, 4};
        const auto split = gbt::find_best_split(hists, parent, params);
        REQUIRE(split.has_value());
        CHECK(split->feature == 0);
        CHECK(split->bin == 0);
    }

    SUBCASE("identical gains on two bins pick the lower bin") {
        // Middle bin empty: splitting after bin 0 or bin 1 yields the same
        // partition, hence the same gain; the scan keeps the lower bin.
        std::vector<std::vector<gbt::HistogramBin>> hists{
            {{-3.0, 2.0, 2}, {0.0, 0.0, 0}, {3.0, 2.0, 2}}};
        gbt::NodeStats parent{0.0, 4.0, 4};
        const auto split = gbt::find_best_split(hists, parent, params);
        REQUIRE(split.has_value());
        CHECK(split->bin == 0);
    }

    SUBCASE("min_samples_leaf can forbid every split") {
        std::vector<std::vector<gbt::HistogramBin>> hists{{{-2.0, 2.0, 2}, {2.0, 2.0, 2}}};
        gbt::NodeStats parent{0.0, 4.0, 4};
        params.min_samples_leaf = 4;
        CHECK_FALSE(gbt::find_best_split(hists, parent, params).has_value());
        params.min_samples_leaf = 1;
    }

    SUBCASE("uniform gradients leave nothing to gain") {
        std::vector<std::vector<gbt::HistogramBin>> hists{{{1.0, 1.0, 1}, {2.0, 2.0, 2}}};
        gbt::NodeStats parent{3.0, 3.0, 3};
        CHECK_FALSE(gbt::find_best_split(hists, parent, params).has_value());
    }
}

TEST_CASE("split search equals exhaustive enumeration") {
    std::mt19937_64 rng(414);
    std::uniform_int_distribution<int> value_dist(0, 7);
    std::uniform_real_distribution<double> grad_dist(-5.0, 5.0);

    for (int rep = 0; rep < 60; ++rep) {
        const std::size_t n = 16;
        const std::size_t d = 1 + rep % 3;
        Matrix X(n, d);
        std::vector<double> g(n), h(n, 1.0);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < d; ++c) X(r, c) = static_cast<double>(value_dist(rng));
            g[r] = grad_dist(rng);
        }
        const auto mapper = gbt::fit_bins(X, 255);
        const auto binned = gbt::apply_bins(X, mapper);

        gbt::GbtParams params;
        params.min_samples_leaf = (rep % 2 == 0) ? 1 : 3;
        params.l2_regularization = (rep % 4 < 2) ? 0.0 : 1.25;

        std::vector<std::uint32_t> rows(n);
        std::iota(rows.begin(), rows.end(), 0u);
        const auto brute = brute_force_split(binned, g, h, rows, params);

        // Rebuild the histogram input the library path expects.
        std::vector<std::vector<gbt::HistogramBin>> hists(d);
        for (std::size_t f = 0; f < d; ++f) {
            hists[f].assign(static_cast<std::size_t>(mapper.n_bins(f)), gbt::HistogramBin{});
            for (std::size_t r = 0; r < n; ++r) {
                auto& bin = hists[f][binned.at(r, f)];
                bin.g_sum += g[r];
                bin.h_sum += h[r];
                ++bin.count;
            }
        }
        gbt::NodeStats parent{};
        for (std::size_t r = 0; r < n; ++r) {
            parent.g_sum += g[r];
            parent.h_sum += h[r];
        }
        parent.count = static_cast<std::int64_t>(n);

        const auto split = gbt::find_best_split(hists, parent, params);
        REQUIRE(split.has_value() == brute.has_value());
        if (split) {
            CHECK(split->feature == brute->feature);
            CHECK(split->bin == brute->bin);
            CHECK(split->gain == doctest::Approx(brute->gain).epsilon(1e-12));
        }
    }
}

TEST_CASE("tree growth handles degenerate and forced cases") {
    gbt::GbtParams params;
    params.min_samples_leaf = 1;

    SUBCASE("equal gradients collapse to a single leaf") {
        const auto X = column_matrix({0.0, 1.0, 2.0, 3.0});
        const auto mapper = gbt::fit_bins(X, 255);
        const auto binned = gbt::apply_bins(X, mapper);
        const std::vector<double> g(4, 1.0), h(4, 1.0);
        const auto tree = gbt::grow_tree(binned, g, h, params);
        REQUIRE(tree.nodes.size() == 1);
        CHECK(tree.nodes[0].is_leaf);
        CHECK(tree.nodes[0].value == -1.0);  // -sum(g) / sum(h)
        CHECK(tree.leaf_count() == 1);
    }

    SUBCASE("perfectly separated gradients force one split") {
        const auto X = column_matrix({0.0, 0.0, 1.0, 1.0});
        const auto mapper = gbt::fit_bins(X, 255);
        const auto binned = gbt::apply_bins(X, mapper);
        const std::vector<double> g{-1.0, -1.0, 1.0, 1.0}, h(4, 1.0);
        const auto tree = gbt::grow_tree(binned, g, h, params);
        REQUIRE(tree.nodes.size() == 3);
        CHECK_FALSE(tree.nodes[0].is_leaf);
        CHECK(tree.nodes[0].feature == 0);
        CHECK(tree.nodes[0].bin == 0);
        CHECK(tree.nodes[0].threshold == 0.5);
        CHECK(tree.nodes[1].is_leaf);
        CHECK(tree.nodes[1].value == 1.0);   // left: -(-2)/2
        CHECK(tree.nodes[2].is_leaf);
        CHECK(tree.nodes[2].value == -1.0);  // right: -(+2)/2
    }

    SUBCASE("gradient length must match the matrix") {
        const auto X = column_matrix({0.0, 1.0});
        const auto mapper = gbt::fit_bins(X, 255);
        const auto binned = gbt::apply_bins(X, mapper);
        const std::vector<double> short_g{1.0}, h(2, 1.0);
        CHECK_THROWS_AS(gbt::grow_tree(binned, short_g, h, params), DimensionMismatch);
    }
}

TEST_CASE("tree growth picks the exhaustive best split at the root") {
    std::mt19937_64 rng(415);
    std::uniform_int_distribution<int> value_dist(0, 7);
    std::uniform_real_distribution<double> grad_dist(-5.0, 5.0);

    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 32;
        const std::size_t d = 1 + rep % 3;
        Matrix X(n, d);
        std::vector<double> g(n), h(n, 1.0);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < d; ++c) X(r, c) = static_cast<double>(value_dist(rng));
            g[r] = grad_dist(rng);
        }
        const auto mapper = gbt::fit_bins(X, 255);
        const auto binned = gbt::apply_bins(X, mapper);

        gbt::GbtParams params;
        params.min_samples_leaf = (rep % 2 == 0) ? 1 : 4;
        params.max_leaf_nodes = 2;  // isolate the root decision

        std::vector<std::uint32_t> rows(n);
        std::iota(rows.begin(), rows.end(), 0u);
        const auto brute = brute_force_split(binned, g, h, rows, params);
        const auto tree = gbt::grow_tree(binned, g, h, params);

        if (!brute) {
            CHECK(tree.nodes.size() == 1);
        } else {
            REQUIRE(tree.nodes.size() == 3);
            CHECK(tree.nodes[0].feature == brute->feature);
            CHECK(tree.nodes[0].bin == brute->bin);
        }
    }
}

TEST_CASE("frontier ties split the earliest-created leaf first") {
    // After the root split both children offer exactly equal gains (mirrored
    // gradient magnitudes); with room for only one more split the left child,
    // created first, must win.
    const auto X = column_matrix({0.0, 1.0, 2.0, 3.0});
    const auto mapper = gbt::fit_bins(X, 255);
    const auto binned = gbt::apply_bins(X, mapper);
    const std::vector<double> g{5.5, 4.5, -4.5, -5.5}, h(4, 1.0);

    gbt::GbtParams params;
    params.min_samples_leaf = 1;
    params.max_leaf_nodes = 3;
    const auto tree = gbt::grow_tree(binned, g, h, params);

    REQUIRE(tree.nodes.size() == 5);
    CHECK(tree.nodes[0].feature == 0);
    CHECK(tree.nodes[0].bin == 1);         // root splits the sign boundary
    CHECK_FALSE(tree.nodes[1].is_leaf);    // left child split again
    CHECK(tree.nodes[2].is_leaf);          // right child stayed a leaf
    CHECK(tree.nodes[3].value == -5.5);
    CHECK(tree.nodes[4].value == -4.5);
}

TEST_CASE("leaf values follow the regularized gradient formula") {
    std::mt19937_64 rng(416);
    std::uniform_int_distribution<int> value_dist(0, 15);
    std::uniform_real_distribution<double> grad_dist(-5.0, 5.0);

    const std::size_t n = 60, d = 3;
    Matrix X(n, d);
    std::vector<double> g(n), h(n, 1.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) X(r, c) = static_cast<double>(value_dist(rng));
        g[r] = grad_dist(rng);
    }
    const auto mapper = gbt::fit_bins(X, 255);
    const auto binned = gbt::apply_bins(X, mapper);

    gbt::GbtParams params;
    params.min_samples_leaf = 3;
    params.max_leaf_nodes = 8;
    params.l2_regularization = 2.5;
    const auto tree = gbt::grow_tree(binned, g, h, params);

    // Structural sanity: every node is reachable exactly once from the root
    // and splits always have two children.
    std::vector<int> visits(tree.nodes.size(), 0);
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
        const std::size_t idx = stack.back();
        stack.pop_back();
        ++visits[idx];
        const auto& node = tree.nodes[idx];
        if (!node.is_leaf) {
            REQUIRE(node.left >= 0);
            REQUIRE(node.right >= 0);
            REQUIRE(static_cast<std::size_t>(node.left) < tree.nodes.size());
            REQUIRE(static_cast<std::size_t>(node.right) < tree.nodes.size());
            stack.push_back(static_cast<std::size_t>(node.left));
            stack.push_back(static_cast<std::size_t>(node.right));
        }
    }
    for (int v : visits) CHECK(v == 1);
    CHECK(tree.leaf_count() <= params.max_leaf_nodes);

    // Route every row to its leaf and check value = -sum(g) / (count + l2)
    // and the min_samples_leaf floor.
    std::map<std::size_t, std::pair<double, std::int64_t>> leaf_stats;
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t leaf = walk_to_leaf(tree, &binned.bins[r * binned.cols]);
        leaf_stats[leaf].first += g[r];
        leaf_stats[leaf].second += 1;
    }
    CHECK(leaf_stats.size() == static_cast<std::size_t>(tree.leaf_count()));
    std::int64_t covered = 0;
    for (const auto& [leaf, stats] : leaf_stats) {
        const auto& [g_sum, count] = stats;
        CHECK(count >= params.min_samples_leaf);
        const double expected = -g_sum / (static_cast<double>(count) + 2.5);
        CHECK(std::abs(tree.nodes[leaf].value - expected) <=
              1e-12 * std::max(1.0, std::abs(expected)));
        covered += count;
    }
    CHECK(covered == static_cast<std::int64_t>(n));
}

TEST_CASE("fitting with zero learning rate predicts the mean") {
    const auto X = column_matrix({0.0, 1.0, 2.0, 3.0});
    const std::vector<double> y{1.0, 2.0, 3.0, 4.0};
    gbt::GbtParams params;
    params.learning_rate = 0.0;
    params.max_iter = 1;
    params.min_samples_leaf = 1;
    params.early_stopping = false;
    const auto model = gbt::fit(X, y, params);
    CHECK(model.baseline == 2.5);
    for (double p : gbt::predict(model, X)) CHECK(p == 2.5);
}

TEST_CASE("constant targets yield zero-valued single-leaf trees") {
    const auto X = column_matrix({0.0, 1.0, 2.0, 3.0, 4.0});
    const std::vector<double> y(5, 3.75);
    gbt::GbtParams params;
    params.max_iter = 3;
    params.min_samples_leaf = 1;
    params.early_stopping = false;
    const auto model = gbt::fit(X, y, params);
    CHECK(model.baseline == 3.75);
    REQUIRE(model.trees.size() == 3);
    for (const auto& tree : model.trees) {
        REQUIRE(tree.nodes.size() == 1);
        CHECK(tree.nodes[0].value == 0.0);
    }
    for (double p : gbt::predict(model, X)) CHECK(p == 3.75);
    for (double loss : model.train_loss_curve) CHECK(loss == 0.0);
}

TEST_CASE("fit input validation") {
    gbt::GbtParams params;
    params.early_stopping = false;
    params.min_samples_leaf = 1;

    CHECK_THROWS_AS(gbt::fit(column_matrix({1.0}), {1.0}, params), TooFewRows);
    CHECK_THROWS_AS(gbt::fit(column_matrix({1.0, 2.0}), {1.0}, params), DimensionMismatch);
    CHECK_THROWS_AS(gbt::fit(column_matrix({1.0, 2.0}), {1.0, std::nan("")}, params),
                    NonFiniteTarget);
    CHECK_THROWS_AS(
        gbt::fit(column_matrix({1.0, 2.0}), {1.0, std::numeric_limits<double>::infinity()},
                 params),
        NonFiniteTarget);

    // Early stopping needs at least one validation row.
    params.early_stopping = true;
    params.validation_fraction = 0.1;
    const auto X = column_matrix({0.0, 1.0, 2.0, 3.0, 4.0});
    CHECK_THROWS_AS(gbt::fit(X, {1.0, 2.0, 3.0, 4.0, 5.0}, params), TooFewRows);
}

TEST_CASE("training loss never increases without early stopping") {
    std::mt19937_64 rng(417);
    std::uniform_real_distribution<double> feat_dist(-3.0, 3.0);
    std::normal_distribution<double> noise(0.0, 0.5);

    const std::size_t n = 80, d = 3;
    Matrix X(n, d);
    std::vector<double> y(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) X(r, c) = feat_dist(rng);
        y[r] = std::sin(X(r, 0)) + 0.5 * X(r, 1) + noise(rng);
    }

    gbt::GbtParams params;
    params.learning_rate = 0.35;
    params.max_iter = 60;
    params.max_leaf_nodes = 8;
    params.min_samples_leaf = 4;
    params.l2_regularization = 0.7;
    params.early_stopping = false;
    const auto model = gbt::fit(X, y, params);

    REQUIRE(model.train_loss_curve.size() == model.trees.size() + 1);
    REQUIRE(model.train_loss_curve.size() == 61);
    CHECK_FALSE(model.stopped_early_at.has_value());

    // First entry is the baseline-only loss, reproduced with the same
    // accumulation order.
    const std::vector<double> base_pred(n, model.baseline);
    CHECK(model.train_loss_curve.front() == mse_rowwise(base_pred, y));

    for (std::size_t i = 1; i < model.train_loss_curve.size(); ++i) {
        CHECK(model.train_loss_curve[i] <=
              model.train_loss_curve[i - 1] +
                  1e-12 * std::max(1.0, model.train_loss_curve[i - 1]));
    }

    // The recorded final loss is exactly the loss of predict() outputs.
    CHECK(model.train_loss_curve.back() == mse_rowwise(gbt::predict(model, X), y));
    CHECK(model.train_loss_curve.back() < model.train_loss_curve.front());
}

TEST_CASE("repeated fits are bit-identical") {
    std::mt19937_64 rng(418);
    std::uniform_real_distribution<double> feat_dist(-3.0, 3.0);
    const std::size_t n = 120, d = 4;
    Matrix X(n, d);
    std::vector<double> y(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) X(r, c) = feat_dist(rng);
        y[r] = X(r, 0) * X(r, 1) + feat_dist(rng);
    }

    gbt::GbtParams params;
    params.max_iter = 40;
    params.min_samples_leaf = 5;
    params.early_stopping = true;  // exercises the seeded validation shuffle
    params.validation_fraction = 0.2;
    params.n_iter_no_change = 10;
    params.seed = 97;

    const auto a = gbt::fit(X, y, params);
    const auto b = gbt::fit(X, y, params);
    CHECK(a.baseline == b.baseline);
    CHECK(a.learning_rate == b.learning_rate);
    CHECK(a.bin_mapper == b.bin_mapper);
    CHECK(a.stopped_early_at == b.stopped_early_at);
    REQUIRE(a.trees.size() == b.trees.size());
    for (std::size_t t = 0; t < a.trees.size(); ++t) CHECK(a.trees[t] == b.trees[t]);
    REQUIRE(a.train_loss_curve.size() == b.train_loss_curve.size());
    for (std::size_t i = 0; i < a.train_loss_curve.size(); ++i)
        CHECK(a.train_loss_curve[i] == b.train_loss_curve[i]);

    // A different seed moves the validation split and must change the model.
    params.seed = 98;
    const auto c = gbt::fit(X, y, params);
    CHECK(a.baseline != c.baseline);
}

TEST_CASE("a full-capacity single tree memorizes distinct targets") {
    // Targets 0..15 have mean 7.5; every per-row residual and its
    // reconstruction baseline + (y - baseline) is exact in floating point.
    std::vector<double> y(16);
    std::iota(y.begin(), y.end(), 0.0);
    std::mt19937_64 rng(419);
    std::shuffle(y.begin(), y.end(), rng);
    std::vector<double> x(16);
    std::iota(x.begin(), x.end(), 0.0);

    gbt::GbtParams params;
    params.learning_rate = 1.0;
    params.max_iter = 1;
    params.max_leaf_nodes = 32;
    params.min_samples_leaf = 1;
    params.l2_regularization = 0.0;
    params.early_stopping = false;
    const auto model = gbt::fit(column_matrix(x), y, params);

    const auto pred = gbt::predict(model, column_matrix(x));
    REQUIRE(pred.size() == y.size());
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(pred[i] == y[i]);
    CHECK(model.trees[0].leaf_count() == 16);
    CHECK(model.train_loss_curve.back() == 0.0);
}

TEST_CASE("early stopping truncates to the best iteration") {
    std::mt19937_64 rng(420);
    std::uniform_real_distribution<double> feat_dist(-3.0, 3.0);
    std::normal_distribution<double> noise(0.0, 1.0);

    // Pure noise: validation loss stops improving almost immediately.
    const std::size_t n = 60;
    Matrix X(n, 2);
    std::vector<double> y(n);
    for (std::size_t r = 0; r < n; ++r) {
        X(r, 0) = feat_dist(rng);
        X(r, 1) = feat_dist(rng);
        y[r] = noise(rng);
    }

    gbt::GbtParams params;
    params.max_iter = 200;
    params.max_leaf_nodes = 16;
    params.min_samples_leaf = 2;
    params.early_stopping = true;
    params.validation_fraction = 0.25;
    params.n_iter_no_change = 5;
    params.tol = 0.0;
    params.seed = 3;
    const auto model = gbt::fit(X, y, params);

    REQUIRE(model.stopped_early_at.has_value());
    CHECK(*model.stopped_early_at < params.max_iter);
    CHECK(model.trees.size() == static_cast<std::size_t>(*model.stopped_early_at));
    CHECK(model.train_loss_curve.size() == model.trees.size() + 1);

    // With room to run out the clock instead, no early stop is recorded but
    // the kept prefix still matches the loss curve.
    params.max_iter = 2;
    params.n_iter_no_change = 50;
    const auto short_run = gbt::fit(X, y, params);
    CHECK_FALSE(short_run.stopped_early_at.has_value());
    CHECK(short_run.train_loss_curve.size() == short_run.trees.size() + 1);
    CHECK(short_run.trees.size() <= 2);
}

TEST_CASE("histogram verification mode changes nothing") {
    std::mt19937_64 rng(421);
    std::uniform_real_distribution<double> feat_dist(-3.0, 3.0);
    const std::size_t n = 90, d = 3;
    Matrix X(n, d);
    std::vector<double> y(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) X(r, c) = feat_dist(rng);
        y[r] = X(r, 0) - 2.0 * X(r, 2) + feat_dist(rng);
    }

    gbt::GbtParams params;
    params.max_iter = 25;
    params.min_samples_leaf = 3;
    params.early_stopping = false;

    const auto plain = gbt::fit(X, y, params);
    params.verify_histograms = true;
    const auto checked = gbt::fit(X, y, params);

    REQUIRE(plain.trees.size() == checked.trees.size());
    for (std::size_t t = 0; t < plain.trees.size(); ++t)
        CHECK(plain.trees[t] == checked.trees[t]);
}

TEST_CASE("single boosting step equals the exact greedy tree") {
    std::mt19937_64 rng(422);
    std::uniform_real_distribution<double> target_dist(-5.0, 5.0);

    for (int rep = 0; rep < 40; ++rep) {
        std::uniform_int_distribution<std::size_t> n_dist(5, 64);
        std::uniform_int_distribution<std::size_t> d_dist(1, 3);
        std::uniform_int_distribution<int> value_dist(0, 15);
        const std::size_t n = n_dist(rng);
        const std::size_t d = d_dist(rng);

        Matrix X(n, d);
        std::vector<std::vector<double>> X_rows(n, std::vector<double>(d));
        std::vector<double> y(n);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < d; ++c) {
                X(r, c) = static_cast<double>(value_dist(rng));
                X_rows[r][c] = X(r, c);
            }
            y[r] = target_dist(rng);
        }

        gbt::GbtParams params;
        params.learning_rate = 1.0;
        params.max_iter = 1;
        params.max_leaf_nodes = 4;
        params.min_samples_leaf = 1;
        params.l2_regularization = 0.0;
        params.max_bins = 255;
        params.early_stopping = false;
        const auto model = gbt::fit(X, y, params);
        const auto pred = gbt::predict(model, X);

        const auto expected =
            oracles::oracle_tree_predictions(X_rows, y, oracles::OracleTreeParams{4, 1});
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::abs(pred[i] - expected[i]) <= 1e-9);
    }
}

TEST_CASE("prediction basics") {
    const auto X = column_matrix({0.0, 5.0, 10.0});

    SUBCASE("zero-tree model predicts the baseline everywhere") {
        gbt::GbtModel model;
        model.baseline = 3.25;
        model.learning_rate = 0.5;
        model.bin_mapper = gbt::fit_bins(X, 255);
        for (double p : gbt::predict(model, X)) CHECK(p == 3.25);
    }

    SUBCASE("out-of-range values route to the last bin") {
        std::vector<double> y{1.0, 2.0, 4.0};
        gbt::GbtParams params;
        params.min_samples_leaf = 1;
        params.max_iter = 5;
        params.early_stopping = false;
        const auto model = gbt::fit(X, y, params);
        const auto probe = gbt::predict(model, column_matrix({10.0, 1e9}));
        CHECK(probe[0] == probe[1]);
        CHECK(std::isfinite(probe[1]));
    }

    SUBCASE("column count must match the fitted mapper") {
        gbt::GbtModel model;
        model.bin_mapper = gbt::fit_bins(X, 255);
        CHECK_THROWS_AS(gbt::predict(model, Matrix(2, 2)), DimensionMismatch);
    }
}
