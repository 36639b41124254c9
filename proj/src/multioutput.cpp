#include "engage/multioutput.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "engage/errors.hpp"

namespace engage {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<double> column_of(const Matrix& Y, std::size_t c) {
    std::vector<double> out(Y.rows());
    for (std::size_t i = 0; i < Y.rows(); ++i) out[i] = Y(i, c);
    return out;
}

gbt::GbtModel fit_labeled(const Matrix& X, const std::vector<double>& y,
                          const gbt::GbtParams& params, const char* target) {
    try {
        return gbt::fit(X, y, params);
    } catch (const Error& e) {
        throw Error(std::string("fitting target ") + target + ": " + e.what());
    }
}

ordered_json params_to_json(const gbt::GbtParams& p) {
    ordered_json j;
    j["learning_rate"] = p.learning_rate;
    j["max_iter"] = p.max_iter;
    j["max_leaf_nodes"] = p.max_leaf_nodes;
    j["min_samples_leaf"] = p.min_samples_leaf;
    j["l2_regularization"] = p.l2_regularization;
    j["max_bins"] = p.max_bins;
    j["early_stopping"] = p.early_stopping;
    j["validation_fraction"] = p.validation_fraction;
    j["n_iter_no_change"] = p.n_iter_no_change;
    j["tol"] = p.tol;
    j["seed"] = p.seed;
    return j;
}

ordered_json node_to_json(const gbt::TreeNode& node) {
    ordered_json j;
    if (node.is_leaf) {
        j["leaf"] = node.value;
    } else {
        j["feature"] = node.feature;
        j["bin"] = node.bin;
        j["threshold"] = node.threshold;
        j["left"] = node.left;
        j["right"] = node.right;
    }
    return j;
}

ordered_json model_to_json(const gbt::GbtModel& m) {
    ordered_json j;
    j["baseline"] = m.baseline;
    j["learning_rate"] = m.learning_rate;
    j["bin_mapper"] = m.bin_mapper.thresholds;
    ordered_json trees = ordered_json::array();
    for (const auto& tree : m.trees) {
        ordered_json nodes = ordered_json::array();
        for (const auto& node : tree.nodes) nodes.push_back(node_to_json(node));
        trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);
    return j;
}

// --- load-side helpers: every structural assumption funnels through these ---

[[noreturn]] void bad_schema(const std::string& what) { throw SchemaError("model file: " + what); }

const ordered_json& require(const ordered_json& obj, const char* key, const char* where) {
    if (!obj.is_object() || !obj.contains(key))
        bad_schema(std::string(where) + " is missing \"" + key + "\"");
    return obj.at(key);
}

double require_double(const ordered_json& obj, const char* key, const char* where) {
    const auto& v = require(obj, key, where);
    if (!v.is_number()) bad_schema(std::string(where) + "." + key + " is not a number");
    return v.get<double>();
}

int require_int(const ordered_json& obj, const char* key, const char* where) {
    const auto& v = require(obj, key, where);
    if (!v.is_number_integer()) bad_schema(std::string(where) + "." + key + " is not an integer");
    return v.get<int>();
}

bool require_bool(const ordered_json& obj, const char* key, const char* where) {
    const auto& v = require(obj, key, where);
    if (!v.is_boolean()) bad_schema(std::string(where) + "." + key + " is not a boolean");
    return v.get<bool>();
}

std::string require_string(const ordered_json& obj, const char* key, const char* where) {
    const auto& v = require(obj, key, where);
    if (!v.is_string()) bad_schema(std::string(where) + "." + key + " is not a string");
    return v.get<std::string>();
}

gbt::GbtParams params_from_json(const ordered_json& j, const char* where) {
    gbt::GbtParams p;
    p.learning_rate = require_double(j, "learning_rate", where);
    p.max_iter = require_int(j, "max_iter", where);
    p.max_leaf_nodes = require_int(j, "max_leaf_nodes", where);
    p.min_samples_leaf = require_int(j, "min_samples_leaf", where);
    p.l2_regularization = require_double(j, "l2_regularization", where);
    p.max_bins = require_int(j, "max_bins", where);
    p.early_stopping = require_bool(j, "early_stopping", where);
    p.validation_fraction = require_double(j, "validation_fraction", where);
    p.n_iter_no_change = require_int(j, "n_iter_no_change", where);
    p.tol = require_double(j, "tol", where);
    const auto& seed = require(j, "seed", where);
    if (!seed.is_number_integer() && !seed.is_number_unsigned())
        bad_schema(std::string(where) + ".seed is not an integer");
    p.seed = seed.get<std::uint64_t>();
    return p;
}

gbt::GbtModel model_from_json(const ordered_json& j, const char* where) {
    gbt::GbtModel m;
    m.baseline = require_double(j, "baseline", where);
    m.learning_rate = require_double(j, "learning_rate", where);

    const auto& mapper = require(j, "bin_mapper", where);
    if (!mapper.is_array()) bad_schema(std::string(where) + ".bin_mapper is not an array");
    for (const auto& feature : mapper) {
        if (!feature.is_array()) bad_schema(std::string(where) + ".bin_mapper entry is not an array");
        std::vector<double> thresholds;
        thresholds.reserve(feature.size());
        for (const auto& t : feature) {
            if (!t.is_number()) bad_schema(std::string(where) + ".bin_mapper holds a non-number");
            thresholds.push_back(t.get<double>());
        }
        m.bin_mapper.thresholds.push_back(std::move(thresholds));
    }

    const auto& trees = require(j, "trees", where);
    if (!trees.is_array()) bad_schema(std::string(where) + ".trees is not an array");
    const int n_features = static_cast<int>(m.bin_mapper.n_features());
    for (const auto& tree_json : trees) {
        if (!tree_json.is_array() || tree_json.empty())
            bad_schema(std::string(where) + " holds an empty or non-array tree");
        gbt::Tree tree;
        const int n_nodes = static_cast<int>(tree_json.size());
        for (const auto& node_json : tree_json) {
            gbt::TreeNode node;
            if (node_json.contains("leaf")) {
                node.is_leaf = true;
                node.value = require_double(node_json, "leaf", where);
            } else {
                node.is_leaf = false;
                node.feature = require_int(node_json, "feature", where);
                node.bin = require_int(node_json, "bin", where);
                node.threshold = require_double(node_json, "threshold", where);
                node.left = require_int(node_json, "left", where);
                node.right = require_int(node_json, "right", where);
                if (node.feature < 0 || node.feature >= n_features)
                    bad_schema(std::string(where) + " split references a bad feature index");
                if (node.bin < 0 || node.bin > 255)
                    bad_schema(std::string(where) + " split references a bad bin index");
                if (node.left < 0 || node.left >= n_nodes || node.right < 0 || node.right >= n_nodes)
                    bad_schema(std::string(where) + " split references a bad child index");
            }
            tree.nodes.push_back(node);
        }
        m.trees.push_back(std::move(tree));
    }
    return m;
}

}  // namespace

EngagementModel fit_multi(const Matrix& X, const Matrix& Y, const gbt::GbtParams& params,
                          const PipelineState& pipeline,
                          const std::vector<std::string>& feature_order) {
    if (Y.cols() != 2) throw DimensionMismatch("Y must have exactly 2 columns");
    if (X.rows() != Y.rows()) throw DimensionMismatch("X and Y row counts differ");
    if (X.cols() != feature_order.size())
        throw DimensionMismatch("X column count does not match the feature order");

    EngagementModel model;
    model.model_cr = fit_labeled(X, column_of(Y, 0), params, "log_cr");
    model.model_lr = fit_labeled(X, column_of(Y, 1), params, "log_lr");
    model.pipeline = pipeline;
    model.feature_order = feature_order;
    model.params_cr = params;
    model.params_lr = params;
    return model;
}

Matrix predict_multi(const EngagementModel& model, const Matrix& X) {
    if (X.cols() != model.feature_order.size())
        throw DimensionMismatch("X column count does not match the model's feature order");
    const std::vector<double> pred_cr = gbt::predict(model.model_cr, X);
    const std::vector<double> pred_lr = gbt::predict(model.model_lr, X);
    Matrix out(X.rows(), 2);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        out(i, 0) = pred_cr[i];
        out(i, 1) = pred_lr[i];
    }
    return out;
}

void save_model(const EngagementModel& model, const std::string& path) {
    ordered_json j;
    j["format_version"] = model.format_version;
    j["feature_order"] = model.feature_order;

    ordered_json pipeline;
    pipeline["reference_date"] = model.pipeline.resolved_reference_date.to_iso();
    pipeline["clip_quantile"] = model.pipeline.config.clip_quantile;
    pipeline["include_log_clr"] = model.pipeline.config.include_log_clr;
    ordered_json clips;
    clips["cr"] = model.pipeline.clip_thresholds.cr;
    clips["lr"] = model.pipeline.clip_thresholds.lr;
    clips["clr"] = model.pipeline.clip_thresholds.clr;
    pipeline["clip_thresholds"] = std::move(clips);
    j["pipeline"] = std::move(pipeline);

    ordered_json params_used;
    params_used["log_cr"] = params_to_json(model.params_cr);
    params_used["log_lr"] = params_to_json(model.params_lr);
    j["params_used"] = std::move(params_used);

    j["model_cr"] = model_to_json(model.model_cr);
    j["model_lr"] = model_to_json(model.model_lr);

    // Write to a sibling temp file first so a crash never leaves a torn model.
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp + " for writing");
        out << j.dump(2) << '\n';
        out.flush();
        if (!out) throw IoError("failed writing " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot replace " + path + ": " + ec.message());
    }
}

EngagementModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);

    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("model file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) bad_schema("top level is not an object");

    const auto& version = require(j, "format_version", "model");
    if (!version.is_number_integer()) bad_schema("format_version is not an integer");
    const int v = version.get<int>();
    if (v != kModelFormatVersion) throw FormatError(v);

    EngagementModel model;
    model.format_version = v;

    const auto& order = require(j, "feature_order", "model");
    if (!order.is_array()) bad_schema("feature_order is not an array");
    for (const auto& name : order) {
        if (!name.is_string()) bad_schema("feature_order holds a non-string");
        model.feature_order.push_back(name.get<std::string>());
    }

    const auto& pipeline = require(j, "pipeline", "model");
    const std::string iso = require_string(pipeline, "reference_date", "pipeline");
    const auto date = Date::parse(iso);
    if (!date) bad_schema("pipeline.reference_date is not a valid date");
    model.pipeline.resolved_reference_date = *date;
    model.pipeline.config.reference_date = *date;
    model.pipeline.config.clip_quantile = require_double(pipeline, "clip_quantile", "pipeline");
    model.pipeline.config.include_log_clr = require_bool(pipeline, "include_log_clr", "pipeline");
    const auto& clips = require(pipeline, "clip_thresholds", "pipeline");
    model.pipeline.clip_thresholds.cr = require_double(clips, "cr", "clip_thresholds");
    model.pipeline.clip_thresholds.lr = require_double(clips, "lr", "clip_thresholds");
    model.pipeline.clip_thresholds.clr = require_double(clips, "clr", "clip_thresholds");

    const auto& params_used = require(j, "params_used", "model");
    model.params_cr = params_from_json(require(params_used, "log_cr", "params_used"), "params_used.log_cr");
    model.params_lr = params_from_json(require(params_used, "log_lr", "params_used"), "params_used.log_lr");

    model.model_cr = model_from_json(require(j, "model_cr", "model"), "model_cr");
    model.model_lr = model_from_json(require(j, "model_lr", "model"), "model_lr");

    if (model.model_cr.bin_mapper.n_features() != model.feature_order.size() ||
        model.model_lr.bin_mapper.n_features() != model.feature_order.size())
        bad_schema("bin_mapper width does not match feature_order");

    return model;
}

}  // namespace engage
