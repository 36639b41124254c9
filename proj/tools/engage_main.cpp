// Batch front-end: synth / prepare / train / tune / evaluate / predict.
//
// Exit codes: 0 success, 1 data or validation failure, 2 usage error.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "engage/csv.hpp"
#include "engage/errors.hpp"
#include "engage/features.hpp"
#include "engage/gbt.hpp"
#include "engage/metrics.hpp"
#include "engage/multioutput.hpp"
#include "engage/rng.hpp"
#include "engage/synth.hpp"
#include "engage/tabular.hpp"
#include "engage/tuning.hpp"

namespace {

using engage::Date;
using engage::RawTable;
using ordered_json = nlohmann::ordered_json;

// Stream tag for the train/test shuffle, independent of the model's own
// seeded streams.
constexpr std::uint64_t kStreamSplit = 21;

// Plain key=value option file. Lines are trimmed; blank lines and #-comments
// are skipped; a bare key acts as a flag. Values are injected into the arg
// list ahead of the explicit flags, so the command line wins.
std::vector<std::string> read_config_pairs(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: cannot open config file: " << path << "\n";
        std::exit(2);
    }
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            out.push_back("--" + t);
            continue;
        }
        const std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        if (key.empty()) {
            std::cerr << "error: config file line has no key: " << line << "\n";
            std::exit(2);
        }
        out.push_back("--" + key + "=" + value);
    }
    return out;
}

std::vector<std::string> expand_config_args(const std::vector<std::string>& sub_names,
                                            std::vector<std::string> args) {
    std::size_t sub_pos = args.size();
    for (std::size_t i = 0; i < args.size(); ++i) {
        for (const auto& name : sub_names)
            if (args[i] == name) {
                sub_pos = i;
                break;
            }
        if (sub_pos != args.size()) break;
    }
    if (sub_pos == args.size()) return args;

    std::string config_path;
    for (std::size_t i = sub_pos + 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            config_path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            config_path = args[i].substr(9);
    }
    if (config_path.empty()) return args;

    const std::vector<std::string> injected = read_config_pairs(config_path);
    std::vector<std::string> out;
    out.reserve(args.size() + injected.size());
    out.insert(out.end(), args.begin(), args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1);
    out.insert(out.end(), injected.begin(), injected.end());
    out.insert(out.end(), args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, args.end());
    return out;
}

Date parse_date_arg(const std::string& text, const char* flag) {
    const auto date = Date::parse(text);
    if (!date) throw engage::InvalidParams(std::string(flag) + " is not a valid date: " + text);
    return *date;
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw engage::IoError("cannot open " + tmp + " for writing");
        out << content;
        out.flush();
        if (!out) throw engage::IoError("failed writing " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw engage::IoError("cannot replace " + path + ": " + ec.message());
    }
}

RawTable subset(const RawTable& table, const std::vector<std::size_t>& rows) {
    RawTable out;
    out.records.reserve(rows.size());
    out.source_row_indices.reserve(rows.size());
    for (std::size_t r : rows) {
        out.records.push_back(table.records[r]);
        out.source_row_indices.push_back(table.source_row_indices[r]);
    }
    return out;
}

// Latest upload date across the whole cleaned table. Resolving this before
// the split keeps test rows from out-aging a train-only reference.
Date latest_upload(const RawTable& table) {
    Date latest = table.records.front().upload_date;
    for (const auto& rec : table.records)
        if (latest < rec.upload_date) latest = rec.upload_date;
    return latest;
}

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

SplitIndices split_rows(std::size_t n, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0) || !(fraction < 1.0))
        throw engage::InvalidParams("--split must be strictly between 0 and 1");
    if (n < 2) throw engage::TooFewRows("need at least 2 rows to split");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    engage::Rng rng(engage::derive_seed(seed, kStreamSplit));
    rng.shuffle(order);

    auto n_train = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(n)));
    if (n_train < 1) n_train = 1;
    if (n_train > n - 1) n_train = n - 1;

    SplitIndices split;
    split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

ordered_json params_json(const engage::gbt::GbtParams& p) {
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

ordered_json target_metrics_json(const engage::TargetMetrics& m) {
    ordered_json j;
    j["oom_accuracy"] = m.oom_accuracy;
    j["mae_orders"] = m.mae_orders;
    j["mae"] = m.mae;
    j["rmse"] = m.rmse;
    j["r2"] = m.r2;
    j["n_rows"] = m.n_rows;
    return j;
}

ordered_json report_metrics_json(const engage::MetricsReport& report) {
    ordered_json j;
    j["comments"] = target_metrics_json(report.comments);
    j["likes"] = target_metrics_json(report.likes);
    return j;
}

ordered_json pipeline_json(const engage::PipelineState& state) {
    ordered_json j;
    j["reference_date"] = state.resolved_reference_date.to_iso();
    j["clip_quantile"] = state.config.clip_quantile;
    j["include_log_clr"] = state.config.include_log_clr;
    ordered_json clips;
    clips["cr"] = state.clip_thresholds.cr;
    clips["lr"] = state.clip_thresholds.lr;
    clips["clr"] = state.clip_thresholds.clr;
    j["clip_thresholds"] = std::move(clips);
    return j;
}

ordered_json booster_summary_json(const engage::gbt::GbtModel& m) {
    ordered_json j;
    j["n_trees"] = m.trees.size();
    j["final_train_mse"] = m.train_loss_curve.empty() ? 0.0 : m.train_loss_curve.back();
    if (m.stopped_early_at)
        j["stopped_early_at"] = *m.stopped_early_at;
    else
        j["stopped_early_at"] = nullptr;
    return j;
}

// ---------------------------------------------------------------------------
// Shared option bundles

struct DataOpts {
    std::string input;
    std::uint64_t seed = 42;
    double split = 0.8;
    double clip_quantile = 0.99;
    bool drop_log_clr = false;
    std::string reference_date;  // empty = latest upload date in the data
};

struct GbtOpts {
    engage::gbt::GbtParams params;
    bool no_early_stopping = false;

    engage::gbt::GbtParams resolve(std::uint64_t seed) const {
        engage::gbt::GbtParams p = params;
        p.early_stopping = !no_early_stopping;
        p.seed = seed;
        return p;
    }
};

void add_data_options(CLI::App* cmd, DataOpts& opts) {
    cmd->add_option("--input", opts.input, "input CSV file")->required();
    cmd->add_option("--seed", opts.seed, "seed for every random choice");
    cmd->add_option("--split", opts.split, "train fraction of the cleaned rows");
    cmd->add_option("--clip-quantile", opts.clip_quantile, "ratio clipping quantile");
    cmd->add_flag("--drop-log-clr", opts.drop_log_clr,
                  "exclude the comments-to-likes feature");
    cmd->add_option("--reference-date", opts.reference_date,
                    "fixed reference date for track age (default: latest upload date)");
}

void add_gbt_options(CLI::App* cmd, GbtOpts& opts) {
    cmd->add_option("--learning-rate", opts.params.learning_rate, "shrinkage per tree");
    cmd->add_option("--max-iter", opts.params.max_iter, "boosting iterations");
    cmd->add_option("--max-leaf-nodes", opts.params.max_leaf_nodes, "leaves per tree");
    cmd->add_option("--min-samples-leaf", opts.params.min_samples_leaf, "minimum rows per leaf");
    cmd->add_option("--l2", opts.params.l2_regularization, "L2 regularization");
    cmd->add_option("--max-bins", opts.params.max_bins, "histogram bins per feature");
    cmd->add_flag("--no-early-stopping", opts.no_early_stopping, "disable early stopping");
    cmd->add_option("--validation-fraction", opts.params.validation_fraction,
                    "holdout fraction for early stopping");
    cmd->add_option("--n-iter-no-change", opts.params.n_iter_no_change,
                    "early-stopping patience");
    cmd->add_option("--tol", opts.params.tol, "early-stopping improvement tolerance");
}

struct LoadedData {
    RawTable cleaned;
    std::size_t rows_parsed = 0;
    std::size_t rows_dropped_missing = 0;
    std::size_t rows_filtered = 0;
};

LoadedData load_and_clean(const std::string& path) {
    LoadedData out;
    const RawTable raw = engage::load_csv(path);
    out.rows_parsed = raw.records.size();
    out.rows_dropped_missing = raw.dropped_missing;
    out.cleaned = engage::clean(raw);
    out.rows_filtered = out.rows_parsed - out.cleaned.records.size();
    return out;
}

engage::PipelineConfig make_pipeline_config(const DataOpts& opts, const RawTable& cleaned) {
    engage::PipelineConfig config;
    config.clip_quantile = opts.clip_quantile;
    config.include_log_clr = !opts.drop_log_clr;
    if (!opts.reference_date.empty())
        config.reference_date = parse_date_arg(opts.reference_date, "--reference-date");
    else
        config.reference_date = latest_upload(cleaned);
    return config;
}

// ---------------------------------------------------------------------------
// Subcommands

int run_synth(const std::string& output, engage::synth::SynthConfig config,
              const std::string& date_start, const std::string& date_end) {
    config.date_start = parse_date_arg(date_start, "--date-start");
    config.date_end = parse_date_arg(date_end, "--date-end");
    const RawTable table = engage::synth::generate(config);
    engage::write_csv(output, table);
    std::cout << "wrote " << table.records.size() << " rows to " << output << "\n";
    return 0;
}

int run_prepare(const std::string& input, const std::string& output) {
    const LoadedData data = load_and_clean(input);
    engage::write_csv(output, data.cleaned);
    std::cout << "parsed " << data.rows_parsed << " rows ("
              << data.rows_dropped_missing << " dropped for missing fields), kept "
              << data.cleaned.records.size() << " after filtering "
              << data.rows_filtered << ", wrote " << output << "\n";
    return 0;
}

int run_train(const DataOpts& data_opts, const GbtOpts& gbt_opts, const std::string& model_path,
              const std::string& report_path) {
    const LoadedData data = load_and_clean(data_opts.input);
    const engage::PipelineConfig config = make_pipeline_config(data_opts, data.cleaned);

    const SplitIndices split =
        split_rows(data.cleaned.records.size(), data_opts.split, data_opts.seed);
    const RawTable train_table = subset(data.cleaned, split.train);
    const RawTable test_table = subset(data.cleaned, split.test);

    auto [train_design, state] = engage::build_design(train_table, config);
    const engage::DesignMatrices test_design = engage::build_design(test_table, state);

    const engage::gbt::GbtParams params = gbt_opts.resolve(data_opts.seed);
    const engage::EngagementModel model =
        engage::fit_multi(train_design.X, train_design.Y, params, state, config.feature_order());

    const engage::MetricsReport report = engage::evaluate(model, test_design);

    engage::save_model(model, model_path);

    ordered_json j;
    j["command"] = "train";
    ordered_json input;
    input["path"] = data_opts.input;
    input["rows_parsed"] = data.rows_parsed;
    input["rows_dropped_missing"] = data.rows_dropped_missing;
    input["rows_filtered"] = data.rows_filtered;
    input["rows_used"] = data.cleaned.records.size();
    j["input"] = std::move(input);
    ordered_json split_j;
    split_j["fraction"] = data_opts.split;
    split_j["seed"] = data_opts.seed;
    split_j["n_train"] = split.train.size();
    split_j["n_test"] = split.test.size();
    j["split"] = std::move(split_j);
    j["pipeline"] = pipeline_json(state);
    j["params"] = params_json(params);
    ordered_json training;
    training["log_cr"] = booster_summary_json(model.model_cr);
    training["log_lr"] = booster_summary_json(model.model_lr);
    j["training"] = std::move(training);
    j["metrics"] = report_metrics_json(report);
    ordered_json diag;
    diag["floored_predictions"] = report.floored_predictions;
    j["diagnostics"] = std::move(diag);

    if (!report_path.empty()) write_text_atomic(report_path, j.dump(2) + "\n");

    std::cout << "trained on " << split.train.size() << " rows, evaluated on "
              << split.test.size() << " rows\n";
    std::cout << "model written to " << model_path << "\n";
    if (!report_path.empty()) std::cout << "report written to " << report_path << "\n";
    std::cout << "\n" << engage::format_report_table(report);
    return 0;
}

int run_tune(const DataOpts& data_opts, const engage::tuning::ParamSpace& space,
             engage::tuning::HalvingConfig halving, const std::string& best_out,
             const std::string& trials_out, bool refit, const std::string& model_path) {
    halving.seed = data_opts.seed;

    const LoadedData data = load_and_clean(data_opts.input);
    const engage::PipelineConfig config = make_pipeline_config(data_opts, data.cleaned);

    const SplitIndices split =
        split_rows(data.cleaned.records.size(), data_opts.split, data_opts.seed);
    const RawTable train_table = subset(data.cleaned, split.train);
    const RawTable test_table = subset(data.cleaned, split.test);

    auto [train_design, state] = engage::build_design(train_table, config);

    const engage::tuning::SearchResult result =
        engage::tuning::halving_search(train_design, state, space, halving);

    ordered_json best;
    best["best_params"] = params_json(result.best_params);
    best["best_score"] = result.best_score;
    ordered_json schedule = ordered_json::array();
    for (const auto& rung : result.schedule) {
        ordered_json r;
        r["n_candidates"] = rung.n_candidates;
        r["resource"] = rung.resource;
        schedule.push_back(std::move(r));
    }
    best["schedule"] = std::move(schedule);
    write_text_atomic(best_out, best.dump(2) + "\n");

    if (!trials_out.empty()) {
        std::string lines;
        for (const auto& trial : result.trial_log) {
            ordered_json t;
            t["rung"] = trial.rung;
            t["candidate"] = trial.candidate;
            t["resource"] = trial.resource;
            if (trial.failed)
                t["score"] = nullptr;
            else
                t["score"] = trial.score;
            t["failed"] = trial.failed;
            lines += t.dump() + "\n";
        }
        write_text_atomic(trials_out, lines);
    }

    std::cout << "searched " << halving.n_candidates << " candidates over "
              << result.schedule.size() << " rungs\n";
    std::cout << "best score (neg-MAE): " << result.best_score << "\n";
    std::cout << "best params written to " << best_out << "\n";

    if (refit) {
        const engage::DesignMatrices test_design = engage::build_design(test_table, state);
        engage::gbt::GbtParams params = result.best_params;
        params.seed = data_opts.seed;
        const engage::EngagementModel model = engage::fit_multi(
            train_design.X, train_design.Y, params, state, config.feature_order());
        const engage::MetricsReport report = engage::evaluate(model, test_design);
        engage::save_model(model, model_path);
        std::cout << "refit model written to " << model_path << "\n";
        std::cout << "\n" << engage::format_report_table(report);
    }
    return 0;
}

int run_evaluate(const std::string& model_path, const std::string& input,
                 const std::string& report_path) {
    const engage::EngagementModel model = engage::load_model(model_path);
    const LoadedData data = load_and_clean(input);
    const engage::DesignMatrices design = engage::build_design(data.cleaned, model.pipeline);
    const engage::MetricsReport report = engage::evaluate(model, design);

    if (!report_path.empty()) {
        ordered_json j;
        j["command"] = "evaluate";
        ordered_json input_j;
        input_j["path"] = input;
        input_j["rows_parsed"] = data.rows_parsed;
        input_j["rows_dropped_missing"] = data.rows_dropped_missing;
        input_j["rows_filtered"] = data.rows_filtered;
        input_j["rows_used"] = data.cleaned.records.size();
        j["input"] = std::move(input_j);
        j["pipeline"] = pipeline_json(model.pipeline);
        j["metrics"] = report_metrics_json(report);
        ordered_json diag;
        diag["floored_predictions"] = report.floored_predictions;
        j["diagnostics"] = std::move(diag);
        write_text_atomic(report_path, j.dump(2) + "\n");
        std::cout << "report written to " << report_path << "\n";
    }
    std::cout << engage::format_report_table(report);
    return 0;
}

int run_predict(const std::string& model_path, const std::string& input,
                const std::string& output) {
    const engage::EngagementModel model = engage::load_model(model_path);

    // The comments-to-likes feature needs real engagement columns; without it
    // the input only has to carry views and a date.
    const bool needs_engagement = model.pipeline.config.include_log_clr;
    const RawTable raw = engage::load_csv_features(input, {}, needs_engagement);

    RawTable scorable;
    for (std::size_t i = 0; i < raw.records.size(); ++i) {
        const auto& rec = raw.records[i];
        if (rec.views < 1 || rec.likes < 1) continue;
        scorable.records.push_back(rec);
        scorable.source_row_indices.push_back(raw.source_row_indices[i]);
    }
    const std::size_t skipped = raw.records.size() - scorable.records.size();
    if (scorable.records.empty()) throw engage::EmptyAfterClean();
    if (skipped > 0)
        std::cerr << "skipped " << skipped << " unscorable rows (zero views or zero likes)\n";

    const engage::DesignMatrices design = engage::build_design(scorable, model.pipeline);
    const engage::Matrix preds = engage::predict_multi(model, design.X);

    std::string csv = "track_id,predicted_comments,predicted_likes,order_comments,order_likes\n";
    for (std::size_t i = 0; i < design.X.rows(); ++i) {
        const engage::BackTransformed bt =
            engage::back_transform(preds(i, 0), preds(i, 1), design.views[i]);
        csv += engage::csv::escape_field(scorable.records[i].track_id);
        csv += ',';
        csv += engage::csv::format_double(bt.comments);
        csv += ',';
        csv += engage::csv::format_double(bt.likes);
        csv += ',';
        csv += std::to_string(engage::order_of(bt.comments));
        csv += ',';
        csv += std::to_string(engage::order_of(bt.likes));
        csv += '\n';
    }
    write_text_atomic(output, csv);
    std::cout << "wrote " << design.X.rows() << " predictions to " << output << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"engagement count prediction from audio emotion scores"};
    app.require_subcommand(1);

    // Repeated options keep the last value so config-file entries (injected
    // first) lose to explicit flags.
    std::string config_file_sink;
    auto add_common = [&](CLI::App* cmd) {
        cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        cmd->add_option("--config", config_file_sink, "key=value option file");
    };

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic engagement CSV");
    add_common(synth_cmd);
    engage::synth::SynthConfig synth_config;
    synth_config.seed = 42;
    std::string synth_output;
    std::string synth_start = "2018-01-01";
    std::string synth_end = "2023-12-31";
    synth_cmd->add_option("--output", synth_output, "output CSV path")->required();
    synth_cmd->add_option("--rows", synth_config.n_rows, "number of rows");
    synth_cmd->add_option("--seed", synth_config.seed, "generator seed");
    synth_cmd->add_option("--like-noise-sd", synth_config.like_noise_sd,
                          "logit-scale noise on the like rate");
    synth_cmd->add_option("--comment-noise-sd", synth_config.comment_noise_sd,
                          "log-scale noise on the comment rate");
    synth_cmd->add_option("--date-start", synth_start, "earliest upload date");
    synth_cmd->add_option("--date-end", synth_end, "latest upload date");

    // prepare
    auto* prepare_cmd = app.add_subcommand("prepare", "clean a CSV and write the kept rows");
    add_common(prepare_cmd);
    std::string prepare_input;
    std::string prepare_output;
    prepare_cmd->add_option("--input", prepare_input, "input CSV file")->required();
    prepare_cmd->add_option("--output", prepare_output, "cleaned CSV path")->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "fit a model on a labeled CSV");
    add_common(train_cmd);
    DataOpts train_data;
    GbtOpts train_gbt;
    std::string train_model_path;
    std::string train_report_path;
    add_data_options(train_cmd, train_data);
    add_gbt_options(train_cmd, train_gbt);
    train_cmd->add_option("--model", train_model_path, "model JSON output path")->required();
    train_cmd->add_option("--report", train_report_path, "metrics report JSON path");

    // tune
    auto* tune_cmd = app.add_subcommand("tune", "successive-halving hyperparameter search");
    add_common(tune_cmd);
    DataOpts tune_data;
    engage::tuning::ParamSpace tune_space;
    engage::tuning::HalvingConfig tune_halving;
    std::string tune_best_out = "tune_best.json";
    std::string tune_trials_out;
    std::string tune_model_path;
    bool tune_refit = false;
    add_data_options(tune_cmd, tune_data);
    tune_cmd->add_option("--n-candidates", tune_halving.n_candidates, "sampled candidates");
    tune_cmd->add_option("--factor", tune_halving.factor, "halving factor");
    tune_cmd->add_option("--min-resource", tune_halving.min_resource,
                         "boosting iterations at the first rung");
    tune_cmd->add_option("--max-resource", tune_halving.max_resource,
                         "boosting iteration cap");
    tune_cmd->add_option("--cv-folds", tune_halving.cv_folds, "cross-validation folds");
    tune_cmd->add_option("--learning-rate-min", tune_space.learning_rate_min,
                         "learning-rate lower bound");
    tune_cmd->add_option("--learning-rate-max", tune_space.learning_rate_max,
                         "learning-rate upper bound");
    tune_cmd->add_option("--l2-min", tune_space.l2_min, "L2 lower bound");
    tune_cmd->add_option("--l2-max", tune_space.l2_max, "L2 upper bound");
    tune_cmd->add_option("--best-out", tune_best_out, "best-parameters JSON path");
    tune_cmd->add_option("--trials-out", tune_trials_out, "per-trial JSONL log path");
    tune_cmd->add_flag("--refit", tune_refit, "refit on the training split with the winner");
    auto* tune_model_opt =
        tune_cmd->add_option("--model", tune_model_path, "model path for --refit");
    tune_cmd->callback([&]() {
        if (tune_refit && tune_model_path.empty())
            throw CLI::RequiredError("--model (with --refit)");
    });
    (void)tune_model_opt;

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "score a labeled CSV with a saved model");
    add_common(eval_cmd);
    std::string eval_model_path;
    std::string eval_input;
    std::string eval_report_path;
    eval_cmd->add_option("--model", eval_model_path, "model JSON file")->required();
    eval_cmd->add_option("--input", eval_input, "labeled CSV file")->required();
    eval_cmd->add_option("--report", eval_report_path, "metrics report JSON path");

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "predict counts for new rows");
    add_common(predict_cmd);
    std::string predict_model_path;
    std::string predict_input;
    std::string predict_output;
    predict_cmd->add_option("--model", predict_model_path, "model JSON file")->required();
    predict_cmd->add_option("--input", predict_input, "input CSV file")->required();
    predict_cmd->add_option("--output", predict_output, "predictions CSV path")->required();

    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config_args({"synth", "prepare", "train", "tune", "evaluate", "predict"},
                              std::move(args));
    std::reverse(args.begin(), args.end());
    try {
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (synth_cmd->parsed())
            return run_synth(synth_output, synth_config, synth_start, synth_end);
        if (prepare_cmd->parsed()) return run_prepare(prepare_input, prepare_output);
        if (train_cmd->parsed())
            return run_train(train_data, train_gbt, train_model_path, train_report_path);
        if (tune_cmd->parsed())
            return run_tune(tune_data, tune_space, tune_halving, tune_best_out, tune_trials_out,
                            tune_refit, tune_model_path);
        if (eval_cmd->parsed()) return run_evaluate(eval_model_path, eval_input, eval_report_path);
        if (predict_cmd->parsed())
            return run_predict(predict_model_path, predict_input, predict_output);
    } catch (const engage::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
