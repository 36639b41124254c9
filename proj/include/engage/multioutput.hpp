#ifndef ENGAGE_MULTIOUTPUT_HPP
#define ENGAGE_MULTIOUTPUT_HPP

#include <string>
#include <vector>

#include "engage/features.hpp"
#include "engage/gbt.hpp"
#include "engage/matrix.hpp"

namespace engage {

inline constexpr int kModelFormatVersion = 1;

// Two independently fitted boosters (one per target) bundled with the
// preprocessing state and schema. This is the persistable unit.
struct EngagementModel {
    gbt::GbtModel model_cr;  // target log_cr
    gbt::GbtModel model_lr;  // target log_lr
    PipelineState pipeline;
    std::vector<std::string> feature_order;
    gbt::GbtParams params_cr;
    gbt::GbtParams params_lr;
    int format_version = kModelFormatVersion;
};

// Fits one booster per Y column with the same params. Fit errors are
// re-raised labeled with the failing target.
EngagementModel fit_multi(const Matrix& X, const Matrix& Y, const gbt::GbtParams& params,
                          const PipelineState& pipeline,
                          const std::vector<std::string>& feature_order);

// n x 2 matrix [pred_log_cr, pred_log_lr].
Matrix predict_multi(const EngagementModel& model, const Matrix& X);

// JSON persistence. Writes are atomic (temp file + rename); loads of a
// round-tripped file give bit-identical predictions.
void save_model(const EngagementModel& model, const std::string& path);
EngagementModel load_model(const std::string& path);

}  // namespace engage

#endif
