#ifndef ENGAGE_SYNTH_HPP
#define ENGAGE_SYNTH_HPP

#include <array>
#include <cstdint>

#include "engage/dates.hpp"
#include "engage/tabular.hpp"

namespace engage::synth {

// Generative process (all draws from one seeded stream, in this order per
// row): 10 emotions ~ U[0,1); views = round(exp(N(10, 2))) clamped to >= 10;
// upload date uniform over the day range; like-rate from a logistic link on
// the emotions with N(0, like_noise_sd) logit noise; comment-rate from a
// log-linear term with N(0, comment_noise_sd) noise on the log scale.
//
// The noise asymmetry is the point: likes stay an almost deterministic
// function of the features while comments carry heavy multiplicative noise,
// so a downstream fit separates cleanly on achievable accuracy.
struct SynthConfig {
    std::size_t n_rows = 600;
    std::uint64_t seed = 0;
    double like_noise_sd = 0.05;
    double comment_noise_sd = 0.9;
    Date date_start{2018, 1, 1};
    Date date_end{2023, 12, 31};

    void validate() const;
};

// Fixed generator coefficients over the 10 emotion scores, in schema order
// (Valence, Arousal, Tension, Atmospheric, Happy, Dark, Sad, Angry, Sensual,
// Sentimental).
inline constexpr double kLikeLogitIntercept = -3.4;
inline constexpr std::array<double, 10> kLikeLogitCoef = {1.2, 0.8,  -0.6, 0.3, 0.9,
                                                          -0.7, -0.4, -0.5, 0.6, 0.4};
inline constexpr double kCommentLogIntercept = -6.0;
inline constexpr std::array<double, 10> kCommentLogCoef = {0.3, 0.5,  0.2,  -0.2, 0.1,
                                                           0.2, 0.4,  0.6,  -0.3, 0.2};

RawTable generate(const SynthConfig& config);

}  // namespace engage::synth

#endif
