#pragma once

#include <span>
#include <string_view>

namespace batchrisk {

// The five supported losses. Domains per kind:
//   Mse               predictions and labels in [0, 1]
//   ZeroOne           predictions and labels in {-1, +1} (batch means in [-1, 1])
//   GeomCrossEntropy  predictions in (0, 1) after clamping, labels in {0, 1}
//   Kl, Bce           predictions in (0, 1) after clamping, labels in {0, 1}
enum class LossKind { kMse, kZeroOne, kGeomCrossEntropy, kKl, kBce };

inline constexpr LossKind kAllLossKinds[] = {
    LossKind::kMse, LossKind::kZeroOne, LossKind::kGeomCrossEntropy, LossKind::kKl,
    LossKind::kBce};

// Predictions of the log losses are clamped into [kLogClamp, 1 - kLogClamp]
// before any logarithm; saturated model outputs would otherwise produce inf.
inline constexpr double kLogClamp = 1e-12;

// The convex-combination identity r_k = (1-a)r_1 + a*r_n holds exactly for
// these three kinds.
constexpr bool closed_form_eligible(LossKind kind) {
    return kind == LossKind::kMse || kind == LossKind::kZeroOne ||
           kind == LossKind::kGeomCrossEntropy;
}

// Jointly convex in (prediction, label); implies k-risk monotone in k.
constexpr bool doubly_convex(LossKind kind) {
    return kind == LossKind::kMse || kind == LossKind::kKl;
}

std::string_view to_string(LossKind kind);
LossKind loss_kind_from_string(std::string_view name);

struct LossConstants {
    double lipschitz;    // lambda
    double range_width;  // |a - b| of the label interval
    double c;            // lambda * |a - b|
    double beta;         // hypothesis-class peel-off factor
};

// Constants of the bounded losses; the log losses have an unbounded gradient
// near 0 and are rejected.
LossConstants loss_constants(LossKind kind);

double pointwise_loss(LossKind kind, double yhat, double y);

// Loss of a batch. Mse/ZeroOne/Kl/Bce compare the arithmetic means of
// predictions and labels; GeomCrossEntropy aggregates predictions through the
// mean of logs (geometric mean), which is what makes its closed form exact.
double batch_loss(LossKind kind, std::span<const double> predictions,
                  std::span<const double> labels);

struct KlBceEntropy {
    double kl;
    double bce;
    double h;  // binary entropy of the label
};

// Decomposition kl(y, yhat) = bce(yhat, y) - h(y).
KlBceEntropy kl_bce_entropy(double yhat, double y);

// Sufficient statistics of a batch; lets enumeration code evaluate batch
// losses of weighted multisets without materializing the batch.
struct BatchStats {
    double mean_prediction;
    double mean_label;
    double mean_log_prediction;       // mean of log(clamped prediction)
    double mean_log_one_minus_pred;   // mean of log(1 - clamped prediction)
};

double loss_from_stats(LossKind kind, const BatchStats& stats);

namespace detail {
// Validates one element of a batch against the kind's per-element domain.
// `where` names the offending position in error messages.
void check_element(LossKind kind, double prediction, double label, std::string_view where);
double clamp_log_domain(double prediction);
} // namespace detail

} // namespace batchrisk
