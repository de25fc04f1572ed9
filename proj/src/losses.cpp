#include "batchrisk/losses.hpp"

#include <cmath>
#include <string>

#include "batchrisk/accumulate.hpp"
#include "batchrisk/errors.hpp"

namespace batchrisk {

namespace {

void require_finite(double value, std::string_view what) {
    if (!std::isfinite(value))
        throw DomainError(std::string(what) + " is not finite");
}

void require_in_unit_interval(double value, std::string_view what) {
    require_finite(value, what);
    if (value < 0.0 || value > 1.0)
        throw DomainError(std::string(what) + "=" + std::to_string(value) +
                          " outside [0, 1]");
}

void require_sign_mean(double value, std::string_view what) {
    require_finite(value, what);
    if (value < -1.0 || value > 1.0)
        throw DomainError(std::string(what) + "=" + std::to_string(value) +
                          " outside [-1, 1]");
}

void require_sign_value(double value, std::string_view what) {
    require_finite(value, what);
    if (value != -1.0 && value != 1.0)
        throw DomainError(std::string(what) + "=" + std::to_string(value) +
                          " not in {-1, +1}");
}

void require_binary_label(double value, std::string_view what) {
    require_finite(value, what);
    if (value != 0.0 && value != 1.0)
        throw DomainError(std::string(what) + "=" + std::to_string(value) +
                          " not in {0, 1}");
}

// x*log(x) with the 0*log(0) = 0 convention.
double xlogx(double x) { return x == 0.0 ? 0.0 : x * std::log(x); }

// y*log(y/x) with the same convention for y = 0.
double xlogx_over(double y, double x) { return y == 0.0 ? 0.0 : y * std::log(y / x); }

} // namespace

std::string_view to_string(LossKind kind) {
    switch (kind) {
        case LossKind::kMse: return "mse";
        case LossKind::kZeroOne: return "zero_one";
        case LossKind::kGeomCrossEntropy: return "gce";
        case LossKind::kKl: return "kl";
        case LossKind::kBce: return "bce";
    }
    throw ArgumentError("unknown LossKind");
}

LossKind loss_kind_from_string(std::string_view name) {
    for (LossKind kind : kAllLossKinds)
        if (name == to_string(kind)) return kind;
    throw ArgumentError("unknown loss kind '" + std::string(name) +
                        "' (expected mse|zero_one|gce|kl|bce)");
}

LossConstants loss_constants(LossKind kind) {
    switch (kind) {
        case LossKind::kZeroOne: return {0.5, 2.0, 1.0, 0.5};
        case LossKind::kMse: return {2.0, 1.0, 2.0, 2.0};
        default:
            throw UnsupportedLossError("loss_constants: " + std::string(to_string(kind)) +
                                       " has an unbounded Lipschitz constant");
    }
}

double detail::clamp_log_domain(double prediction) {
    if (prediction < kLogClamp) return kLogClamp;
    if (prediction > 1.0 - kLogClamp) return 1.0 - kLogClamp;
    return prediction;
}

void detail::check_element(LossKind kind, double prediction, double label,
                           std::string_view where) {
    const std::string prefix = where.empty() ? std::string{} : std::string(where) + ": ";
    switch (kind) {
        case LossKind::kMse:
            require_in_unit_interval(prediction, prefix + "prediction");
            require_in_unit_interval(label, prefix + "label");
            return;
        case LossKind::kZeroOne:
            require_sign_value(prediction, prefix + "prediction");
            require_sign_value(label, prefix + "label");
            return;
        case LossKind::kGeomCrossEntropy:
        case LossKind::kKl:
        case LossKind::kBce:
            require_in_unit_interval(prediction, prefix + "prediction");
            require_binary_label(label, prefix + "label");
            return;
    }
}

double pointwise_loss(LossKind kind, double yhat, double y) {
    switch (kind) {
        case LossKind::kMse:
            require_in_unit_interval(yhat, "prediction");
            require_in_unit_interval(y, "label");
            return (yhat - y) * (yhat - y);
        case LossKind::kZeroOne:
            // Accepts means of {-1,+1} values so it can score batch averages.
            require_sign_mean(yhat, "prediction");
            require_sign_mean(y, "label");
            return 0.5 * (1.0 - yhat * y);
        case LossKind::kKl: {
            require_in_unit_interval(yhat, "prediction");
            require_in_unit_interval(y, "label");
            const double p = detail::clamp_log_domain(yhat);
            return xlogx_over(y, p) + xlogx_over(1.0 - y, 1.0 - p);
        }
        case LossKind::kGeomCrossEntropy:
        case LossKind::kBce: {
            require_in_unit_interval(yhat, "prediction");
            require_in_unit_interval(y, "label");
            const double p = detail::clamp_log_domain(yhat);
            return -y * std::log(p) - (1.0 - y) * std::log(1.0 - p);
        }
    }
    throw ArgumentError("unknown LossKind");
}

double batch_loss(LossKind kind, std::span<const double> predictions,
                  std::span<const double> labels) {
    if (predictions.size() != labels.size())
        throw ArgumentError("batch_loss: " + std::to_string(predictions.size()) +
                            " predictions vs " + std::to_string(labels.size()) + " labels");
    if (predictions.empty()) throw ArgumentError("batch_loss: empty batch");

    const double count = static_cast<double>(predictions.size());
    StableSum pred_sum;
    StableSum label_sum;
    StableSum log_sum;
    StableSum log1m_sum;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        detail::check_element(kind, predictions[i], labels[i],
                              "batch element " + std::to_string(i));
        pred_sum.add(predictions[i]);
        label_sum.add(labels[i]);
        if (kind == LossKind::kGeomCrossEntropy) {
            const double p = detail::clamp_log_domain(predictions[i]);
            log_sum.add(std::log(p));
            log1m_sum.add(std::log(1.0 - p));
        }
    }
    const BatchStats stats{pred_sum.get() / count, label_sum.get() / count,
                           log_sum.get() / count, log1m_sum.get() / count};
    return loss_from_stats(kind, stats);
}

double loss_from_stats(LossKind kind, const BatchStats& stats) {
    if (kind == LossKind::kGeomCrossEntropy) {
        return -stats.mean_label * stats.mean_log_prediction -
               (1.0 - stats.mean_label) * stats.mean_log_one_minus_pred;
    }
    return pointwise_loss(kind, stats.mean_prediction, stats.mean_label);
}

KlBceEntropy kl_bce_entropy(double yhat, double y) {
    require_in_unit_interval(yhat, "prediction");
    require_in_unit_interval(y, "label");
    const double p = detail::clamp_log_domain(yhat);
    KlBceEntropy out{};
    out.bce = -y * std::log(p) - (1.0 - y) * std::log(1.0 - p);
    out.h = -xlogx(y) - xlogx(1.0 - y);
    out.kl = xlogx_over(y, p) + xlogx_over(1.0 - y, 1.0 - p);
    return out;
}

} // namespace batchrisk
