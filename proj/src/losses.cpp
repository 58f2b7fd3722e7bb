#include "ssesam/losses.hpp"

#include <cmath>

namespace ssesam {

namespace {

void check_label(const Vector& logits, int label) {
    require(logits.size() >= 2, "loss: need at least two logits");
    require(label >= 0 && label < logits.size(), "loss: label out of range");
}

// Adjusted logits z, sample weight, and the diagonal dz/dx (empty = identity).
struct Adjusted {
    Vector z;
    double weight;
    Vector gamma;
};

Adjusted adjust(const Vector& x, int label, const LossSpec& s) {
    const auto K = x.size();
    switch (s.kind) {
        case LossKind::ce:
            return {x, 1.0, {}};
        case LossKind::ldam: {
            require(s.margins.size() == K, "loss: LDAM margins length mismatch");
            Vector z = x;
            z[label] -= s.margins[label];
            return {std::move(z), 1.0, {}};
        }
        case LossKind::la: {
            require(s.priors.size() == K, "loss: LA priors length mismatch");
            Vector z = x + s.tau * s.priors.array().log().matrix();
            return {std::move(z), 1.0, {}};
        }
        case LossKind::vs: {
            require(s.multipliers.size() == K && s.additives.size() == K && s.weights.size() == K,
                    "loss: VS parameter length mismatch");
            Vector z = (s.multipliers.array() * x.array() + s.additives.array()).matrix();
            return {std::move(z), s.weights[label], s.multipliers};
        }
    }
    throw std::logic_error("loss: unknown kind");
}

// Max-subtracted softmax pieces: returns (log-sum-exp, probabilities).
std::pair<double, Vector> softmax_lse(const Vector& z) {
    const double m = z.maxCoeff();
    const Vector e = (z.array() - m).exp();
    const double s = e.sum();
    return {m + std::log(s), e / s};
}

}  // namespace

LossSpec LossSpec::cross_entropy() { return {}; }

LossSpec LossSpec::ldam(const IntVector& class_counts, double C) {
    require(C > 0.0, "LossSpec::ldam: margin scale C must be > 0");
    LossSpec s;
    s.kind = LossKind::ldam;
    s.margin_scale = C;
    s.margins.resize(class_counts.size());
    for (int k = 0; k < class_counts.size(); ++k) {
        require(class_counts[k] > 0, "LossSpec::ldam: class count must be positive");
        s.margins[k] = C / std::pow(static_cast<double>(class_counts[k]), 0.25);
    }
    return s;
}

LossSpec LossSpec::logit_adjusted(const Vector& priors, double tau) {
    LossSpec s;
    s.kind = LossKind::la;
    s.priors = priors;
    s.tau = tau;
    validate(s, static_cast<int>(priors.size()));
    return s;
}

LossSpec LossSpec::vector_scaling(Vector multipliers, Vector additives, Vector weights) {
    LossSpec s;
    s.kind = LossKind::vs;
    s.multipliers = std::move(multipliers);
    s.additives = std::move(additives);
    s.weights = std::move(weights);
    validate(s, static_cast<int>(s.multipliers.size()));
    return s;
}

void validate(const LossSpec& spec, int num_classes) {
    require(num_classes >= 2, "validate(LossSpec): need at least two classes");
    switch (spec.kind) {
        case LossKind::ce:
            return;
        case LossKind::ldam:
            require(spec.margins.size() == num_classes, "LossSpec: LDAM margins length mismatch");
            require(spec.margin_scale > 0.0, "LossSpec: LDAM C must be > 0");
            require((spec.margins.array() >= 0.0).all(), "LossSpec: LDAM margins must be >= 0");
            return;
        case LossKind::la:
            require(spec.priors.size() == num_classes, "LossSpec: LA priors length mismatch");
            require(spec.tau >= 0.0, "LossSpec: LA tau must be >= 0");
            require((spec.priors.array() > 0.0).all(), "LossSpec: LA priors must be positive");
            require(std::abs(spec.priors.sum() - 1.0) <= 1e-9,
                    "LossSpec: LA priors must sum to 1 within 1e-9");
            return;
        case LossKind::vs:
            require(spec.multipliers.size() == num_classes && spec.additives.size() == num_classes &&
                        spec.weights.size() == num_classes,
                    "LossSpec: VS parameter length mismatch");
            require((spec.multipliers.array() > 0.0).all(), "LossSpec: VS multipliers must be > 0");
            require((spec.weights.array() > 0.0).all(), "LossSpec: VS weights must be > 0");
            return;
    }
    throw std::logic_error("validate(LossSpec): unknown kind");
}

double per_sample_loss(const Vector& logits, int label, const LossSpec& spec) {
    check_label(logits, label);
    const Adjusted a = adjust(logits, label, spec);
    const auto [lse, p] = softmax_lse(a.z);
    (void)p;
    return a.weight * (lse - a.z[label]);
}

LogitGrad logit_gradient(const Vector& logits, int label, const LossSpec& spec) {
    check_label(logits, label);
    const Adjusted a = adjust(logits, label, spec);
    const auto [lse, p] = softmax_lse(a.z);
    Vector g = p;
    g[label] -= 1.0;
    g *= a.weight;
    if (a.gamma.size() > 0) g = (g.array() * a.gamma.array()).matrix();
    return {a.weight * (lse - a.z[label]), std::move(g)};
}

LogitJvp logit_jvp(const Vector& logits, const Vector& dlogits, int label, const LossSpec& spec) {
    check_label(logits, label);
    require(dlogits.size() == logits.size(), "logit_jvp: tangent length mismatch");
    const Adjusted a = adjust(logits, label, spec);
    const auto [lse, p] = softmax_lse(a.z);

    const Vector dz = a.gamma.size() > 0 ? (a.gamma.array() * dlogits.array()).matrix() : dlogits;
    const double mean_dz = p.dot(dz);

    LogitJvp out;
    out.loss = a.weight * (lse - a.z[label]);
    out.dloss = a.weight * (mean_dz - dz[label]);

    Vector g = p;
    g[label] -= 1.0;
    g *= a.weight;
    Vector dg = (p.array() * (dz.array() - mean_dz)).matrix() * a.weight;
    if (a.gamma.size() > 0) {
        g = (g.array() * a.gamma.array()).matrix();
        dg = (dg.array() * a.gamma.array()).matrix();
    }
    out.grad = std::move(g);
    out.dgrad = std::move(dg);
    return out;
}

}  // namespace ssesam
