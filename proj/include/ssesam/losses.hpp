#pragma once

#include "ssesam/common.hpp"

namespace ssesam {

// Per-class-parameterized classification losses. Every kind is a weighted
// cross entropy over affinely adjusted logits z = gamma .* x + shift:
//   CE    z = x
//   LDAM  z_y = x_y - Delta_y (margin on the true class only), Delta_j = C/count_j^{1/4}
//   LA    z_j = x_j + tau * log(prior_j)
//   VS    z_j = gamma_j * x_j + Delta_j, loss scaled by w_y
// so gradients/Hessians w.r.t. the logits share one softmax code path.
enum class LossKind { ce, ldam, la, vs };

struct LossSpec {
    LossKind kind = LossKind::ce;
    Vector margins;      // LDAM: Delta_j >= 0
    double margin_scale = 1.0;  // LDAM: C
    Vector priors;       // LA: probability vector
    double tau = 1.0;    // LA
    Vector multipliers;  // VS: gamma_j > 0
    Vector additives;    // VS: Delta_j
    Vector weights;      // VS: w_j > 0

    static LossSpec cross_entropy();
    static LossSpec ldam(const IntVector& class_counts, double C);
    static LossSpec logit_adjusted(const Vector& priors, double tau);
    static LossSpec vector_scaling(Vector multipliers, Vector additives, Vector weights);
};

// Throws unless the spec is self-consistent for K classes (priors sum to 1
// within 1e-9, positive weights/multipliers, margin formula respected, ...).
void validate(const LossSpec& spec, int num_classes);

double per_sample_loss(const Vector& logits, int label, const LossSpec& spec);

struct LogitGrad {
    double loss;
    Vector grad;  // d loss / d logits
};
LogitGrad logit_gradient(const Vector& logits, int label, const LossSpec& spec);

// Loss, gradient, and their exact directional derivatives along dlogits.
// The dgrad output is the logit-space Hessian applied to dlogits; the model's
// forward-over-reverse HVP is built on it.
struct LogitJvp {
    double loss;
    Vector grad;
    double dloss;
    Vector dgrad;
};
LogitJvp logit_jvp(const Vector& logits, const Vector& dlogits, int label, const LossSpec& spec);

}  // namespace ssesam
