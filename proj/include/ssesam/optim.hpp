#pragma once

#include "ssesam/common.hpp"

#include <functional>
#include <string>

namespace ssesam {

// Update rules, all driven through one head/tail-decomposed gradient oracle:
//   sgd      w -= eta * (g_head(w) + g_tail(w))
//   sam      eps = rho * g/||g||, full gradient at w + eps
//   imbsam   head gradient at w, tail gradient at w + eps_tail with
//            eps_tail normalized by the tail gradient's own norm
//   sam_ext  separate head/tail perturbations, both normalized by the full
//            gradient norm at w (two-radius variant, no schedule)
//   sse_sam  sam_ext whose head radius switches off after a fraction gamma of
//            the epoch budget (stage 1 -> stage 2)
enum class OptimKind { sgd, sam, imbsam, sam_ext, sse_sam };

// Which norm scales the tail perturbation.
enum class TailNorm { tail, full };

std::string to_string(OptimKind kind);
OptimKind optim_kind_from_string(const std::string& s);
TailNorm default_tail_norm(OptimKind kind);

struct OptimConfig {
    OptimKind kind = OptimKind::sgd;
    double eta = 0.05;
    double rho = 0.05;       // sam / imbsam radius
    double rho_head = 0.05;  // sam_ext / sse_sam radii
    double rho_tail = 0.10;
    double gamma = 0.7;  // stage-switch fraction of the epoch budget
    int epochs = 200;
    int batch_size = 64;
    std::uint64_t seed = 0;
    double grad_norm_floor = 1e-12;
    double momentum = 0.0;
};

void validate(const OptimConfig& cfg);

// First epoch index belonging to stage 2 (== epochs when gamma = 1, so stage 2
// never runs; == 0 when gamma = 0). Guarded against fp noise in gamma*epochs.
int stage2_start(double gamma, int epochs);

// rho * g / max(norm, floor); sam_perturbation uses ||g|| itself.
Vector scaled_perturbation(const Vector& g, double rho, double norm, double floor);
Vector sam_perturbation(const Vector& g, double rho, double floor);

// Head/tail losses and gradients at an arbitrary parameter vector. Both
// gradients use the same normalizer, so head + tail is the full gradient.
struct SplitEval {
    double head_loss = 0.0;
    double tail_loss = 0.0;
    Vector head_grad;
    Vector tail_grad;
};
using SplitGradFn = std::function<SplitEval(const Vector&)>;

struct StepResult {
    double loss = 0.0;       // full loss at the unperturbed iterate
    double grad_norm = 0.0;  // full gradient norm at the unperturbed iterate
};

// One optimizer; owns only the momentum buffer. step() mutates w in place.
class Optimizer {
  public:
    Optimizer(OptimConfig cfg, int dim);

    StepResult step(Vector& w, const SplitGradFn& f, int epoch);

    // 1 before the switch epoch, 2 from it on; non-scheduled kinds are always 1.
    int stage(int epoch) const;

    const OptimConfig& config() const { return cfg_; }

  private:
    OptimConfig cfg_;
    TailNorm tail_norm_;
    int stage2_start_;
    Vector momentum_buf_;
};

}  // namespace ssesam
