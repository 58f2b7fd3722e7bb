#include "ssesam/optim.hpp"

#include <algorithm>
#include <cmath>

namespace ssesam {

std::string to_string(OptimKind kind) {
    switch (kind) {
        case OptimKind::sgd: return "sgd";
        case OptimKind::sam: return "sam";
        case OptimKind::imbsam: return "imbsam";
        case OptimKind::sam_ext: return "sam_ext";
        case OptimKind::sse_sam: return "sse_sam";
    }
    throw std::invalid_argument("optim: unknown kind");
}

OptimKind optim_kind_from_string(const std::string& s) {
    if (s == "sgd") return OptimKind::sgd;
    if (s == "sam") return OptimKind::sam;
    if (s == "imbsam") return OptimKind::imbsam;
    if (s == "sam_ext") return OptimKind::sam_ext;
    if (s == "sse_sam") return OptimKind::sse_sam;
    throw std::invalid_argument("optim: unknown kind '" + s + "'");
}

TailNorm default_tail_norm(OptimKind kind) {
    return kind == OptimKind::imbsam ? TailNorm::tail : TailNorm::full;
}

void validate(const OptimConfig& cfg) {
    require(std::isfinite(cfg.eta) && cfg.eta > 0.0, "optim: eta must be positive");
    require(std::isfinite(cfg.rho) && cfg.rho >= 0.0, "optim: rho must be >= 0");
    require(std::isfinite(cfg.rho_head) && cfg.rho_head >= 0.0, "optim: rho_head must be >= 0");
    require(std::isfinite(cfg.rho_tail) && cfg.rho_tail >= 0.0, "optim: rho_tail must be >= 0");
    require(std::isfinite(cfg.gamma) && cfg.gamma >= 0.0 && cfg.gamma <= 1.0,
            "optim: gamma must lie in [0, 1]");
    require(cfg.epochs >= 0, "optim: epochs must be >= 0");
    require(cfg.batch_size >= 1, "optim: batch_size must be >= 1");
    require(std::isfinite(cfg.grad_norm_floor) && cfg.grad_norm_floor > 0.0,
            "optim: grad_norm_floor must be positive");
    require(std::isfinite(cfg.momentum) && cfg.momentum >= 0.0 && cfg.momentum < 1.0,
            "optim: momentum must lie in [0, 1)");
}

int stage2_start(double gamma, int epochs) {
    // Nudge so gamma values like 0.7 * 200 -> 140 do not round up to 141.
    const int first = static_cast<int>(std::ceil(gamma * epochs - 1e-9));
    return std::clamp(first, 0, epochs);
}

Vector scaled_perturbation(const Vector& g, double rho, double norm, double floor) {
    Vector out = rho * g;
    out /= std::max(norm, floor);
    return out;
}

Vector sam_perturbation(const Vector& g, double rho, double floor) {
    return scaled_perturbation(g, rho, g.norm(), floor);
}

Optimizer::Optimizer(OptimConfig cfg, int dim)
    : cfg_(cfg),
      tail_norm_(default_tail_norm(cfg.kind)),
      stage2_start_(stage2_start(cfg.gamma, cfg.epochs)) {
    validate(cfg_);
    require(dim >= 1, "optim: parameter dimension must be >= 1");
    if (cfg_.momentum != 0.0) momentum_buf_ = Vector::Zero(dim);
}

int Optimizer::stage(int epoch) const {
    if (cfg_.kind != OptimKind::sse_sam) return 1;
    return epoch >= stage2_start_ ? 2 : 1;
}

StepResult Optimizer::step(Vector& w, const SplitGradFn& f, int epoch) {
    const SplitEval at_w = f(w);
    const Vector g = at_w.head_grad + at_w.tail_grad;
    StepResult res;
    res.loss = at_w.head_loss + at_w.tail_loss;
    res.grad_norm = g.norm();

    Vector d;
    switch (cfg_.kind) {
        case OptimKind::sgd: {
            d = g;
            break;
        }
        case OptimKind::sam: {
            const Vector eps =
                scaled_perturbation(g, cfg_.rho, res.grad_norm, cfg_.grad_norm_floor);
            const SplitEval at_p = f(w + eps);
            d = at_p.head_grad + at_p.tail_grad;
            break;
        }
        case OptimKind::imbsam: {
            const double tn =
                tail_norm_ == TailNorm::tail ? at_w.tail_grad.norm() : res.grad_norm;
            const Vector eps =
                scaled_perturbation(at_w.tail_grad, cfg_.rho, tn, cfg_.grad_norm_floor);
            const SplitEval at_p = f(w + eps);
            d = at_w.head_grad + at_p.tail_grad;
            break;
        }
        case OptimKind::sam_ext:
        case OptimKind::sse_sam: {
            const double rho_head =
                (cfg_.kind == OptimKind::sse_sam && epoch >= stage2_start_) ? 0.0
                                                                            : cfg_.rho_head;
            const double tn =
                tail_norm_ == TailNorm::full ? res.grad_norm : at_w.tail_grad.norm();
            const Vector eps_head = scaled_perturbation(at_w.head_grad, rho_head,
                                                        res.grad_norm, cfg_.grad_norm_floor);
            const Vector eps_tail = scaled_perturbation(at_w.tail_grad, cfg_.rho_tail, tn,
                                                        cfg_.grad_norm_floor);
            const SplitEval at_h = f(w + eps_head);
            const SplitEval at_t = f(w + eps_tail);
            d = at_h.head_grad + at_t.tail_grad;
            break;
        }
    }

    if (cfg_.momentum != 0.0) {
        momentum_buf_ = cfg_.momentum * momentum_buf_ + d;
        w -= cfg_.eta * momentum_buf_;
    } else {
        w -= cfg_.eta * d;
    }
    return res;
}

}  // namespace ssesam
