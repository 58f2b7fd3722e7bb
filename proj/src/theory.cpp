#include "ssesam/theory.hpp"

#include "ssesam/data.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ssesam {

namespace {

constexpr double kRelTol = 1e-8;  // inequality slack for f64 accumulation

bool at_least(double lhs, double rhs) { return lhs >= rhs - kRelTol * std::abs(rhs); }

double max_traj_grad_norm(const QuadraticLandscape& land,
                          const std::vector<const QuadraticTrajectory*>& trajs,
                          const Vector& w0) {
    double bound = land.gradient(w0).norm();
    for (const QuadraticTrajectory* traj : trajs)
        for (size_t k = 1; k < traj->weights.size(); ++k)
            bound = std::max(bound, land.gradient(traj->weights[k]).norm());
    return bound;
}

}  // namespace

double escape_threshold(double mu, double eta, double rho, double L) {
    require(mu >= 1.0, "escape_threshold: mu must be >= 1");
    require(eta > 0.0 && rho > 0.0 && L > 0.0, "escape_threshold: eta, rho, L must be positive");
    const double a = 0.5 * (1.0 + mu) * eta;
    return -(L / (eta * rho)) * (a + std::sqrt(a * a + (2.0 + mu) * eta * rho / L));
}

double imbalance_threshold(double mu, double eta, double rho, double r, double L) {
    require(r > 0.0 && r <= 1.0, "imbalance_threshold: tail fraction must lie in (0, 1]");
    return escape_threshold(mu, eta, rho * r, L);
}

QuadraticTrajectory simulate_quadratic(const QuadraticLandscape& land, const Vector& w0,
                                       OptimKind kind, double eta, double rho, int steps,
                                       double tail_fraction) {
    require(w0.size() == land.dim(), "simulate_quadratic: w0 dimension mismatch");
    require(steps >= 0, "simulate_quadratic: steps must be >= 0");
    require(tail_fraction > 0.0 && tail_fraction <= 1.0,
            "simulate_quadratic: tail fraction must lie in (0, 1]");

    OptimConfig cfg;
    cfg.kind = kind;
    cfg.eta = eta;
    cfg.rho = rho;
    cfg.rho_head = rho;
    cfg.rho_tail = rho;
    cfg.gamma = 1.0;
    cfg.epochs = std::max(steps, 1);
    cfg.batch_size = 1;
    Optimizer optimizer(cfg, land.dim());

    const double r = tail_fraction;
    const SplitGradFn split = [&land, r](const Vector& w) {
        const Evaluation e = eval(land, w);
        SplitEval s;
        s.head_loss = (1.0 - r) * e.loss;
        s.tail_loss = r * e.loss;
        s.head_grad = (1.0 - r) * e.gradient;
        s.tail_grad = r * e.gradient;
        return s;
    };

    QuadraticTrajectory out;
    out.weights.reserve(static_cast<size_t>(steps) + 1);
    out.weights.push_back(w0);
    Vector w = w0;
    for (int k = 0; k < steps; ++k) {
        optimizer.step(w, split, 0);
        out.weights.push_back(w);
    }
    return out;
}

EscapeReport verify_escape(const EscapeInstance& inst) {
    require(inst.steps >= 2, "verify_escape: need at least two steps");
    require(inst.mu >= 1.0, "verify_escape: mu must be >= 1");

    const QuadraticLandscape& land = inst.landscape;
    const QuadraticTrajectory sgd =
        simulate_quadratic(land, inst.w0, OptimKind::sgd, inst.eta, inst.rho, inst.steps);
    const QuadraticTrajectory sam =
        simulate_quadratic(land, inst.w0, OptimKind::sam, inst.eta, inst.rho, inst.steps);

    EscapeReport rep;
    rep.traj_grad_bound = max_traj_grad_norm(land, {&sgd, &sam}, inst.w0);
    const auto [lam, v] = min_eigenpair(land.hessian());
    require(lam < 0.0, "verify_escape: landscape has no negative curvature to escape");
    rep.lambda_min = lam;
    rep.v_min = v;
    rep.threshold = escape_threshold(inst.mu, inst.eta, inst.rho, rep.traj_grad_bound);
    rep.condition_met = lam <= rep.threshold;

    const double p0 = v.dot(land.gradient(inst.w0));
    rep.degenerate = (p0 == 0.0);
    rep.lhs = std::abs(v.dot(sam.weights.back() - inst.w0));
    const double count_term =
        (inst.mu * inst.mu + inst.mu) * inst.steps - 2.0 * inst.mu * inst.mu - inst.mu;
    rep.rhs = inst.mu * std::abs(v.dot(sgd.weights.back() - inst.w0)) +
              count_term * std::abs(p0) / std::abs(lam);
    rep.holds = at_least(rep.lhs, rep.rhs);
    return rep;
}

EscapeInstance make_escape_instance(int dim, double mu, int steps, std::uint64_t seed) {
    require(dim >= 2, "make_escape_instance: dimension must be >= 2");
    require(mu >= 1.0, "make_escape_instance: mu must be >= 1");
    require(steps >= 2, "make_escape_instance: steps must be >= 2");

    Rng rng(seed);
    const double eta = rng.uniform(0.001, 0.004);
    const double rho = rng.uniform(0.03, 0.08);
    const double gn = rng.uniform(0.3, 1.0);  // norm of the non-escape gradient part

    // Size the escape eigenvalue against the threshold at the anticipated
    // gradient bound (~gn), with a 1.35x margin absorbed by the construction.
    double lam0 = std::sqrt(1.35 * (2.0 + mu) * gn / (eta * rho));
    for (int i = 0; i < 40 && lam0 < -escape_threshold(mu, eta, rho, gn * 1.05); ++i)
        lam0 *= 1.1;

    SaddleSpec sspec;
    sspec.positive_eigenvalues.resize(static_cast<size_t>(dim) - 1);
    for (double& p : sspec.positive_eigenvalues) p = rng.uniform(0.05, 0.8);
    sspec.negative_eigenvalues = {-lam0};
    sspec.rotation_seed = derive_seed(seed, 1);
    sspec.gradient_scale = 0.0;
    Matrix H = make_saddle(sspec).hessian();
    const auto [lam, v] = min_eigenpair(H);

    // The SAM perturbation multiplies the escape-direction gradient component
    // by ~boost each step; starting it exponentially small keeps the visited
    // gradient norms near gn, which the threshold sizing above assumed.
    const double boost = 1.0 + eta * lam0 + eta * rho * lam0 * lam0 / gn;
    const double f = 0.05 * gn / std::pow(boost, steps);
    Vector u = rng.normal_vector(dim);
    u -= u.dot(v) * v;
    require(u.norm() > 0.0, "make_escape_instance: degenerate direction draw");
    u *= gn / u.norm();
    const Vector g0 = u + (f * gn) * v;
    const Vector w0 = Vector::Zero(dim);

    for (int attempt = 0; attempt < 50; ++attempt) {
        EscapeInstance inst{QuadraticLandscape(H, g0, w0, 0.0), w0, eta, rho, mu, steps};
        const EscapeReport rep = verify_escape(inst);
        if (rep.condition_met && !rep.degenerate && rep.holds) return inst;
        // Deepen the escape eigenvalue by 15% and retry.
        H += (0.15 * rep.lambda_min) * (rep.v_min * rep.v_min.transpose());
    }
    throw std::logic_error("make_escape_instance: escape condition unreachable");
}

double sgd_projection_error(const QuadraticLandscape& land, const Vector& w0, double eta,
                            int steps) {
    require(w0.size() == land.dim(), "sgd_projection_error: w0 dimension mismatch");
    require(steps >= 0, "sgd_projection_error: steps must be >= 0");
    require(std::isfinite(eta) && eta >= 0.0, "sgd_projection_error: eta must be >= 0");

    const auto [lam, v] = min_eigenpair(land.hessian());
    const double p0 = v.dot(land.gradient(w0));
    Vector w = w0;
    double worst = 0.0;
    for (int k = 1; k <= steps; ++k) {
        w -= eta * land.gradient(w);
        const double simulated = v.dot(land.gradient(w));
        const double closed = std::pow(1.0 - eta * lam, k) * p0;
        worst = std::max(worst,
                         std::abs(simulated - closed) / std::max(std::abs(closed), 1e-300));
    }
    return worst;
}

GrowthReport verify_sam_growth(const QuadraticLandscape& land, const Vector& w0, double eta,
                               double rho, int steps) {
    require(steps >= 1, "verify_sam_growth: need at least one step");

    GrowthReport rep;
    const auto [lam, v] = min_eigenpair(land.hessian());
    rep.lambda_min = lam;
    const double p0 = v.dot(land.gradient(w0));
    rep.degenerate = (p0 == 0.0);
    if (rho <= 0.0) {
        rep.reason = "rho must be positive: the escape threshold diverges as rho -> 0";
        return rep;
    }

    const QuadraticTrajectory sam =
        simulate_quadratic(land, w0, OptimKind::sam, eta, rho, steps);
    rep.traj_grad_bound = max_traj_grad_norm(land, {&sam}, w0);
    if (rep.traj_grad_bound <= 0.0) {
        rep.reason = "gradient vanishes along the trajectory";
        return rep;
    }
    rep.threshold = escape_threshold(1.0, eta, rho, rep.traj_grad_bound);
    if (!(lam <= rep.threshold)) {
        rep.reason = "lambda_min above the mu = 1 escape threshold";
        return rep;
    }

    rep.applicable = true;
    rep.reason = "applicable";
    rep.growth_factor = eta * rho * lam * lam / rep.traj_grad_bound + eta * lam - 1.0;
    rep.lhs = std::abs(v.dot(land.gradient(sam.weights.back())));
    rep.rhs = std::pow(rep.growth_factor, steps) * std::abs(p0);
    rep.holds = at_least(rep.lhs, rep.rhs);
    return rep;
}

double sum_second_moment(int count, const Vector& mean, const Vector& var) {
    require(count >= 1, "sum_second_moment: count must be >= 1");
    require(mean.size() == var.size() && mean.size() >= 1,
            "sum_second_moment: mean/var dimension mismatch");
    require(var.minCoeff() >= 0.0, "sum_second_moment: variances must be >= 0");
    const double c = count;
    return c * c * mean.squaredNorm() + c * var.sum();
}

RatioReport verify_sum_ratio(int m, int n, const Vector& mean_head, const Vector& var_head,
                             const Vector& mean_tail, const Vector& var_tail, int trials,
                             std::uint64_t seed) {
    require(m >= 1 && n >= 1, "verify_sum_ratio: group sizes must be >= 1");
    require(trials >= 1000, "verify_sum_ratio: need at least 1000 trials");
    const double exact_head = sum_second_moment(m, mean_head, var_head);
    const double exact_tail = sum_second_moment(n, mean_tail, var_tail);
    require(exact_tail > 0.0, "verify_sum_ratio: tail second moment must be positive");

    const Vector sd_head = var_head.cwiseSqrt();
    const Vector sd_tail = var_tail.cwiseSqrt();
    Rng rng(seed);
    double acc_head = 0.0;
    double acc_tail = 0.0;
    Vector sum_h(mean_head.size());
    Vector sum_t(mean_tail.size());
    for (int trial = 0; trial < trials; ++trial) {
        sum_h.setZero();
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < mean_head.size(); ++j)
                sum_h[j] += mean_head[j] + sd_head[j] * rng.normal();
        acc_head += sum_h.squaredNorm();
        sum_t.setZero();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < mean_tail.size(); ++j)
                sum_t[j] += mean_tail[j] + sd_tail[j] * rng.normal();
        acc_tail += sum_t.squaredNorm();
    }

    RatioReport rep;
    rep.empirical_ratio = (acc_head / trials) / (acc_tail / trials);
    rep.exact_ratio = exact_head / exact_tail;
    rep.relative_error = std::abs(rep.empirical_ratio - rep.exact_ratio) / rep.exact_ratio;
    return rep;
}

AngleReport perturbation_angles(double norm_ratio, double psi) {
    require(norm_ratio >= 0.0 && norm_ratio < 1.0,
            "perturbation_angles: norm ratio must lie in [0, 1)");
    require(std::isfinite(psi), "perturbation_angles: psi must be finite");

    const double r = norm_ratio;
    const double c = std::cos(psi);
    const double s = std::sqrt(1.0 + 2.0 * r * c + r * r);

    AngleReport rep;
    rep.cos_head = (1.0 + r * c) / s;
    rep.cos_tail = (r + c) / s;
    rep.head_gap = 1.0 - rep.cos_head;
    rep.tail_gap = std::abs(rep.cos_tail - c);
    rep.head_bound = r * r;
    rep.tail_bound = 2.0 * r;
    rep.within_bounds = rep.head_gap <= rep.head_bound && rep.tail_gap <= rep.tail_bound;

    // Cross-check against literal 2-D vectors (tail angle needs r > 0).
    const Eigen::Vector2d eps_head(1.0, 0.0);
    const Eigen::Vector2d eps_tail(r * c, r * std::sin(psi));
    const Eigen::Vector2d combined = eps_head + eps_tail;
    double err = std::abs(combined.dot(eps_head) / combined.norm() - rep.cos_head);
    if (r > 0.0)
        err = std::max(err, std::abs(combined.dot(eps_tail) /
                                         (combined.norm() * eps_tail.norm()) -
                                     rep.cos_tail));
    rep.cross_check_error = err;
    return rep;
}

ImbalanceReport verify_imbalance_escape(const QuadraticLandscape& land, double tail_fraction,
                                        const Vector& w0, double eta, double rho, double mu,
                                        int steps) {
    require(tail_fraction > 0.0 && tail_fraction <= 1.0,
            "verify_imbalance_escape: tail fraction must lie in (0, 1]");
    require(mu >= 1.0, "verify_imbalance_escape: mu must be >= 1");
    require(steps >= 1, "verify_imbalance_escape: need at least one step");

    const QuadraticTrajectory sgd =
        simulate_quadratic(land, w0, OptimKind::sgd, eta, rho, steps);
    const QuadraticTrajectory sam =
        simulate_quadratic(land, w0, OptimKind::sam, eta, rho, steps);
    const QuadraticTrajectory imb =
        simulate_quadratic(land, w0, OptimKind::imbsam, eta, rho, steps, tail_fraction);

    ImbalanceReport rep;
    rep.traj_grad_bound = max_traj_grad_norm(land, {&sgd, &sam, &imb}, w0);
    const auto [lam, v] = min_eigenpair(land.hessian());
    require(lam < 0.0, "verify_imbalance_escape: no negative curvature to escape");
    rep.lambda_min = lam;
    rep.lambda_r = imbalance_threshold(mu, eta, rho, tail_fraction, rep.traj_grad_bound);
    rep.lambda_one = escape_threshold(mu, eta, rho, rep.traj_grad_bound);
    rep.thresholds_ordered =
        tail_fraction < 1.0 ? rep.lambda_r < rep.lambda_one : rep.lambda_r == rep.lambda_one;

    const double p0 = v.dot(land.gradient(w0));
    rep.degenerate = (p0 == 0.0);
    rep.sgd_move = std::abs(v.dot(sgd.weights.back() - w0));
    rep.sam_move = std::abs(v.dot(sam.weights.back() - w0));
    rep.imbsam_move = std::abs(v.dot(imb.weights.back() - w0));
    const double needed = mu * rep.sgd_move;
    rep.sam_escapes = at_least(rep.sam_move, needed);
    rep.imbsam_escapes = at_least(rep.imbsam_move, needed);

    rep.window = rep.lambda_r < lam && lam <= rep.lambda_one;
    rep.part1_applicable = rep.window && !rep.degenerate;
    rep.part1_holds = !rep.part1_applicable || (rep.sam_escapes && !rep.imbsam_escapes);
    rep.part2_applicable = !rep.sam_escapes && !rep.degenerate;
    rep.part2_holds = !rep.part2_applicable || !rep.imbsam_escapes;
    return rep;
}

WindowInstance make_window_instance(int dim, double mu, int steps, std::uint64_t seed) {
    WindowInstance out{make_escape_instance(dim, mu, steps, seed), 0.0, false};
    for (const double r : {0.05, 0.02, 0.01, 0.005, 0.002}) {
        const ImbalanceReport rep = verify_imbalance_escape(
            out.base.landscape, r, out.base.w0, out.base.eta, out.base.rho, mu, steps);
        if (rep.window && rep.sam_escapes && !rep.imbsam_escapes && !rep.degenerate) {
            out.tail_fraction = r;
            out.found = true;
            break;
        }
    }
    return out;
}

EscapeInstance make_shallow_instance(int dim, std::uint64_t seed) {
    require(dim >= 2, "make_shallow_instance: dimension must be >= 2");
    Rng rng(seed);
    SaddleSpec sspec;
    sspec.positive_eigenvalues.resize(static_cast<size_t>(dim) - 1);
    for (double& p : sspec.positive_eigenvalues) p = rng.uniform(0.05, 0.8);
    sspec.negative_eigenvalues = {-5.0};  // far above the thresholds at these scales
    sspec.rotation_seed = derive_seed(seed, 1);
    sspec.gradient_scale = 0.0;
    const Matrix H = make_saddle(sspec).hessian();
    const auto [lam, v] = min_eigenpair(H);

    Vector u = rng.normal_vector(dim);
    u -= u.dot(v) * v;
    require(u.norm() > 0.0, "make_shallow_instance: degenerate direction draw");
    u /= u.norm();
    const Vector g0 = u + 0.3 * v;
    const Vector w0 = Vector::Zero(dim);
    return EscapeInstance{QuadraticLandscape(H, g0, w0, 0.0), w0, 0.002, 0.05, 2.0, 8};
}

double generalization_bound(const BoundInputs& in) {
    require(std::isfinite(in.train_loss) && std::isfinite(in.lambda_max_ball) &&
                std::isfinite(in.weight_norm) && std::isfinite(in.rho) &&
                std::isfinite(in.loss_cap) && std::isfinite(in.delta),
            "generalization_bound: inputs must be finite");
    require(in.sample_count >= 2, "generalization_bound: need n >= 2 (n - 1 denominator)");
    require(in.rho > 0.0, "generalization_bound: rho must be positive");
    require(in.dim >= 1, "generalization_bound: dimension must be >= 1");
    require(in.loss_cap > 0.0, "generalization_bound: loss cap must be positive");
    require(in.delta > 0.0 && in.delta < 1.0, "generalization_bound: delta must lie in (0,1)");
    require(in.weight_norm >= 0.0, "generalization_bound: weight norm must be >= 0");

    const double d = in.dim;
    const double n = in.sample_count;
    const double flatness = in.rho * in.rho * std::sqrt(d / (4.0 * std::numbers::pi)) *
                            in.lambda_max_ball;
    const double estimation = in.loss_cap / std::sqrt(n);
    const double root = std::sqrt(d) + std::sqrt(std::log(n));
    const double inner =
        1.0 + in.weight_norm * in.weight_norm * root * root / (d * in.rho * in.rho);
    const double numerator = 0.25 * d * std::log(inner) + 0.25 + std::log(n / in.delta) +
                             2.0 * std::log(6.0 * n + 3.0 * d);
    return in.train_loss + flatness + estimation + std::sqrt(numerator / (n - 1.0));
}

double estimate_lambda_max_ball(const MlpModel& model, const Batch& batch,
                                const LossSpec& spec, double rho, int n_dirs,
                                std::uint64_t seed, const PowerIterationOptions& opt) {
    require(n_dirs >= 1, "estimate_lambda_max_ball: n_dirs must be >= 1");
    require(std::isfinite(rho) && rho >= 0.0, "estimate_lambda_max_ball: rho must be >= 0");

    const int dim = model.param_count();
    MlpModel probe = model;
    const auto lambda_max_at = [&](const Vector& params) {
        probe.params = params;
        const MatVec apply = [&](const Vector& v) { return hvp(probe, batch, spec, v); };
        const EigenPair top = max_eigenpair(apply, dim, opt);
        if (!top.converged)
            throw std::runtime_error("estimate_lambda_max_ball: power iteration did not converge");
        return top.value;
    };

    double best = lambda_max_at(model.params);
    Rng rng(seed);
    for (int i = 0; i < n_dirs; ++i) {
        Vector dir = rng.normal_vector(dim);
        const double norm = dir.norm();
        require(norm > 0.0, "estimate_lambda_max_ball: degenerate direction draw");
        dir *= rho / norm;
        best = std::max(best, lambda_max_at(model.params + dir));
    }
    return best;
}

BoundTrial empirical_bound_trial(std::uint64_t seed) {
    DatasetSpec dspec;
    dspec.num_classes = 4;
    dspec.max_per_class = 50;
    dspec.imbalance = 1.0;
    dspec.feature_dim = 8;
    dspec.seed = derive_seed(seed, 0);
    const LongTailDataset train = generate(dspec);
    const LongTailDataset test = generate_balanced_test(dspec, 5000);  // 20k Monte Carlo draws

    const LossSpec ce = LossSpec::cross_entropy();
    MlpModel m = make_mlp({dspec.feature_dim, 16, dspec.num_classes}, derive_seed(seed, 1));
    const Batch full = full_batch(train);
    for (int step = 0; step < 150; ++step)
        m.params -= 0.2 * loss_and_grad(m, full, ce).grad;

    // tanh keeps the last hidden layer in [-1, 1], so |logit_j| is at most
    // ||W_j||_1 + |b_j| and the per-sample loss at most log K + 2 max_j(...).
    const LayerSlice last = layer_slice(m, static_cast<int>(m.layer_dims.size()) - 2);
    double logit_cap = 0.0;
    for (int j = 0; j < last.weight.rows(); ++j)
        logit_cap = std::max(logit_cap,
                             last.weight.row(j).cwiseAbs().sum() + std::abs(last.bias[j]));

    BoundInputs in;
    in.train_loss = loss_and_grad(m, full, ce).loss;
    in.rho = 0.05;
    in.dim = m.param_count();
    PowerIterationOptions popt;
    popt.max_iters = 6000;
    popt.tol = 1e-6;
    popt.seed = derive_seed(seed, 4);
    in.lambda_max_ball = estimate_lambda_max_ball(m, full, ce, in.rho, 4,
                                                  derive_seed(seed, 3), popt);
    in.loss_cap = std::log(static_cast<double>(dspec.num_classes)) + 2.0 * logit_cap;
    in.sample_count = train.size();
    in.weight_norm = m.params.norm();
    in.delta = 0.1;

    BoundTrial out;
    out.inputs = in;
    out.bound_value = generalization_bound(in);
    const Matrix logits = forward(m, test.features);
    double acc = 0.0;
    for (int i = 0; i < test.size(); ++i)
        acc += per_sample_loss(logits.row(i).transpose(), test.labels[i], ce);
    out.population_loss = acc / test.size();
    out.holds = out.population_loss <= out.bound_value;
    return out;
}

}  // namespace ssesam
