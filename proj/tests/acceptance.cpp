// Acceptance gate: one pass/fail line per criterion, exit code = number of
// failed criteria. Tolerances are pinned here, next to each check.

#include "ssesam/common.hpp"
#include "ssesam/config.hpp"
#include "ssesam/data.hpp"
#include "ssesam/harness.hpp"
#include "ssesam/landscape.hpp"
#include "ssesam/losses.hpp"
#include "ssesam/model.hpp"
#include "ssesam/optim.hpp"
#include "ssesam/runner.hpp"
#include "ssesam/spectral.hpp"
#include "ssesam/theory.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace ssesam;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
    std::printf("%s %s%s%s%s\n", ok ? "PASS" : "FAIL", name, detail.empty() ? "" : " (",
                detail.c_str(), detail.empty() ? "" : ")");
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in.good()) return std::string("<missing:") + p.string() + ">";
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// ---- 1: saddle-escape amplification campaign -------------------------------

void criterion_escape_campaign() {
    const auto t0 = std::chrono::steady_clock::now();
    const CampaignResult r = campaign_thm1(100, 0, default_jobs());
    const double secs = seconds_since(t0);
    const bool ok = r.passed && r.checked == 100 && secs < 60.0;
    char detail[128];
    std::snprintf(detail, sizeof(detail), "%d/%d instances hold, %.2f s", r.checked - r.failures,
                  r.checked, secs);
    report("saddle-escape-amplification-campaign", ok, detail);
}

// ---- 2 + 3: projection closed form and growth lower bound ------------------

void criteria_projection_and_growth() {
    const CampaignResult r = campaign_lemmas(30, 0);

    int lemma1_failures = 0, lemma2_failures = 0, lemma2_applicable = 0;
    for (const auto& rep : r.reports) {
        if (rep.at("lemma") == 1) {
            lemma1_failures += rep.at("ok").get<bool>() ? 0 : 1;
        } else {
            lemma2_failures += rep.at("ok").get<bool>() ? 0 : 1;
            lemma2_applicable += rep.at("applicable").get<bool>() ? 1 : 0;
        }
    }
    const double max_err = r.summary.at("lemma1_max_error").get<double>();

    {
        const bool ok = lemma1_failures == 0 && max_err < 1e-9;
        char detail[128];
        std::snprintf(detail, sizeof(detail), "50 instances, max rel err %.3g", max_err);
        report("sgd-projection-closed-form", ok, detail);
    }
    {
        const bool ok = lemma2_failures == 0 && lemma2_applicable >= 30;
        char detail[128];
        std::snprintf(detail, sizeof(detail), "%d/30 applicable, %d failures", lemma2_applicable,
                      lemma2_failures);
        report("sam-growth-lower-bound", ok, detail);
    }
}

// ---- 4: group gradient-norm moment ratio -----------------------------------

void criterion_moment_ratio() {
    const CampaignResult r = campaign_prop1(10000, 0);
    char detail[128];
    std::snprintf(detail, sizeof(detail), "%d combos + doubling, %d failures", r.checked,
                  r.failures);
    report("group-moment-ratio-and-scaling", r.passed, detail);
}

// ---- 5: perturbation angle bounds ------------------------------------------

void criterion_angle_bounds() {
    const CampaignResult r = campaign_prop2();
    char detail[128];
    std::snprintf(detail, sizeof(detail), "%d grid points, %d violations", r.checked, r.failures);
    report("perturbation-angle-bounds", r.passed && r.checked == 360, detail);
}

// ---- 6: tail-fraction threshold monotonicity and escape windows ------------

void criterion_threshold_windows() {
    const CampaignResult r = campaign_prop3(10, 0, default_jobs());
    char detail[160];
    std::snprintf(detail, sizeof(detail), "part1 %d/10, part2 %d/10 applicable, %d failures",
                  r.summary.at("part1_applicable").get<int>(),
                  r.summary.at("part2_applicable").get<int>(), r.failures);
    report("tail-threshold-monotonicity-and-windows", r.passed, detail);
}

// ---- 7: optimizer reduction lattice ----------------------------------------

struct LatticeFixture {
    LongTailDataset data;
    ClassPartition part;
    LossSpec loss = LossSpec::cross_entropy();
};

TrajectoryRecord lattice_train(const LatticeFixture& fx, const OptimConfig& cfg,
                               std::uint64_t seed) {
    MlpModel m = make_mlp({4, 6, 4}, seed);
    return run(m, fx.data, fx.part, fx.loss, cfg, seed);
}

bool same_trajectory(const TrajectoryRecord& a, const TrajectoryRecord& b) {
    if (a.steps.size() != b.steps.size()) return false;
    for (size_t i = 0; i < a.steps.size(); ++i) {
        if (a.steps[i].loss != b.steps[i].loss) return false;
        if (a.steps[i].grad_norm != b.steps[i].grad_norm) return false;
    }
    if (a.final_params.size() != b.final_params.size()) return false;
    return (a.final_params - b.final_params).cwiseAbs().maxCoeff() == 0.0;
}

void criterion_reduction_lattice() {
    int checked = 0, failed = 0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        DatasetSpec dspec;
        dspec.num_classes = 4;
        dspec.max_per_class = 12;
        dspec.imbalance = 4.0;
        dspec.feature_dim = 4;
        dspec.seed = seed;
        LatticeFixture fx;
        fx.data = generate(dspec);
        fx.part = partition(fx.data.class_counts, 4);

        OptimConfig base;
        base.eta = 0.05;
        base.epochs = 6;
        base.batch_size = 8;

        const auto run_kind = [&](OptimKind kind, auto mutate) {
            OptimConfig cfg = base;
            cfg.kind = kind;
            mutate(cfg);
            return lattice_train(fx, cfg, seed);
        };

        const TrajectoryRecord sgd = run_kind(OptimKind::sgd, [](OptimConfig&) {});

        // sam at rho = 0 is sgd.
        ++checked;
        if (!same_trajectory(run_kind(OptimKind::sam, [](OptimConfig& c) { c.rho = 0.0; }), sgd))
            ++failed;

        // sse_sam with both radii zero is sgd.
        ++checked;
        if (!same_trajectory(run_kind(OptimKind::sse_sam,
                                      [](OptimConfig& c) {
                                          c.rho_head = 0.0;
                                          c.rho_tail = 0.0;
                                      }),
                             sgd))
            ++failed;

        // gamma = 1 keeps sse_sam in stage 1 forever: equal to sam_ext.
        ++checked;
        if (!same_trajectory(
                run_kind(OptimKind::sse_sam, [](OptimConfig& c) { c.gamma = 1.0; }),
                run_kind(OptimKind::sam_ext, [](OptimConfig&) {})))
            ++failed;

        // gamma = 0 disables the head radius from epoch 0.
        ++checked;
        if (!same_trajectory(
                run_kind(OptimKind::sse_sam, [](OptimConfig& c) { c.gamma = 0.0; }),
                run_kind(OptimKind::sam_ext, [](OptimConfig& c) { c.rho_head = 0.0; })))
            ++failed;

        // All-head partition + equal radii: stage-1 sse_sam is sam.
        LatticeFixture all_head = fx;
        all_head.part = partition(fx.data.class_counts, 0);
        const auto run_all_head = [&](OptimKind kind, auto mutate) {
            OptimConfig cfg = base;
            cfg.kind = kind;
            mutate(cfg);
            MlpModel m = make_mlp({4, 6, 4}, seed);
            return run(m, all_head.data, all_head.part, all_head.loss, cfg, seed);
        };
        ++checked;
        if (!same_trajectory(run_all_head(OptimKind::sse_sam,
                                          [&](OptimConfig& c) {
                                              c.rho_head = base.rho;
                                              c.gamma = 1.0;
                                          }),
                             run_all_head(OptimKind::sam, [](OptimConfig&) {})))
            ++failed;
    }
    char detail[96];
    std::snprintf(detail, sizeof(detail), "%d identities x 3 seeds, %d failures", checked / 3,
                  failed);
    report("optimizer-reduction-lattice", failed == 0 && checked == 15, detail);
}

// ---- 8: analytic derivative oracles ----------------------------------------

void criterion_derivative_oracles() {
    DatasetSpec dspec;
    dspec.num_classes = 3;
    dspec.max_per_class = 10;
    dspec.imbalance = 4.0;
    dspec.feature_dim = 4;
    dspec.seed = 31;
    const LongTailDataset data = generate(dspec);
    const Batch batch = full_batch(data);
    const LossSpec loss = LossSpec::cross_entropy();
    const MlpModel m = make_mlp({4, 6, 3}, 32);
    const int d = m.param_count();

    const auto grad_at = [&](const Vector& w) {
        MlpModel probe = m;
        probe.params = w;
        return loss_and_grad(probe, batch, loss);
    };

    bool ok = true;
    std::string why;

    // Gradient vs central differences, relative < 1e-5.
    const LossGrad lg = grad_at(m.params);
    for (int i = 0; i < d && ok; ++i) {
        Vector wp = m.params, wm = m.params;
        wp[i] += 1e-6;
        wm[i] -= 1e-6;
        const double fd = (grad_at(wp).loss - grad_at(wm).loss) / 2e-6;
        if (std::abs(fd - lg.grad[i]) > 1e-5 * std::max(1.0, std::abs(lg.grad[i]))) {
            ok = false;
            why = "gradient fd mismatch";
        }
    }

    // HVP vs finite differences of gradients, max abs diff < 1e-5.
    Rng rng(33);
    for (int rep = 0; rep < 3 && ok; ++rep) {
        const Vector v = rng.normal_vector(d);
        const Vector exact = hvp(m, batch, loss, v);
        const double h = 1e-4 * m.params.norm() / v.norm();
        const Vector fd =
            (grad_at(m.params + h * v).grad - grad_at(m.params - h * v).grad) / (2.0 * h);
        if ((exact - fd).cwiseAbs().maxCoeff() >= 1e-5) {
            ok = false;
            why = "hvp fd mismatch";
        }
    }

    // Symmetry u'Hv = v'Hu within 1e-8 relative.
    for (int rep = 0; rep < 3 && ok; ++rep) {
        const Vector u = rng.normal_vector(d);
        const Vector v = rng.normal_vector(d);
        const double uhv = u.dot(hvp(m, batch, loss, v));
        const double vhu = v.dot(hvp(m, batch, loss, u));
        if (std::abs(uhv - vhu) > 1e-8 * std::max({1e-12, std::abs(uhv), std::abs(vhu)})) {
            ok = false;
            why = "hvp symmetry";
        }
    }

    // Dense Hessian from hvp columns vs dense fd Hessian, entrywise 1e-4.
    if (ok && d <= 200) {
        Matrix dense(d, d);
        for (int j = 0; j < d; ++j) dense.col(j) = hvp(m, batch, loss, Vector::Unit(d, j));
        const double h = 1e-4 * m.params.norm();
        for (int j = 0; j < d && ok; ++j) {
            const Vector fd = (grad_at(m.params + h * Vector::Unit(d, j)).grad -
                               grad_at(m.params - h * Vector::Unit(d, j)).grad) /
                              (2.0 * h);
            if ((dense.col(j) - fd).cwiseAbs().maxCoeff() >= 1e-4) {
                ok = false;
                why = "dense hessian";
            }
        }
    }

    report("analytic-derivative-oracles", ok,
           ok ? std::string("gradient, hvp, symmetry, dense hessian") : why);
}

// ---- 9: spectral estimation oracle -----------------------------------------

void criterion_spectral_oracle() {
    bool ok = true;
    std::string why;
    Rng rng(41);

    for (int rep = 0; rep < 20 && ok; ++rep) {
        const int d = 10 + rng.uniform_int(191);
        Matrix a(d, d);
        for (int j = 0; j < d; ++j)
            for (int i = 0; i < d; ++i) a(i, j) = rng.normal();
        const Matrix h = 0.5 * (a + a.transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> es(h);
        PowerIterationOptions opt;
        opt.max_iters = 20000;
        opt.tol = 1e-8;
        opt.seed = 700 + static_cast<std::uint64_t>(rep);
        const SpectrumSummary sum = spectrum_summary(h, opt);
        const double lmax = es.eigenvalues()(d - 1), lmin = es.eigenvalues()(0);
        if (!sum.converged || std::abs(sum.max_pair.value - lmax) > 0.01 * std::abs(lmax) ||
            std::abs(sum.min_pair.value - lmin) > 0.01 * std::abs(lmin)) {
            ok = false;
            why = "random matrix eigenvalue";
        }
        const double gap = es.eigenvalues()(1) - lmin;
        if (ok && gap >= 1e-3 &&
            std::abs(sum.min_pair.vector.dot(es.eigenvectors().col(0))) <= 0.99) {
            ok = false;
            why = "eigenvector overlap";
        }
    }

    const LossSpec loss = LossSpec::cross_entropy();
    for (int rep = 0; rep < 5 && ok; ++rep) {
        DatasetSpec dspec;
        dspec.num_classes = 3;
        dspec.max_per_class = 8;
        dspec.imbalance = 4.0;
        dspec.feature_dim = 3;
        dspec.seed = 800 + static_cast<std::uint64_t>(rep);
        const LongTailDataset data = generate(dspec);
        const Batch batch = full_batch(data);
        const MlpModel m = make_mlp({3, 4, 3}, 900 + static_cast<std::uint64_t>(rep));
        const int d = m.param_count();
        Matrix dense(d, d);
        for (int j = 0; j < d; ++j) dense.col(j) = hvp(m, batch, loss, Vector::Unit(d, j));
        Eigen::SelfAdjointEigenSolver<Matrix> es(dense);
        PowerIterationOptions opt;
        opt.max_iters = 50000;
        opt.tol = 1e-9;
        opt.seed = 1000 + static_cast<std::uint64_t>(rep);
        const MatVec apply = [&](const Vector& v) { return hvp(m, batch, loss, v); };
        const SpectrumSummary sum = spectrum_summary(apply, d, opt);
        const double lmax = es.eigenvalues()(d - 1), lmin = es.eigenvalues()(0);
        const double scale = std::max(std::abs(lmax), std::abs(lmin));
        if (!sum.converged || std::abs(sum.max_pair.value - lmax) > 0.01 * scale ||
            std::abs(sum.min_pair.value - lmin) > 0.01 * scale) {
            ok = false;
            why = "mlp hessian eigenvalue";
        }
    }

    if (ok) {
        Matrix a(40, 40);
        for (int j = 0; j < 40; ++j)
            for (int i = 0; i < 40; ++i) a(i, j) = rng.normal();
        const Matrix h = 0.5 * (a + a.transpose());
        PowerIterationOptions opt;
        opt.max_iters = 20000;
        opt.tol = 1e-10;
        opt.seed = 5;
        const SpectrumSummary s1 = spectrum_summary(h, opt);
        const SpectrumSummary s2 = spectrum_summary((4.25 * h).eval(), opt);
        if (!s1.lambda_ratio || !s2.lambda_ratio ||
            std::abs(*s1.lambda_ratio - *s2.lambda_ratio) > 1e-8 * std::abs(*s1.lambda_ratio)) {
            ok = false;
            why = "ratio scale invariance";
        }
    }

    report("spectral-estimation-oracle", ok,
           ok ? std::string("20 dense + 5 mlp spectra, scale-invariant ratio") : why);
}

// ---- 10: shape operator limits ---------------------------------------------

void criterion_shape_operator() {
    bool ok = true;
    std::string why;
    Rng rng(51);

    // Exact equality with the Hessian at critical points.
    for (int rep = 0; rep < 10 && ok; ++rep) {
        const int d = 2 + rng.uniform_int(6);
        Matrix a(d, d);
        for (int j = 0; j < d; ++j)
            for (int i = 0; i < d; ++i) a(i, j) = rng.normal();
        const Matrix h = 0.5 * (a + a.transpose());
        if ((weingarten(Vector::Zero(d), h) - h).cwiseAbs().maxCoeff() != 0.0) {
            ok = false;
            why = "zero-gradient equality";
        }
    }

    // 1-D reduction to plane-curve curvature within 1e-10 (incl. f' = f'' = 1).
    if (ok) {
        Matrix h11(1, 1);
        Vector g1(1);
        g1[0] = 1.0;
        h11(0, 0) = 1.0;
        const double kappa = weingarten(g1, h11)(0, 0);
        if (std::abs(kappa - 0.35355339059327376) > 1e-10) {  // 2^(-3/2)
            ok = false;
            why = "curvature frozen case";
        }
        for (int rep = 0; rep < 20 && ok; ++rep) {
            g1[0] = rng.uniform(-3.0, 3.0);
            h11(0, 0) = rng.uniform(-5.0, 5.0);
            const double expect = h11(0, 0) / std::pow(1.0 + g1[0] * g1[0], 1.5);
            if (std::abs(weingarten(g1, h11)(0, 0) - expect) > 1e-10) {
                ok = false;
                why = "curvature random case";
            }
        }
    }

    // Small-gradient limit: ||W - H||_F <= 3 ||g|| (1 + ||H||_F).
    for (int rep = 0; rep < 50 && ok; ++rep) {
        const int d = 2 + rng.uniform_int(8);
        Matrix a(d, d);
        for (int j = 0; j < d; ++j)
            for (int i = 0; i < d; ++i) a(i, j) = rng.normal();
        const Matrix h = 0.5 * (a + a.transpose());
        Vector g = rng.normal_vector(d);
        g *= rng.uniform(0.0, 0.1) / std::max(g.norm(), 1e-300);
        const double lhs = (weingarten(g, h) - h).norm();
        if (lhs > 3.0 * g.norm() * (1.0 + h.norm())) {
            ok = false;
            why = "spectral limit bound";
        }
    }

    report("shape-operator-limits", ok,
           ok ? std::string("critical-point equality, 1-d curvature, small-gradient bound")
              : why);
}

// ---- 11: generalization bound oracle and empirical trials ------------------

void criterion_generalization_bound() {
    struct Tuple {
        double train_loss, rho;
        int dim;
        double lambda_max_ball, cap;
        int n;
        double w_norm, delta, expected;
    };
    const std::vector<Tuple> tuples = {
        {1.918, 0.0173, 36050, 122.446, 7.837, 107475, 27.068, 0.4472, 5.0169308266149898},
        {0.261, 0.1324, 3907, 46.848, 12.4, 631264, 1.061, 0.1074, 14.839032904034143},
        {1.95, 0.168, 28895, 224.605, 14.631, 911529, 0.26, 0.4049, 306.0447970682164},
        {2.094, 0.1087, 20381, 107.657, 38.411, 107177, 3.71, 0.0574, 54.021195173828086},
        {2.542, 0.1851, 5697, 364.866, 27.275, 967098, 15.141, 0.2805, 268.85771308202827},
        {2.488, 0.1894, 47402, 288.676, 35.524, 48052, 26.451, 0.3888, 640.22364598404046},
        {2.956, 0.258, 13240, 190.063, 23.217, 874630, 14.593, 0.1914, 413.81042512832992},
        {0.629, 0.0874, 89595, 324.018, 30.847, 179453, 21.366, 0.13, 210.86645838396196},
        {1.387, 0.0883, 83888, 344.081, 11.761, 340037, 33.714, 0.3902, 221.45766902637217},
        {0.687, 0.0193, 41349, 200.582, 4.243, 957494, 37.716, 0.4394, 5.3822009086409105},
        {0.944, 0.2001, 51858, 442.342, 32.5, 149813, 10.595, 0.1308, 1139.6307396293047},
        {1.684, 0.0862, 76624, 214.217, 29.593, 379582, 8.773, 0.4988, 126.70893215656114},
        {1.529, 0.0364, 6177, 430.551, 8.489, 167755, 31.683, 0.2169, 14.551909646936335},
        {0.191, 0.1207, 61350, 264.557, 48.583, 902594, 37.697, 0.3433, 269.98446815985768},
        {0.344, 0.2666, 98421, 133.413, 32.407, 116972, 11.74, 0.0875, 840.88702329584629},
        {0.01, 0.2194, 94331, 131.695, 25.529, 187332, 20.307, 0.0621, 550.38150122003029},
        {1.876, 0.2541, 66542, 304.485, 8.489, 799552, 6.462, 0.4772, 1432.8533877133135},
        {2.767, 0.2764, 78506, 162.078, 1.954, 974232, 14.519, 0.4928, 981.86257545849267},
        {0.5, 0.05, 10, 0.0, 5.0, 100, 2.0, 0.1, 1.6441970104519113},
        {0.5, 0.05, 10, 3.0, 5.0, 100, 0.0, 0.1, 1.4567094876794625},
    };

    bool ok = true;
    std::string why;
    for (const Tuple& t : tuples) {
        BoundInputs in;
        in.train_loss = t.train_loss;
        in.rho = t.rho;
        in.dim = t.dim;
        in.lambda_max_ball = t.lambda_max_ball;
        in.loss_cap = t.cap;
        in.sample_count = t.n;
        in.weight_norm = t.w_norm;
        in.delta = t.delta;
        if (std::abs(generalization_bound(in) - t.expected) > 1e-12 * std::abs(t.expected)) {
            ok = false;
            why = "oracle tuple mismatch";
        }
    }

    if (ok) {
        BoundInputs in;
        in.train_loss = 0.8;
        in.rho = 0.05;
        in.dim = 512;
        in.lambda_max_ball = 12.0;
        in.loss_cap = 6.0;
        in.sample_count = 4000;
        in.weight_norm = 9.0;
        in.delta = 0.05;
        const double base = generalization_bound(in);
        BoundInputs up = in;
        up.lambda_max_ball = 20.0;
        const double a = generalization_bound(up);
        up = in;
        up.loss_cap = 9.0;
        const double b = generalization_bound(up);
        up = in;
        up.train_loss = 1.4;
        const double c = generalization_bound(up);
        if (!(a > base && b > base && c > base)) {
            ok = false;
            why = "monotonicity";
        }
    }

    int holds = 0;
    if (ok) {
        const CampaignResult r = campaign_bound(100, 0, default_jobs());
        holds = r.summary.at("holds").get<int>();
        if (!r.passed) {
            ok = false;
            why = "empirical trials below 99%";
        }
    }

    char detail[128];
    if (ok)
        std::snprintf(detail, sizeof(detail), "20 oracle tuples, monotone, %d/100 trials hold",
                      holds);
    report("generalization-bound-oracle-and-trials", ok, ok ? detail : why.c_str());
}

// ---- 12: end-to-end determinism and the comparison report ------------------

void criterion_determinism_and_report() {
    const fs::path root_a = fs::temp_directory_path() / "ssesam_accept_cmp_a";
    const fs::path root_b = fs::temp_directory_path() / "ssesam_accept_cmp_b";
    fs::remove_all(root_a);
    fs::remove_all(root_b);

    RunConfig cfg;  // defaults = the toy protocol
    cfg.master_seed = 1;
    cfg.output_dir = root_a.string();

    bool ok = true;
    std::string why;
    double secs = 0.0;

    try {
        const auto t0 = std::chrono::steady_clock::now();
        const CompareResult first = run_compare(cfg);
        secs = seconds_since(t0);
        if (secs >= 600.0) {
            ok = false;
            why = "compare exceeded 10 minutes";
        }

        if (ok && first.rows.size() != 5) {
            ok = false;
            why = "expected five optimizers";
        }
        if (ok) {
            for (const auto& [kind, res] : first.rows) {
                const SplitMetrics& m = res.final_acc;
                const bool populated = m.many.has_value() && m.medium.has_value() &&
                                       m.few.has_value() && std::isfinite(*m.many) &&
                                       std::isfinite(*m.medium) && std::isfinite(*m.few) &&
                                       std::isfinite(m.overall);
                if (!populated) {
                    ok = false;
                    why = "empty or non-finite bucket for " + to_string(kind);
                    break;
                }
                if (first.table.find(to_string(kind)) == std::string::npos) {
                    ok = false;
                    why = "table missing row for " + to_string(kind);
                    break;
                }
            }
        }

        if (ok) {
            RunConfig again = cfg;
            again.output_dir = root_b.string();
            run_compare(again);
            for (const OptimKind kind :
                 {OptimKind::sgd, OptimKind::sam, OptimKind::imbsam, OptimKind::sam_ext,
                  OptimKind::sse_sam}) {
                const std::string rel = to_string(kind) + "/metrics.csv";
                if (read_bytes(root_a / rel) != read_bytes(root_b / rel)) {
                    ok = false;
                    why = "rerun metrics differ for " + to_string(kind);
                    break;
                }
                const std::string traj = to_string(kind) + "/trajectory.csv";
                if (read_bytes(root_a / traj) != read_bytes(root_b / traj)) {
                    ok = false;
                    why = "rerun trajectory differs for " + to_string(kind);
                    break;
                }
            }
        }
    } catch (const std::exception& e) {
        ok = false;
        why = e.what();
    }

    fs::remove_all(root_a);
    fs::remove_all(root_b);

    char detail[128];
    if (ok)
        std::snprintf(detail, sizeof(detail),
                      "5 optimizers, byte-identical rerun, %.1f s per compare", secs);
    report("determinism-and-compare-report", ok, ok ? detail : why.c_str());
}

}  // namespace

int main() {
    criterion_escape_campaign();
    criteria_projection_and_growth();
    criterion_moment_ratio();
    criterion_angle_bounds();
    criterion_threshold_windows();
    criterion_reduction_lattice();
    criterion_derivative_oracles();
    criterion_spectral_oracle();
    criterion_shape_operator();
    criterion_generalization_bound();
    criterion_determinism_and_report();
    std::printf("%d criteria failed\n", g_failures);
    return g_failures;
}
