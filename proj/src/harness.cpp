#include "ssesam/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

namespace ssesam {

namespace {

using nlohmann::json;

json opt_json(const std::optional<double>& v) {
    if (v) return json(*v);
    return json(nullptr);
}

std::string pct_cell(const std::optional<double>& v) {
    if (!v) return "-";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", *v * 100.0);
    return buf;
}

std::string cell_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "cell_%03d", index);
    return buf;
}

json config_echo(const RunConfig& cfg) {
    json echo = json::parse(serialize(cfg));
    echo["version"] = "0.1.0";
    return echo;
}

json acc_json(const SplitMetrics& acc) {
    json j;
    j["overall"] = acc.overall;
    j["many"] = opt_json(acc.many);
    j["medium"] = opt_json(acc.medium);
    j["few"] = opt_json(acc.few);
    return j;
}

}  // namespace

int default_jobs() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
    require(count >= 0, "parallel_for: negative count");
    if (jobs <= 0) jobs = default_jobs();
    const int workers = std::min(jobs, count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
            } catch (...) {
                errors[static_cast<size_t>(t)] = std::current_exception();
            }
        });
    }
    for (std::thread& th : pool) th.join();
    for (const std::exception_ptr& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

TrainResult run_train(const RunConfig& cfg) {
    require(cfg.metrics.eval_stride >= 1, "metrics: eval_stride must be >= 1");
    require(cfg.metrics.few_max <= cfg.metrics.many_min, "metrics: few_max must be <= many_min");
    require(cfg.test_per_class >= 1, "test_per_class must be >= 1");

    DatasetSpec dspec = cfg.dataset;
    dspec.seed = effective_dataset_seed(cfg);
    const LongTailDataset train = generate(dspec);
    const LongTailDataset test = generate_balanced_test(dspec, cfg.test_per_class);
    const ClassPartition part = partition(train.class_counts, cfg.eta_thres);
    const LossSpec loss = resolve_loss(cfg.loss, train.class_counts);

    std::vector<int> dims;
    dims.push_back(cfg.dataset.feature_dim);
    for (int h : cfg.hidden_dims) dims.push_back(h);
    dims.push_back(cfg.dataset.num_classes);
    MlpModel model = make_mlp(dims, effective_model_seed(cfg));

    OptimConfig oc = cfg.optim;
    oc.seed = effective_shuffle_seed(cfg);

    struct EvalPoint {
        int epoch;
        SplitMetrics acc;
    };
    std::vector<EvalPoint> evals;
    const EpochCallback on_epoch = [&](int epoch, const MlpModel& m) {
        if ((epoch + 1) % cfg.metrics.eval_stride == 0 || epoch + 1 == oc.epochs) {
            const AccuracyReport acc = evaluate_accuracy(m, test);
            evals.push_back({epoch, split_accuracy(acc.per_class, train.class_counts,
                                                   cfg.metrics.many_min, cfg.metrics.few_max)});
        }
    };

    const TrajectoryRecord rec = run(model, train, part, loss, oc, oc.seed, 0, on_epoch);

    // Per-epoch mean step loss and (constant within an epoch) stage flag.
    std::vector<double> loss_sum(static_cast<size_t>(oc.epochs), 0.0);
    std::vector<int> step_count(static_cast<size_t>(oc.epochs), 0);
    std::vector<int> stage(static_cast<size_t>(oc.epochs), 1);
    for (const StepRecord& s : rec.steps) {
        loss_sum[static_cast<size_t>(s.epoch)] += s.loss;
        step_count[static_cast<size_t>(s.epoch)] += 1;
        stage[static_cast<size_t>(s.epoch)] = s.stage;
    }
    std::vector<MetricsRow> rows;
    rows.reserve(evals.size());
    for (const EvalPoint& e : evals) {
        MetricsRow row;
        row.epoch = e.epoch;
        row.train_loss = loss_sum[static_cast<size_t>(e.epoch)] /
                         std::max(1, step_count[static_cast<size_t>(e.epoch)]);
        row.acc = e.acc;
        row.stage = stage[static_cast<size_t>(e.epoch)];
        rows.push_back(std::move(row));
    }

    const AccuracyReport final_acc_report = evaluate_accuracy(model, test);
    const SplitMetrics final_acc = split_accuracy(final_acc_report.per_class, train.class_counts,
                                                  cfg.metrics.many_min, cfg.metrics.few_max);
    const LossGrad final_full = loss_and_grad(model, full_batch(train), loss);

    ArtifactWriter writer(cfg.output_dir);
    writer.write_json("config.json", config_echo(cfg));
    writer.write_text("metrics.csv", metrics_csv(rows));
    writer.write_text("trajectory.csv", trajectory_csv(rec.steps));
    save_checkpoint(model, writer.path("checkpoint"));
    writer.record_file("checkpoint.json");
    writer.record_file("checkpoint.csv");

    if (cfg.spectral.enabled) {
        PowerIterationOptions popt;
        popt.max_iters = cfg.spectral.max_iters;
        popt.tol = cfg.spectral.tol;
        popt.seed = effective_spectral_seed(cfg);
        json reports = json::array();
        reports.push_back(to_json(spectral_report(model, train, loss, std::nullopt, popt), popt));
        for (int c : cfg.spectral.classes) {
            reports.push_back(
                to_json(spectral_report(model, train, loss, std::vector<int>{c}, popt), popt));
        }
        writer.write_json("spectra.json", json{{"reports", reports}});
    }

    json report;
    report["optimizer"] = to_string(oc.kind);
    report["epochs"] = oc.epochs;
    report["train_size"] = train.size();
    report["head_classes"] = part.num_head();
    report["final"] = acc_json(final_acc);
    report["final"]["train_loss"] = final_full.loss;
    report["seeds"] = {{"master", cfg.master_seed},
                       {"dataset", effective_dataset_seed(cfg)},
                       {"model", effective_model_seed(cfg)},
                       {"shuffle", effective_shuffle_seed(cfg)},
                       {"spectral", effective_spectral_seed(cfg)}};
    writer.write_json("report.json", report);
    writer.finalize();

    TrainResult out;
    out.final_acc = final_acc;
    out.final_train_loss = final_full.loss;
    out.run_dir = cfg.output_dir;
    return out;
}

CompareResult run_compare(const RunConfig& cfg) {
    const OptimKind kinds[5] = {OptimKind::sgd, OptimKind::sam, OptimKind::imbsam,
                                OptimKind::sam_ext, OptimKind::sse_sam};
    CompareResult res;
    for (OptimKind kind : kinds) {
        RunConfig sub = cfg;
        sub.optim.kind = kind;
        sub.output_dir = cfg.output_dir + "/" + to_string(kind);
        res.rows.emplace_back(kind, run_train(sub));
    }

    std::ostringstream table;
    char line[160];
    std::snprintf(line, sizeof(line), "%-10s %7s %7s %7s %8s\n", "optimizer", "many", "medium",
                  "few", "overall");
    table << line;
    for (const auto& [kind, tr] : res.rows) {
        std::snprintf(line, sizeof(line), "%-10s %7s %7s %7s %8s\n", to_string(kind).c_str(),
                      pct_cell(tr.final_acc.many).c_str(), pct_cell(tr.final_acc.medium).c_str(),
                      pct_cell(tr.final_acc.few).c_str(),
                      pct_cell(std::optional<double>(tr.final_acc.overall)).c_str());
        table << line;
    }
    res.table = table.str();

    ArtifactWriter writer(cfg.output_dir);
    writer.write_json("config.json", config_echo(cfg));
    json rows = json::array();
    for (const auto& [kind, tr] : res.rows) {
        json r = acc_json(tr.final_acc);
        r["optimizer"] = to_string(kind);
        r["train_loss"] = tr.final_train_loss;
        r["dir"] = tr.run_dir;
        rows.push_back(std::move(r));
    }
    writer.write_json("report.json", json{{"rows", rows}});
    writer.write_text("report.txt", res.table);
    writer.finalize();
    return res;
}

std::vector<SweepCell> run_sweep(const RunConfig& cfg, int jobs) {
    const std::vector<double> heads =
        cfg.sweep.rho_head.empty() ? std::vector<double>{cfg.optim.rho_head} : cfg.sweep.rho_head;
    const std::vector<double> tails =
        cfg.sweep.rho_tail.empty() ? std::vector<double>{cfg.optim.rho_tail} : cfg.sweep.rho_tail;
    const std::vector<double> gammas =
        cfg.sweep.gamma.empty() ? std::vector<double>{cfg.optim.gamma} : cfg.sweep.gamma;

    std::vector<SweepCell> cells;
    for (double rh : heads) {
        for (double rt : tails) {
            for (double g : gammas) {
                SweepCell c;
                c.index = static_cast<int>(cells.size());
                c.rho_head = rh;
                c.rho_tail = rt;
                c.gamma = g;
                cells.push_back(std::move(c));
            }
        }
    }
    require(!cells.empty(), "sweep: empty grid");

    parallel_for(static_cast<int>(cells.size()), jobs, [&](int i) {
        SweepCell& c = cells[static_cast<size_t>(i)];
        RunConfig sub = cfg;
        sub.optim.rho_head = c.rho_head;
        sub.optim.rho_tail = c.rho_tail;
        sub.optim.gamma = c.gamma;
        sub.sweep = SweepGrid{};
        sub.output_dir = cfg.output_dir + "/" + cell_name(c.index);
        c.result = run_train(sub);
    });

    ArtifactWriter writer(cfg.output_dir);
    writer.write_json("config.json", config_echo(cfg));
    json rows = json::array();
    for (const SweepCell& c : cells) {
        json r = acc_json(c.result.final_acc);
        r["index"] = c.index;
        r["rho_head"] = c.rho_head;
        r["rho_tail"] = c.rho_tail;
        r["gamma"] = c.gamma;
        r["train_loss"] = c.result.final_train_loss;
        r["dir"] = c.result.run_dir;
        rows.push_back(std::move(r));
    }
    writer.write_json("report.json", json{{"rows", rows}});
    writer.finalize();
    return cells;
}

CampaignResult campaign_thm1(int instances, std::uint64_t seed, int jobs) {
    require(instances >= 1, "thm1 campaign: instances must be >= 1");
    const double mus[4] = {1.0, 1.5, 2.0, 3.0};
    struct Slot {
        json j;
        bool ok = false;
    };
    std::vector<Slot> slots(static_cast<size_t>(instances));
    parallel_for(instances, jobs, [&](int i) {
        const double mu = mus[i % 4];
        const int steps = 2 + (i % 5);
        const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i));
        const EscapeInstance inst = make_escape_instance(20, mu, steps, s);
        const EscapeReport rep = verify_escape(inst);
        const bool ok = rep.condition_met && !rep.degenerate && rep.holds;
        json j = to_json(rep);
        j["instance"] =
            json{{"dim", 20}, {"mu", mu}, {"steps", steps}, {"seed", s}, {"eta", inst.eta}, {"rho", inst.rho}};
        j["ok"] = ok;
        slots[static_cast<size_t>(i)] = {std::move(j), ok};
    });
    CampaignResult out;
    for (Slot& s : slots) {
        out.reports.push_back(std::move(s.j));
        out.checked += 1;
        out.failures += s.ok ? 0 : 1;
    }
    out.summary = {{"instances", instances}, {"failures", out.failures}};
    out.passed = out.failures == 0;
    return out;
}

CampaignResult campaign_lemmas(int instances, std::uint64_t seed) {
    require(instances >= 1, "lemmas campaign: instances must be >= 1");
    CampaignResult out;

    double max_err = 0.0;
    for (int i = 0; i < 50; ++i) {
        Rng rng(derive_seed(seed, 1000 + static_cast<std::uint64_t>(i)));
        const int d = 6 + rng.uniform_int(10);
        SaddleSpec sp;
        for (int k = 0; k + 1 < d; ++k) sp.positive_eigenvalues.push_back(rng.uniform(0.1, 2.0));
        sp.negative_eigenvalues.push_back(-rng.uniform(0.2, 2.0));
        sp.rotation_seed = rng.next_u64();
        sp.gradient_scale = rng.uniform(0.5, 2.0);
        const QuadraticLandscape land = make_saddle(sp);
        const Vector w0 = 0.5 * rng.normal_vector(d);
        const double eta = rng.uniform(0.01, 0.08);
        const int t = 1 + (i % 20);
        const double err = sgd_projection_error(land, w0, eta, t);
        max_err = std::max(max_err, err);
        const bool ok = err < 1e-9;
        out.checked += 1;
        out.failures += ok ? 0 : 1;
        out.reports.push_back(
            json{{"lemma", 1}, {"dim", d}, {"eta", eta}, {"steps", t}, {"error", err}, {"ok", ok}});
    }

    int applicable = 0;
    for (int i = 0; i < instances; ++i) {
        const std::uint64_t s = derive_seed(seed, 2000 + static_cast<std::uint64_t>(i));
        const EscapeInstance inst = make_escape_instance(20, 1.0, 2 + (i % 5), s);
        const GrowthReport rep = verify_sam_growth(inst.landscape, inst.w0, inst.eta, inst.rho,
                                                   inst.steps);
        const bool non_vacuous = rep.applicable && !rep.degenerate;
        applicable += non_vacuous ? 1 : 0;
        const bool ok = non_vacuous && rep.holds;
        out.checked += 1;
        out.failures += ok ? 0 : 1;
        json j = to_json(rep);
        j["lemma"] = 2;
        j["seed"] = s;
        j["steps"] = inst.steps;
        j["ok"] = ok;
        out.reports.push_back(std::move(j));
    }

    out.summary = {{"lemma1_instances", 50},
                   {"lemma1_max_error", max_err},
                   {"lemma2_instances", instances},
                   {"lemma2_applicable", applicable},
                   {"failures", out.failures}};
    out.passed = out.failures == 0 && applicable == instances;
    return out;
}

CampaignResult campaign_prop1(int trials, std::uint64_t seed) {
    require(trials >= 1000, "prop1 campaign: trials must be >= 1000");
    CampaignResult out;
    const int ms[3] = {100, 1000, 1000};
    const int ns[3] = {10, 10, 100};
    for (int c = 0; c < 3; ++c) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
        const int d = 4 + rng.uniform_int(5);
        Vector mh(d), vh(d), mt(d), vt(d);
        for (int i = 0; i < d; ++i) {
            mh[i] = rng.uniform(-1.5, 1.5);
            vh[i] = rng.uniform(0.25, 2.0);
            mt[i] = rng.uniform(-1.5, 1.5);
            vt[i] = rng.uniform(0.25, 2.0);
        }
        const RatioReport rep = verify_sum_ratio(ms[c], ns[c], mh, vh, mt, vt, trials,
                                                 derive_seed(seed, 100 + static_cast<std::uint64_t>(c)));
        const bool ok = std::abs(rep.relative_error) <= 0.05;
        out.checked += 1;
        out.failures += ok ? 0 : 1;
        json j = to_json(rep);
        j["m"] = ms[c];
        j["n"] = ns[c];
        j["dim"] = d;
        j["trials"] = trials;
        j["ok"] = ok;
        out.reports.push_back(std::move(j));
    }

    // Mean-dominated regime: doubling the head count must quadruple the ratio.
    {
        Rng rng(derive_seed(seed, 50));
        const int d = 6;
        Vector mh(d), mt(d);
        const Vector var = Vector::Constant(d, 1e-4);  // sigma = 0.01
        for (int i = 0; i < d; ++i) {
            mh[i] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 1.5);
            mt[i] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 1.5);
        }
        const RatioReport base = verify_sum_ratio(100, 10, mh, var, mt, var, trials,
                                                  derive_seed(seed, 150));
        const RatioReport dbl = verify_sum_ratio(200, 10, mh, var, mt, var, trials,
                                                 derive_seed(seed, 151));
        const double mult = dbl.empirical_ratio / base.empirical_ratio;
        const bool ok = mult >= 4.0 * 0.9 && mult <= 4.0 * 1.1;
        out.checked += 1;
        out.failures += ok ? 0 : 1;
        out.reports.push_back(json{{"check", "doubling"},
                                   {"base_ratio", base.empirical_ratio},
                                   {"doubled_ratio", dbl.empirical_ratio},
                                   {"multiplier", mult},
                                   {"ok", ok}});
    }

    out.summary = {{"trials", trials}, {"failures", out.failures}};
    out.passed = out.failures == 0;
    return out;
}

CampaignResult campaign_prop2() {
    CampaignResult out;
    constexpr double kPi = 3.14159265358979323846;
    int violations = 0;
    for (int i = 0; i < 10; ++i) {
        // log-spaced 1e-3 .. 1e-1
        const double r = 1e-3 * std::pow(100.0, static_cast<double>(i) / 9.0);
        for (int jdx = 0; jdx < 36; ++jdx) {
            const double psi = kPi * static_cast<double>(jdx) / 36.0;
            const AngleReport rep = perturbation_angles(r, psi);
            out.checked += 1;
            if (!rep.within_bounds) {
                violations += 1;
                out.failures += 1;
            }
            json j = to_json(rep);
            j["r"] = r;
            j["psi"] = psi;
            out.reports.push_back(std::move(j));
        }
    }
    out.summary = {{"grid", "10 radii x 36 angles"}, {"violations", violations}};
    out.passed = violations == 0;
    return out;
}

CampaignResult campaign_prop3(int instances, std::uint64_t seed, int jobs) {
    require(instances >= 1, "prop3 campaign: instances must be >= 1");
    CampaignResult out;

    // Threshold monotonicity in the perturbed-mass fraction r.
    {
        const double mu = 2.0, eta = 0.003, rho = 0.05, L = 1.0;
        bool mono = true;
        double prev = -std::numeric_limits<double>::infinity();
        json grid = json::array();
        for (int k = 1; k <= 10; ++k) {
            const double r = 0.1 * k;
            const double lam = imbalance_threshold(mu, eta, rho, r, L);
            if (k > 1 && lam <= prev) mono = false;
            grid.push_back(json{{"r", r}, {"threshold", lam}});
            prev = lam;
        }
        mono = mono &&
               imbalance_threshold(mu, eta, rho, 1.0, L) == escape_threshold(mu, eta, rho, L);
        out.checked += 1;
        out.failures += mono ? 0 : 1;
        out.reports.push_back(json{{"part", 0}, {"grid", grid}, {"strictly_increasing", mono}, {"ok", mono}});
    }

    struct Slot {
        json j;
        bool ok = false;
        bool applicable = false;
    };
    std::vector<Slot> slots(static_cast<size_t>(2 * instances));
    parallel_for(2 * instances, jobs, [&](int idx) {
        if (idx < instances) {
            const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(idx));
            const WindowInstance wi = make_window_instance(20, 2.0, 8, s);
            if (!wi.found) {
                slots[static_cast<size_t>(idx)] = {
                    json{{"part", 1}, {"seed", s}, {"found", false}, {"ok", false}}, false, false};
                return;
            }
            const ImbalanceReport rep =
                verify_imbalance_escape(wi.base.landscape, wi.tail_fraction, wi.base.w0,
                                        wi.base.eta, wi.base.rho, wi.base.mu, wi.base.steps);
            const bool ok = rep.part1_applicable && rep.part1_holds && rep.thresholds_ordered;
            json j = to_json(rep);
            j["part"] = 1;
            j["seed"] = s;
            j["tail_fraction"] = wi.tail_fraction;
            j["ok"] = ok;
            slots[static_cast<size_t>(idx)] = {std::move(j), ok, rep.part1_applicable};
        } else {
            const std::uint64_t s = derive_seed(seed, 1000 + static_cast<std::uint64_t>(idx - instances));
            const EscapeInstance inst = make_shallow_instance(12, s);
            const ImbalanceReport rep = verify_imbalance_escape(inst.landscape, 0.1, inst.w0,
                                                                inst.eta, inst.rho, inst.mu,
                                                                inst.steps);
            const bool ok = rep.part2_applicable && rep.part2_holds && rep.thresholds_ordered;
            json j = to_json(rep);
            j["part"] = 2;
            j["seed"] = s;
            j["tail_fraction"] = 0.1;
            j["ok"] = ok;
            slots[static_cast<size_t>(idx)] = {std::move(j), ok, rep.part2_applicable};
        }
    });

    int applicable1 = 0, applicable2 = 0;
    for (int idx = 0; idx < 2 * instances; ++idx) {
        Slot& s = slots[static_cast<size_t>(idx)];
        out.reports.push_back(std::move(s.j));
        out.checked += 1;
        out.failures += s.ok ? 0 : 1;
        (idx < instances ? applicable1 : applicable2) += s.applicable ? 1 : 0;
    }
    out.summary = {{"instances_per_part", instances},
                   {"part1_applicable", applicable1},
                   {"part2_applicable", applicable2},
                   {"failures", out.failures}};
    out.passed = out.failures == 0 && applicable1 == instances && applicable2 == instances;
    return out;
}

CampaignResult campaign_bound(int trials, std::uint64_t seed, int jobs) {
    require(trials >= 1, "bound campaign: trials must be >= 1");
    std::vector<BoundTrial> res(static_cast<size_t>(trials));
    parallel_for(trials, jobs, [&](int i) {
        res[static_cast<size_t>(i)] = empirical_bound_trial(derive_seed(seed, static_cast<std::uint64_t>(i)));
    });
    CampaignResult out;
    int holds = 0;
    for (int i = 0; i < trials; ++i) {
        holds += res[static_cast<size_t>(i)].holds ? 1 : 0;
        json j = to_json(res[static_cast<size_t>(i)]);
        j["seed"] = derive_seed(seed, static_cast<std::uint64_t>(i));
        out.reports.push_back(std::move(j));
    }
    out.checked = trials;
    out.failures = trials - holds;
    out.summary = {{"trials", trials},
                   {"holds", holds},
                   {"hold_fraction", static_cast<double>(holds) / trials}};
    out.passed = holds * 100 >= trials * 99;
    return out;
}

double loss_cap_bound(const MlpModel& model, const LossSpec& spec) {
    const int num_layers = static_cast<int>(model.layer_dims.size()) - 1;
    const LayerSlice last = layer_slice(model, num_layers - 1);
    const int k = model.output_dim();
    validate(spec, k);

    double z_bound = 0.0;
    for (int j = 0; j < k; ++j) {
        const double base = last.weight.row(j).cwiseAbs().sum() + std::abs(last.bias[j]);
        double adj = base;
        switch (spec.kind) {
            case LossKind::ce:
                break;
            case LossKind::ldam:
                adj = base + spec.margins[j];
                break;
            case LossKind::la:
                adj = base + spec.tau * std::abs(std::log(spec.priors[j]));
                break;
            case LossKind::vs:
                adj = spec.multipliers[j] * base + std::abs(spec.additives[j]);
                break;
        }
        z_bound = std::max(z_bound, adj);
    }
    double w_max = 1.0;
    if (spec.kind == LossKind::vs) w_max = spec.weights.maxCoeff();
    return w_max * (std::log(static_cast<double>(k)) + 2.0 * z_bound);
}

BoundTrial bound_on_checkpoint(const MlpModel& model, const LongTailDataset& train,
                               const LossSpec& spec, double rho, double delta, int n_dirs,
                               std::uint64_t seed, const PowerIterationOptions& opt) {
    const Batch batch = full_batch(train);
    const LossGrad lg = loss_and_grad(model, batch, spec);

    BoundInputs in;
    in.train_loss = lg.loss;
    in.rho = rho;
    in.dim = model.param_count();
    in.lambda_max_ball = estimate_lambda_max_ball(model, batch, spec, rho, n_dirs,
                                                  derive_seed(seed, 1), opt);
    in.loss_cap = loss_cap_bound(model, spec);
    in.sample_count = train.size();
    in.weight_norm = model.params.norm();
    in.delta = delta;

    BoundTrial trial;
    trial.inputs = in;
    trial.bound_value = generalization_bound(in);
    trial.population_loss = 0.0;
    trial.holds = trial.bound_value >= in.train_loss;
    return trial;
}

}  // namespace ssesam
