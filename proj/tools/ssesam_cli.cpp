// Command-line front end: training runs, spectral diagnostics, verification
// campaigns for the saddle-escape results, the generalization-bound
// evaluator, grid sweeps, and the five-optimizer comparison.
//
// Exit codes: 0 success, 1 verification failure (or runtime error),
// 2 config error, 64 usage error.

#include <CLI11.hpp>

#include "ssesam/harness.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace ssesam;

std::uint64_t env_seed(std::uint64_t fallback) {
    const char* env = std::getenv("SSE_SEED");
    if (!env) return fallback;
    try {
        size_t pos = 0;
        const std::uint64_t v = std::stoull(env, &pos);
        require(pos == std::string(env).size(), "trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("SSE_SEED must be an unsigned integer, got \"" +
                                    std::string(env) + "\"");
    }
}

int finish_campaign(const CampaignResult& res, const std::string& out_dir,
                    const std::string& name) {
    if (out_dir.empty()) {
        std::cout << res.reports.dump(2) << "\n";
    } else {
        ArtifactWriter writer(out_dir);
        writer.write_json("report.json", res.reports);
        writer.write_json("summary.json", res.summary);
        writer.finalize();
    }
    std::cerr << name << ": " << (res.passed ? "pass" : "FAIL") << " (" << res.failures
              << " failed of " << res.checked << " checks)\n";
    return res.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"long-tail SAM-family optimization laboratory"};
    app.set_version_flag("--version", "0.1.0");
    app.require_subcommand(1);

    std::string config_path;
    int jobs = 0;

    CLI::App* train_cmd = app.add_subcommand("train", "one seeded training run");
    train_cmd->add_option("--config", config_path, "run config JSON")->required();

    std::string ckpt_prefix, data_path, out_dir;
    std::vector<int> classes;
    double tol = 1e-6;
    int max_iters = 2000;
    std::uint64_t seed = 0;
    CLI::App* spectra_cmd =
        app.add_subcommand("spectra", "Hessian spectrum of a checkpoint on a dataset");
    spectra_cmd->add_option("--checkpoint", ckpt_prefix, "checkpoint path prefix")->required();
    spectra_cmd->add_option("--data", data_path, "dataset CSV")->required();
    spectra_cmd->add_option("--classes", classes, "classes to report individually");
    spectra_cmd->add_option("--tol", tol, "power-iteration tolerance");
    spectra_cmd->add_option("--max-iters", max_iters, "power-iteration budget per stage");
    spectra_cmd->add_option("--seed", seed, "start-vector seed");
    spectra_cmd->add_option("--out", out_dir, "output directory (default: print to stdout)");

    int instances = 0, trials = 10000;
    CLI::App* verify_cmd = app.add_subcommand("verify", "verification campaigns");
    verify_cmd->require_subcommand(1);
    CLI::App* thm1_cmd = verify_cmd->add_subcommand("thm1", "saddle-escape inequality campaign");
    int thm1_instances = 100;
    thm1_cmd->add_option("--instances", thm1_instances, "instance count");
    thm1_cmd->add_option("--seed", seed, "campaign seed");
    thm1_cmd->add_option("--jobs", jobs, "worker threads (0 = auto)");
    thm1_cmd->add_option("--out", out_dir, "output directory (default: print to stdout)");
    CLI::App* lemmas_cmd =
        verify_cmd->add_subcommand("lemmas", "SGD projection closed form + SAM growth bound");
    int lemmas_instances = 30;
    lemmas_cmd->add_option("--instances", lemmas_instances, "growth-bound instance count");
    lemmas_cmd->add_option("--seed", seed, "campaign seed");
    lemmas_cmd->add_option("--out", out_dir, "output directory (default: print to stdout)");
    CLI::App* prop1_cmd =
        verify_cmd->add_subcommand("prop1", "group-gradient second-moment ratio Monte Carlo");
    prop1_cmd->add_option("--trials", trials, "Monte Carlo trials (>= 1000)");
    prop1_cmd->add_option("--seed", seed, "campaign seed");
    prop1_cmd->add_option("--out", out_dir, "output directory (default: print to stdout)");
    CLI::App* prop2_cmd =
        verify_cmd->add_subcommand("prop2", "perturbation-angle bounds over the r x psi grid");
    prop2_cmd->add_option("--out", out_dir, "output directory (default: print to stdout)");
    CLI::App* prop3_cmd =
        verify_cmd->add_subcommand("prop3", "tail-only escape window and threshold ordering");
    int prop3_instances = 10;
    prop3_cmd->add_option("--instances", prop3_instances, "instances per part");
    prop3_cmd->add_option("--seed", seed, "campaign seed");
    prop3_cmd->add_option("--jobs", jobs, "worker threads (0 = auto)");
    prop3_cmd->add_option("--out", out_dir, "output directory (default: print to stdout)");

    double rho = 0.05, delta = 0.1;
    int dirs = 4;
    std::string loss_kind = "ce";
    CLI::App* bound_cmd = app.add_subcommand(
        "bound", "generalization-bound evaluator (checkpoint mode or --trials campaign)");
    bound_cmd->add_option("--checkpoint", ckpt_prefix, "checkpoint path prefix");
    bound_cmd->add_option("--data", data_path, "training dataset CSV");
    bound_cmd->add_option("--loss", loss_kind, "loss kind for the evaluation (ce|ldam|la|vs)");
    bound_cmd->add_option("--rho", rho, "perturbation radius");
    bound_cmd->add_option("--delta", delta, "confidence parameter");
    bound_cmd->add_option("--dirs", dirs, "sphere sample count for lambda_max over the ball");
    bound_cmd->add_option("--tol", tol, "power-iteration tolerance");
    bound_cmd->add_option("--max-iters", max_iters, "power-iteration budget per stage");
    bound_cmd->add_option("--seed", seed, "seed");
    bound_cmd->add_option("--trials", instances, "run N seeded end-to-end trials instead");
    bound_cmd->add_option("--jobs", jobs, "worker threads (0 = auto)");
    bound_cmd->add_option("--out", out_dir, "output directory (default: print to stdout)");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "grid sweep over rho_head/rho_tail/gamma");
    sweep_cmd->add_option("--config", config_path, "run config JSON with a sweep section")
        ->required();
    sweep_cmd->add_option("--jobs", jobs, "worker threads (0 = auto)");

    CLI::App* compare_cmd =
        app.add_subcommand("compare", "joint run of sgd/sam/imbsam/sam_ext/sse_sam");
    compare_cmd->add_option("--config", config_path, "run config JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 64;
    }

    try {
        if (app.got_subcommand(train_cmd)) {
            const RunConfig cfg = load_run_config(config_path);
            const TrainResult res = run_train(cfg);
            std::cout << "run dir: " << res.run_dir << "\n"
                      << "final overall accuracy: " << format_full(res.final_acc.overall) << "\n"
                      << "final train loss: " << format_full(res.final_train_loss) << "\n";
            return 0;
        }
        if (app.got_subcommand(spectra_cmd)) {
            const MlpModel model = load_checkpoint(ckpt_prefix);
            const LongTailDataset data = load_csv(data_path);
            PowerIterationOptions opt;
            opt.tol = tol;
            opt.max_iters = max_iters;
            opt.seed = env_seed(seed);
            LossConfig lc;
            lc.kind = LossKind::ce;
            const LossSpec spec = resolve_loss(lc, data.class_counts);
            nlohmann::json reports = nlohmann::json::array();
            reports.push_back(to_json(spectral_report(model, data, spec, std::nullopt, opt), opt));
            for (int c : classes) {
                reports.push_back(
                    to_json(spectral_report(model, data, spec, std::vector<int>{c}, opt), opt));
            }
            const nlohmann::json payload{{"reports", reports}};
            if (out_dir.empty()) {
                std::cout << payload.dump(2) << "\n";
            } else {
                ArtifactWriter writer(out_dir);
                writer.write_json("spectra.json", payload);
                writer.finalize();
            }
            return 0;
        }
        if (app.got_subcommand(verify_cmd)) {
            if (verify_cmd->got_subcommand(thm1_cmd)) {
                return finish_campaign(campaign_thm1(thm1_instances, env_seed(seed), jobs),
                                       out_dir, "thm1");
            }
            if (verify_cmd->got_subcommand(lemmas_cmd)) {
                return finish_campaign(campaign_lemmas(lemmas_instances, env_seed(seed)), out_dir,
                                       "lemmas");
            }
            if (verify_cmd->got_subcommand(prop1_cmd)) {
                return finish_campaign(campaign_prop1(trials, env_seed(seed)), out_dir, "prop1");
            }
            if (verify_cmd->got_subcommand(prop2_cmd)) {
                return finish_campaign(campaign_prop2(), out_dir, "prop2");
            }
            if (verify_cmd->got_subcommand(prop3_cmd)) {
                return finish_campaign(campaign_prop3(prop3_instances, env_seed(seed), jobs),
                                       out_dir, "prop3");
            }
        }
        if (app.got_subcommand(bound_cmd)) {
            if (instances > 0) {
                return finish_campaign(campaign_bound(instances, env_seed(seed), jobs), out_dir,
                                       "bound");
            }
            require(!ckpt_prefix.empty() && !data_path.empty(),
                    "bound: either --trials N or both --checkpoint and --data are required");
            const MlpModel model = load_checkpoint(ckpt_prefix);
            const LongTailDataset data = load_csv(data_path);
            LossConfig lc;
            lc.kind = loss_kind == "ce"    ? LossKind::ce
                      : loss_kind == "ldam" ? LossKind::ldam
                      : loss_kind == "la"   ? LossKind::la
                      : loss_kind == "vs"   ? LossKind::vs
                                            : throw std::invalid_argument(
                                                  "unknown loss kind \"" + loss_kind + "\"");
            const LossSpec spec = resolve_loss(lc, data.class_counts);
            PowerIterationOptions opt;
            opt.tol = tol;
            opt.max_iters = max_iters;
            opt.seed = env_seed(seed);
            const BoundTrial trial = bound_on_checkpoint(model, data, spec, rho, delta, dirs,
                                                         env_seed(seed), opt);
            const nlohmann::json payload = to_json(trial);
            if (out_dir.empty()) {
                std::cout << payload.dump(2) << "\n";
            } else {
                ArtifactWriter writer(out_dir);
                writer.write_json("report.json", payload);
                writer.finalize();
            }
            return trial.holds ? 0 : 1;
        }
        if (app.got_subcommand(sweep_cmd)) {
            const RunConfig cfg = load_run_config(config_path);
            const std::vector<SweepCell> cells = run_sweep(cfg, jobs);
            std::cout << "sweep: " << cells.size() << " cells under " << cfg.output_dir << "\n";
            return 0;
        }
        if (app.got_subcommand(compare_cmd)) {
            const RunConfig cfg = load_run_config(config_path);
            const CompareResult res = run_compare(cfg);
            std::cout << res.table;
            std::cout << "report dir: " << cfg.output_dir << "\n";
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 64;
}
