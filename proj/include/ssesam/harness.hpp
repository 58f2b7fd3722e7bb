#pragma once

#include "ssesam/artifacts.hpp"
#include "ssesam/config.hpp"
#include "ssesam/model.hpp"
#include "ssesam/runner.hpp"
#include "ssesam/spectral.hpp"
#include "ssesam/theory.hpp"

#include <json.hpp>

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace ssesam {

int default_jobs();  // hardware parallelism, at least 1

// Static work distribution over a shared atomic counter; tasks must be
// independent and write only their own result slot. Exceptions propagate.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);

// ---- train / compare / sweep ----------------------------------------------

struct TrainResult {
    SplitMetrics final_acc;          // balanced test set, macro per bucket
    double final_train_loss = 0.0;   // full-batch loss at the final parameters
    std::string run_dir;
};

// One full training run: builds dataset/partition/loss/model from the config,
// trains, and writes config.json, metrics.csv, trajectory.csv, checkpoint.*,
// report.json (plus spectra.json when enabled) and manifest.json under
// cfg.output_dir.
TrainResult run_train(const RunConfig& cfg);

struct CompareResult {
    std::vector<std::pair<OptimKind, TrainResult>> rows;  // sgd, sam, imbsam, sam_ext, sse_sam
    std::string table;  // human-readable, accuracies in % with 1 decimal
};

// Joint run of all five optimizers from one config (same dataset, init and
// shuffle streams), one run directory per optimizer plus a combined report.
// Purely descriptive: nothing here asserts an accuracy ordering.
CompareResult run_compare(const RunConfig& cfg);

struct SweepCell {
    int index = 0;
    double rho_head = 0.0;
    double rho_tail = 0.0;
    double gamma = 0.0;
    TrainResult result;
};

// Grid over cfg.sweep axes (empty axis = the base config value), one training
// run per cell under cell_### directories, distributed over a worker pool.
std::vector<SweepCell> run_sweep(const RunConfig& cfg, int jobs);

// ---- verification campaigns ------------------------------------------------

struct CampaignResult {
    nlohmann::json reports = nlohmann::json::array();  // one entry per instance
    nlohmann::json summary = nlohmann::json::object();
    int checked = 0;   // non-vacuous checks evaluated
    int failures = 0;  // non-vacuous checks that failed
    bool passed = false;
};

// Saddle-escape inequality on seeded quadratic instances (mu and step count
// cycle over a small grid); passes only if every instance meets the curvature
// condition non-degenerately and satisfies the conclusion.
CampaignResult campaign_thm1(int instances, std::uint64_t seed, int jobs);

// SGD projection closed form (50 instances, t <= 20, max relative error
// < 1e-9) plus the SAM growth lower bound on `instances` applicable
// escape instances.
CampaignResult campaign_lemmas(int instances, std::uint64_t seed);

// Monte Carlo vs closed-form group-gradient second-moment ratio at
// (m,n) in {(100,10),(1000,10),(1000,100)} within 5%, plus the x4 scaling of
// the ratio when m doubles in the mean-dominated regime.
CampaignResult campaign_prop1(int trials, std::uint64_t seed);

// Perturbation-angle guarantees over the full r x psi grid; zero violations
// allowed.
CampaignResult campaign_prop2();

// Threshold monotonicity in the tail fraction plus both escape-window
// implications (`instances` constructed instances per part, all non-vacuous).
CampaignResult campaign_prop3(int instances, std::uint64_t seed, int jobs);

// Seeded end-to-end generalization-bound trials; passes when the population
// loss respects the bound in at least 99% of trials.
CampaignResult campaign_bound(int trials, std::uint64_t seed, int jobs);

// ---- bound evaluation on a checkpoint --------------------------------------

// A.s. per-sample loss bound for a tanh MLP: hidden activations live in
// [-1, 1], so the (adjusted) logits are bounded by the last layer's weights.
double loss_cap_bound(const MlpModel& model, const LossSpec& spec);

// Assembles BoundInputs from a trained checkpoint and its training set and
// evaluates the bound. population_loss is left at 0 (unknown); holds is
// train_loss <= bound, which is implied by the bound's structure.
BoundTrial bound_on_checkpoint(const MlpModel& model, const LongTailDataset& train,
                               const LossSpec& spec, double rho, double delta, int n_dirs,
                               std::uint64_t seed, const PowerIterationOptions& opt);

}  // namespace ssesam
