#pragma once

#include "ssesam/common.hpp"
#include "ssesam/data.hpp"
#include "ssesam/losses.hpp"
#include "ssesam/optim.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ssesam {

// Loss section of the run config. Per-class vectors that depend on the class
// counts (LDAM margins, default LA priors) are resolved against the training
// set at run time.
struct LossConfig {
    LossKind kind = LossKind::ce;
    double margin_scale = 0.5;          // ldam: C in Delta_j = C / count_j^(1/4)
    double tau = 1.0;                   // la temperature
    std::optional<Vector> priors;       // la: absent -> empirical train frequencies
    std::optional<Vector> multipliers;  // vs: absent -> all ones
    std::optional<Vector> additives;    // vs: absent -> all zeros
    std::optional<Vector> weights;      // vs: absent -> all ones
};

struct MetricsConfig {
    int many_min = 100;   // Many bucket: train count > many_min
    int few_max = 20;     // Few bucket: train count < few_max
    int eval_stride = 10; // evaluate split accuracy every this many epochs
};

struct SpectralConfig {
    bool enabled = false;  // compute spectra.json at the end of a train run
    double tol = 1e-6;
    int max_iters = 2000;
    std::vector<int> classes;  // per-class reports in addition to the full one
};

// Grid for the sweep subcommand; empty axes collapse to the base config value.
struct SweepGrid {
    std::vector<double> rho_head;
    std::vector<double> rho_tail;
    std::vector<double> gamma;
};

// Fully determines a run: two runs from equal configs are bitwise identical.
// One master seed fans out to dataset/init/shuffle/spectral sub-streams; the
// optional per-section seeds override single streams for ablations.
struct RunConfig {
    DatasetSpec dataset;  // .seed is ignored here; see effective_dataset_seed
    int eta_thres = 20;   // head/tail split: head iff train count > eta_thres
    LossConfig loss;
    std::vector<int> hidden_dims = {64, 64};
    OptimConfig optim;  // .seed is ignored here; see effective_shuffle_seed
    MetricsConfig metrics;
    SpectralConfig spectral;
    SweepGrid sweep;
    std::string output_dir = "out";
    int test_per_class = 50;  // balanced evaluation set size per class
    std::uint64_t master_seed = 0;
    std::optional<std::uint64_t> dataset_seed;
    std::optional<std::uint64_t> model_seed;
    std::optional<std::uint64_t> shuffle_seed;
};

// Canonical JSON round trip: parse_run_config(serialize(c)) == c. Unknown
// keys are rejected ("version" is tolerated so config echoes reload as-is).
std::string serialize(const RunConfig& cfg);
RunConfig parse_run_config(const std::string& text);

// File variants; load applies the SSE_SEED environment override to the master
// seed after parsing.
RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& cfg, const std::string& path);

std::uint64_t effective_dataset_seed(const RunConfig& cfg);
std::uint64_t effective_model_seed(const RunConfig& cfg);
std::uint64_t effective_shuffle_seed(const RunConfig& cfg);
std::uint64_t effective_spectral_seed(const RunConfig& cfg);

// Resolve the loss section against the training class counts.
LossSpec resolve_loss(const LossConfig& loss, const IntVector& class_counts);

}  // namespace ssesam
