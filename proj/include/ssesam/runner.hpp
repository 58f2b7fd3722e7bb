#pragma once

#include "ssesam/common.hpp"
#include "ssesam/data.hpp"
#include "ssesam/losses.hpp"
#include "ssesam/model.hpp"
#include "ssesam/optim.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace ssesam {

// One optimizer step on one mini-batch; loss and gradient norm are taken at
// the unperturbed iterate.
struct StepRecord {
    int epoch = 0;
    int step = 0;  // mini-batch index within the epoch
    double loss = 0.0;
    double grad_norm = 0.0;
    int stage = 1;
};

struct TrajectoryRecord {
    std::vector<StepRecord> steps;
    std::vector<std::pair<int, Vector>> snapshots;  // (epoch, params) after that epoch
    Vector final_params;
};

using EpochCallback = std::function<void(int epoch, const MlpModel& model)>;

// Trains the model in place for cfg.epochs epochs of mini-batch steps.
// Shuffle order is a deterministic function of (shuffle_seed, epoch); batches
// are consecutive chunks of the shuffled index list, the ragged final chunk
// included. Every optimizer kind goes through the same head/tail loss
// decomposition, so e.g. rho = 0 SAM reproduces SGD bitwise. Throws on a
// non-finite training loss, naming the offending epoch and step. With
// snapshot_stride > 0, parameters are recorded after every stride-th epoch
// (and after the last). The callback, if set, runs after every epoch.
TrajectoryRecord run(MlpModel& model, const LongTailDataset& train, const ClassPartition& part,
                     const LossSpec& loss, const OptimConfig& cfg, std::uint64_t shuffle_seed,
                     int snapshot_stride = 0, const EpochCallback& on_epoch = {});

}  // namespace ssesam
