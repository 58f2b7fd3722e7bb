#include "ssesam/runner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ssesam {

TrajectoryRecord run(MlpModel& model, const LongTailDataset& train, const ClassPartition& part,
                     const LossSpec& loss, const OptimConfig& cfg, std::uint64_t shuffle_seed,
                     int snapshot_stride, const EpochCallback& on_epoch) {
    validate(cfg);
    validate(loss, train.num_classes());
    require(train.size() > 0, "runner: training set is empty");
    require(train.num_classes() == part.num_classes(), "runner: dataset/partition class count mismatch");
    require(train.feature_dim() == model.input_dim(), "runner: dataset/model feature dim mismatch");
    require(train.num_classes() == model.output_dim(), "runner: dataset/model class count mismatch");
    require(snapshot_stride >= 0, "runner: snapshot stride must be >= 0");

    const int n = train.size();
    const int batch = std::min(cfg.batch_size, n);
    Optimizer opt(cfg, model.param_count());
    MlpModel probe = model;  // scratch copy, evaluated at perturbed iterates

    TrajectoryRecord rec;
    std::vector<int> order(static_cast<size_t>(n));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        Rng rng(derive_seed(shuffle_seed, static_cast<std::uint64_t>(epoch)));
        rng.shuffle(order);

        int step = 0;
        for (int start = 0; start < n; start += batch, ++step) {
            const int stop = std::min(start + batch, n);
            const std::vector<int> idx(order.begin() + start, order.begin() + stop);
            const Batch mini = sub_batch(train, idx);
            const SplitGradFn f = [&](const Vector& w) {
                probe.params = w;
                DecomposedLoss d = decompose(probe, mini, loss, part);
                return SplitEval{d.head_loss, d.tail_loss, std::move(d.head_grad),
                                 std::move(d.tail_grad)};
            };
            const StepResult res = opt.step(model.params, f, epoch);
            if (!std::isfinite(res.loss)) {
                throw std::runtime_error("non-finite training loss at epoch " +
                                         std::to_string(epoch) + ", step " + std::to_string(step));
            }
            rec.steps.push_back({epoch, step, res.loss, res.grad_norm, opt.stage(epoch)});
        }
        if (snapshot_stride > 0 &&
            ((epoch + 1) % snapshot_stride == 0 || epoch + 1 == cfg.epochs)) {
            rec.snapshots.emplace_back(epoch, model.params);
        }
        if (on_epoch) on_epoch(epoch, model);
    }
    if (!all_finite(model.params)) {
        throw std::runtime_error("non-finite parameters after the final update");
    }
    rec.final_params = model.params;
    return rec;
}

}  // namespace ssesam
