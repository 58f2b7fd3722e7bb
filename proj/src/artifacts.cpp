#include "ssesam/artifacts.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ssesam {

namespace {

using nlohmann::json;

json vector_to_json(const Vector& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

std::string optional_cell(const std::optional<double>& v) {
    return v ? format_full(*v) : std::string();
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return std::string(buf);
}

ArtifactWriter::ArtifactWriter(std::string dir) : dir_(std::move(dir)) {
    require(!dir_.empty(), "artifact directory must be non-empty");
    std::filesystem::create_directories(dir_);
}

std::string ArtifactWriter::path(const std::string& relpath) const {
    return dir_ + "/" + relpath;
}

void ArtifactWriter::write_text(const std::string& relpath, const std::string& content) {
    const std::string full = path(relpath);
    std::filesystem::create_directories(std::filesystem::path(full).parent_path());
    std::ofstream out(full, std::ios::binary);
    require(out.good(), "cannot open " + full + " for writing");
    out << content;
    require(out.good(), "failed writing " + full);
    out.close();
    hashes_[relpath] = fnv1a64(content);
}

void ArtifactWriter::write_json(const std::string& relpath, const nlohmann::json& j) {
    write_text(relpath, j.dump(2) + "\n");
}

void ArtifactWriter::record_file(const std::string& relpath) {
    std::ifstream in(path(relpath), std::ios::binary);
    require(in.good(), "cannot read emitted file " + path(relpath));
    std::ostringstream buf;
    buf << in.rdbuf();
    hashes_[relpath] = fnv1a64(buf.str());
}

void ArtifactWriter::finalize() {
    json files = json::object();
    for (const auto& [rel, h] : hashes_) files[rel] = hash_hex(h);
    json manifest;
    manifest["hash"] = "fnv1a64";
    manifest["version"] = "0.1.0";
    manifest["files"] = files;
    const std::string content = manifest.dump(2) + "\n";
    const std::string full = path("manifest.json");
    std::ofstream out(full, std::ios::binary);
    require(out.good(), "cannot open " + full + " for writing");
    out << content;
    require(out.good(), "failed writing " + full);
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
    std::ostringstream os;
    os << "epoch,overall,many,medium,few,train_loss,stage\n";
    for (const MetricsRow& r : rows) {
        os << r.epoch << "," << format_full(r.acc.overall) << "," << optional_cell(r.acc.many)
           << "," << optional_cell(r.acc.medium) << "," << optional_cell(r.acc.few) << ","
           << format_full(r.train_loss) << "," << r.stage << "\n";
    }
    return os.str();
}

std::string trajectory_csv(const std::vector<StepRecord>& steps) {
    std::ostringstream os;
    os << "epoch,step,loss,grad_norm,stage\n";
    for (const StepRecord& s : steps) {
        os << s.epoch << "," << s.step << "," << format_full(s.loss) << ","
           << format_full(s.grad_norm) << "," << s.stage << "\n";
    }
    return os.str();
}

nlohmann::json to_json(const SpectralReport& rep, const PowerIterationOptions& opt) {
    json j;
    j["lambda_max"] = rep.lambda_max;
    j["lambda_min"] = rep.lambda_min;
    if (rep.lambda_ratio) {
        j["lambda_ratio"] = *rep.lambda_ratio;
    } else {
        j["lambda_ratio"] = nullptr;  // |lambda_min| below 1e-12: ratio undefined
    }
    j["v_min"] = vector_to_json(rep.v_min);
    j["iterations"] = rep.iterations;
    j["residual_max"] = rep.residual_max;
    j["residual_min"] = rep.residual_min;
    j["converged"] = rep.converged;
    j["scope"] = rep.scope;
    j["options"] = {{"max_iters", opt.max_iters}, {"tol", opt.tol}, {"seed", opt.seed}};
    return j;
}

nlohmann::json to_json(const EscapeReport& rep) {
    json j;
    j["lambda_min"] = rep.lambda_min;
    j["traj_grad_bound"] = rep.traj_grad_bound;
    j["threshold"] = rep.threshold;
    j["condition_met"] = rep.condition_met;
    j["lhs"] = rep.lhs;
    j["rhs"] = rep.rhs;
    j["degenerate"] = rep.degenerate;
    j["holds"] = rep.holds;
    return j;
}

nlohmann::json to_json(const GrowthReport& rep) {
    json j;
    j["applicable"] = rep.applicable;
    j["reason"] = rep.reason;
    j["lambda_min"] = rep.lambda_min;
    j["traj_grad_bound"] = rep.traj_grad_bound;
    j["threshold"] = rep.threshold;
    j["growth_factor"] = rep.growth_factor;
    j["lhs"] = rep.lhs;
    j["rhs"] = rep.rhs;
    j["degenerate"] = rep.degenerate;
    j["holds"] = rep.holds;
    return j;
}

nlohmann::json to_json(const RatioReport& rep) {
    json j;
    j["empirical_ratio"] = rep.empirical_ratio;
    j["exact_ratio"] = rep.exact_ratio;
    j["relative_error"] = rep.relative_error;
    return j;
}

nlohmann::json to_json(const AngleReport& rep) {
    json j;
    j["cos_head"] = rep.cos_head;
    j["cos_tail"] = rep.cos_tail;
    j["head_gap"] = rep.head_gap;
    j["tail_gap"] = rep.tail_gap;
    j["head_bound"] = rep.head_bound;
    j["tail_bound"] = rep.tail_bound;
    j["cross_check_error"] = rep.cross_check_error;
    j["within_bounds"] = rep.within_bounds;
    return j;
}

nlohmann::json to_json(const ImbalanceReport& rep) {
    json j;
    j["lambda_min"] = rep.lambda_min;
    j["lambda_r"] = rep.lambda_r;
    j["lambda_one"] = rep.lambda_one;
    j["traj_grad_bound"] = rep.traj_grad_bound;
    j["sgd_move"] = rep.sgd_move;
    j["sam_move"] = rep.sam_move;
    j["imbsam_move"] = rep.imbsam_move;
    j["sam_escapes"] = rep.sam_escapes;
    j["imbsam_escapes"] = rep.imbsam_escapes;
    j["window"] = rep.window;
    j["part1_applicable"] = rep.part1_applicable;
    j["part1_holds"] = rep.part1_holds;
    j["part2_applicable"] = rep.part2_applicable;
    j["part2_holds"] = rep.part2_holds;
    j["thresholds_ordered"] = rep.thresholds_ordered;
    j["degenerate"] = rep.degenerate;
    return j;
}

nlohmann::json to_json(const BoundInputs& in) {
    json j;
    j["train_loss"] = in.train_loss;
    j["rho"] = in.rho;
    j["dim"] = in.dim;
    j["lambda_max_ball"] = in.lambda_max_ball;
    j["loss_cap"] = in.loss_cap;
    j["sample_count"] = in.sample_count;
    j["weight_norm"] = in.weight_norm;
    j["delta"] = in.delta;
    return j;
}

nlohmann::json to_json(const BoundTrial& trial) {
    json j;
    j["inputs"] = to_json(trial.inputs);
    j["bound_value"] = trial.bound_value;
    j["population_loss"] = trial.population_loss;
    j["holds"] = trial.holds;
    return j;
}

}  // namespace ssesam
