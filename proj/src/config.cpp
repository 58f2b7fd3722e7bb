#include "ssesam/config.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ssesam {

namespace {

using nlohmann::json;

std::string loss_kind_name(LossKind k) {
    switch (k) {
        case LossKind::ce: return "ce";
        case LossKind::ldam: return "ldam";
        case LossKind::la: return "la";
        case LossKind::vs: return "vs";
    }
    throw std::logic_error("unhandled loss kind");
}

LossKind loss_kind_from_name(const std::string& s) {
    if (s == "ce") return LossKind::ce;
    if (s == "ldam") return LossKind::ldam;
    if (s == "la") return LossKind::la;
    if (s == "vs") return LossKind::vs;
    throw std::invalid_argument("unknown loss kind \"" + s + "\" (expected ce|ldam|la|vs)");
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    require(obj.is_object(), "config section \"" + where + "\" must be a JSON object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) {
            if (it.key() == k) {
                known = true;
                break;
            }
        }
        require(known, "unknown key \"" + it.key() + "\" in " + where);
    }
}

json vector_to_json(const Vector& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Vector vector_from_json(const json& arr, const std::string& where) {
    require(arr.is_array(), where + " must be a JSON array of numbers");
    Vector v(static_cast<Eigen::Index>(arr.size()));
    Eigen::Index i = 0;
    for (const auto& x : arr) {
        require(x.is_number(), where + " must contain only numbers");
        v[i++] = x.get<double>();
    }
    return v;
}

std::vector<double> doubles_from_json(const json& arr, const std::string& where) {
    require(arr.is_array(), where + " must be a JSON array of numbers");
    std::vector<double> v;
    v.reserve(arr.size());
    for (const auto& x : arr) {
        require(x.is_number(), where + " must contain only numbers");
        v.push_back(x.get<double>());
    }
    return v;
}

std::vector<int> ints_from_json(const json& arr, const std::string& where) {
    require(arr.is_array(), where + " must be a JSON array of integers");
    std::vector<int> v;
    v.reserve(arr.size());
    for (const auto& x : arr) {
        require(x.is_number_integer(), where + " must contain only integers");
        v.push_back(x.get<int>());
    }
    return v;
}

json dataset_to_json(const RunConfig& cfg) {
    json j;
    j["num_classes"] = cfg.dataset.num_classes;
    j["max_per_class"] = cfg.dataset.max_per_class;
    j["imbalance"] = cfg.dataset.imbalance;
    j["feature_dim"] = cfg.dataset.feature_dim;
    j["eta_thres"] = cfg.eta_thres;
    if (cfg.dataset_seed) j["seed"] = *cfg.dataset_seed;
    return j;
}

void dataset_from_json(const json& j, RunConfig& cfg) {
    check_keys(j, {"num_classes", "max_per_class", "imbalance", "feature_dim", "eta_thres", "seed"}, "dataset");
    if (j.contains("num_classes")) cfg.dataset.num_classes = j.at("num_classes").get<int>();
    if (j.contains("max_per_class")) cfg.dataset.max_per_class = j.at("max_per_class").get<int>();
    if (j.contains("imbalance")) cfg.dataset.imbalance = j.at("imbalance").get<double>();
    if (j.contains("feature_dim")) cfg.dataset.feature_dim = j.at("feature_dim").get<int>();
    if (j.contains("eta_thres")) cfg.eta_thres = j.at("eta_thres").get<int>();
    if (j.contains("seed")) cfg.dataset_seed = j.at("seed").get<std::uint64_t>();
}

json loss_to_json(const LossConfig& lc) {
    json j;
    j["kind"] = loss_kind_name(lc.kind);
    j["margin_scale"] = lc.margin_scale;
    j["tau"] = lc.tau;
    if (lc.priors) j["priors"] = vector_to_json(*lc.priors);
    if (lc.multipliers) j["multipliers"] = vector_to_json(*lc.multipliers);
    if (lc.additives) j["additives"] = vector_to_json(*lc.additives);
    if (lc.weights) j["weights"] = vector_to_json(*lc.weights);
    return j;
}

void loss_from_json(const json& j, LossConfig& lc) {
    check_keys(j, {"kind", "margin_scale", "tau", "priors", "multipliers", "additives", "weights"}, "loss");
    if (j.contains("kind")) lc.kind = loss_kind_from_name(j.at("kind").get<std::string>());
    if (j.contains("margin_scale")) lc.margin_scale = j.at("margin_scale").get<double>();
    if (j.contains("tau")) lc.tau = j.at("tau").get<double>();
    if (j.contains("priors")) lc.priors = vector_from_json(j.at("priors"), "loss.priors");
    if (j.contains("multipliers")) lc.multipliers = vector_from_json(j.at("multipliers"), "loss.multipliers");
    if (j.contains("additives")) lc.additives = vector_from_json(j.at("additives"), "loss.additives");
    if (j.contains("weights")) lc.weights = vector_from_json(j.at("weights"), "loss.weights");
}

json model_to_json(const RunConfig& cfg) {
    json j;
    j["hidden_dims"] = cfg.hidden_dims;
    if (cfg.model_seed) j["seed"] = *cfg.model_seed;
    return j;
}

void model_from_json(const json& j, RunConfig& cfg) {
    check_keys(j, {"hidden_dims", "seed"}, "model");
    if (j.contains("hidden_dims")) cfg.hidden_dims = ints_from_json(j.at("hidden_dims"), "model.hidden_dims");
    if (j.contains("seed")) cfg.model_seed = j.at("seed").get<std::uint64_t>();
}

json optim_to_json(const RunConfig& cfg) {
    const OptimConfig& oc = cfg.optim;
    json j;
    j["kind"] = to_string(oc.kind);
    j["eta"] = oc.eta;
    j["rho"] = oc.rho;
    j["rho_head"] = oc.rho_head;
    j["rho_tail"] = oc.rho_tail;
    j["gamma"] = oc.gamma;
    j["epochs"] = oc.epochs;
    j["batch_size"] = oc.batch_size;
    j["grad_norm_floor"] = oc.grad_norm_floor;
    j["momentum"] = oc.momentum;
    if (cfg.shuffle_seed) j["seed"] = *cfg.shuffle_seed;
    return j;
}

void optim_from_json(const json& j, RunConfig& cfg) {
    check_keys(j,
               {"kind", "eta", "rho", "rho_head", "rho_tail", "gamma", "epochs", "batch_size",
                "grad_norm_floor", "momentum", "seed"},
               "optim");
    OptimConfig& oc = cfg.optim;
    if (j.contains("kind")) oc.kind = optim_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("eta")) oc.eta = j.at("eta").get<double>();
    if (j.contains("rho")) oc.rho = j.at("rho").get<double>();
    if (j.contains("rho_head")) oc.rho_head = j.at("rho_head").get<double>();
    if (j.contains("rho_tail")) oc.rho_tail = j.at("rho_tail").get<double>();
    if (j.contains("gamma")) oc.gamma = j.at("gamma").get<double>();
    if (j.contains("epochs")) oc.epochs = j.at("epochs").get<int>();
    if (j.contains("batch_size")) oc.batch_size = j.at("batch_size").get<int>();
    if (j.contains("grad_norm_floor")) oc.grad_norm_floor = j.at("grad_norm_floor").get<double>();
    if (j.contains("momentum")) oc.momentum = j.at("momentum").get<double>();
    if (j.contains("seed")) cfg.shuffle_seed = j.at("seed").get<std::uint64_t>();
}

json metrics_to_json(const MetricsConfig& mc) {
    json j;
    j["many_min"] = mc.many_min;
    j["few_max"] = mc.few_max;
    j["eval_stride"] = mc.eval_stride;
    return j;
}

void metrics_from_json(const json& j, MetricsConfig& mc) {
    check_keys(j, {"many_min", "few_max", "eval_stride"}, "metrics");
    if (j.contains("many_min")) mc.many_min = j.at("many_min").get<int>();
    if (j.contains("few_max")) mc.few_max = j.at("few_max").get<int>();
    if (j.contains("eval_stride")) mc.eval_stride = j.at("eval_stride").get<int>();
}

json spectral_to_json(const SpectralConfig& sc) {
    json j;
    j["enabled"] = sc.enabled;
    j["tol"] = sc.tol;
    j["max_iters"] = sc.max_iters;
    j["classes"] = sc.classes;
    return j;
}

void spectral_from_json(const json& j, SpectralConfig& sc) {
    check_keys(j, {"enabled", "tol", "max_iters", "classes"}, "spectral");
    if (j.contains("enabled")) sc.enabled = j.at("enabled").get<bool>();
    if (j.contains("tol")) sc.tol = j.at("tol").get<double>();
    if (j.contains("max_iters")) sc.max_iters = j.at("max_iters").get<int>();
    if (j.contains("classes")) sc.classes = ints_from_json(j.at("classes"), "spectral.classes");
}

json sweep_to_json(const SweepGrid& sg) {
    json j;
    j["rho_head"] = sg.rho_head;
    j["rho_tail"] = sg.rho_tail;
    j["gamma"] = sg.gamma;
    return j;
}

void sweep_from_json(const json& j, SweepGrid& sg) {
    check_keys(j, {"rho_head", "rho_tail", "gamma"}, "sweep");
    if (j.contains("rho_head")) sg.rho_head = doubles_from_json(j.at("rho_head"), "sweep.rho_head");
    if (j.contains("rho_tail")) sg.rho_tail = doubles_from_json(j.at("rho_tail"), "sweep.rho_tail");
    if (j.contains("gamma")) sg.gamma = doubles_from_json(j.at("gamma"), "sweep.gamma");
}

RunConfig from_json_checked(const json& j) {
    check_keys(j,
               {"dataset", "loss", "model", "optim", "metrics", "spectral", "sweep", "output_dir",
                "test_per_class", "seed", "version"},
               "config");
    RunConfig cfg;
    if (j.contains("dataset")) dataset_from_json(j.at("dataset"), cfg);
    if (j.contains("loss")) loss_from_json(j.at("loss"), cfg.loss);
    if (j.contains("model")) model_from_json(j.at("model"), cfg);
    if (j.contains("optim")) optim_from_json(j.at("optim"), cfg);
    if (j.contains("metrics")) metrics_from_json(j.at("metrics"), cfg.metrics);
    if (j.contains("spectral")) spectral_from_json(j.at("spectral"), cfg.spectral);
    if (j.contains("sweep")) sweep_from_json(j.at("sweep"), cfg.sweep);
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("test_per_class")) cfg.test_per_class = j.at("test_per_class").get<int>();
    if (j.contains("seed")) cfg.master_seed = j.at("seed").get<std::uint64_t>();
    return cfg;
}

}  // namespace

std::string serialize(const RunConfig& cfg) {
    json j;
    j["dataset"] = dataset_to_json(cfg);
    j["loss"] = loss_to_json(cfg.loss);
    j["model"] = model_to_json(cfg);
    j["optim"] = optim_to_json(cfg);
    j["metrics"] = metrics_to_json(cfg.metrics);
    j["spectral"] = spectral_to_json(cfg.spectral);
    if (!cfg.sweep.rho_head.empty() || !cfg.sweep.rho_tail.empty() || !cfg.sweep.gamma.empty()) {
        j["sweep"] = sweep_to_json(cfg.sweep);
    }
    j["output_dir"] = cfg.output_dir;
    j["test_per_class"] = cfg.test_per_class;
    j["seed"] = cfg.master_seed;
    return j.dump(2) + "\n";
}

RunConfig parse_run_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        return from_json_checked(j);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed config value: ") + e.what());
    }
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    RunConfig cfg = parse_run_config(buf.str());
    if (const char* env = std::getenv("SSE_SEED")) {
        try {
            size_t pos = 0;
            cfg.master_seed = std::stoull(env, &pos);
            require(pos == std::string(env).size(), "trailing characters");
        } catch (const std::exception&) {
            throw std::invalid_argument("SSE_SEED must be an unsigned integer, got \"" + std::string(env) + "\"");
        }
    }
    return cfg;
}

void save_run_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    require(out.good(), "cannot open " + path + " for writing");
    out << serialize(cfg);
    require(out.good(), "failed writing " + path);
}

std::uint64_t effective_dataset_seed(const RunConfig& cfg) {
    return cfg.dataset_seed ? *cfg.dataset_seed : derive_seed(cfg.master_seed, 0);
}

std::uint64_t effective_model_seed(const RunConfig& cfg) {
    return cfg.model_seed ? *cfg.model_seed : derive_seed(cfg.master_seed, 1);
}

std::uint64_t effective_shuffle_seed(const RunConfig& cfg) {
    return cfg.shuffle_seed ? *cfg.shuffle_seed : derive_seed(cfg.master_seed, 2);
}

std::uint64_t effective_spectral_seed(const RunConfig& cfg) {
    return derive_seed(cfg.master_seed, 3);
}

LossSpec resolve_loss(const LossConfig& loss, const IntVector& class_counts) {
    const int k = static_cast<int>(class_counts.size());
    LossSpec spec;
    switch (loss.kind) {
        case LossKind::ce:
            spec = LossSpec::cross_entropy();
            break;
        case LossKind::ldam:
            spec = LossSpec::ldam(class_counts, loss.margin_scale);
            break;
        case LossKind::la: {
            Vector priors;
            if (loss.priors) {
                priors = *loss.priors;
            } else {
                priors = class_counts.cast<double>() / static_cast<double>(class_counts.sum());
            }
            spec = LossSpec::logit_adjusted(priors, loss.tau);
            break;
        }
        case LossKind::vs: {
            Vector mult = loss.multipliers ? *loss.multipliers : Vector(Vector::Ones(k));
            Vector add = loss.additives ? *loss.additives : Vector(Vector::Zero(k));
            Vector w = loss.weights ? *loss.weights : Vector(Vector::Ones(k));
            spec = LossSpec::vector_scaling(std::move(mult), std::move(add), std::move(w));
            break;
        }
    }
    validate(spec, k);
    return spec;
}

}  // namespace ssesam
