// tcrisk: rail transit transport-capacity risk toolkit.
//
// Wires the library pipeline: fixture generation, seeded simulation, risk
// assessment, Gaussian Bayesian network training, one-step-ahead prediction,
// and WMAPE/MAPE evaluation. Every subcommand reads an optional JSON config
// (--config); flags of the same name override config keys.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tcrisk/fixtures.hpp"
#include "tcrisk/lgbn.hpp"
#include "tcrisk/predict.hpp"
#include "tcrisk/risk.hpp"
#include "tcrisk/simulate.hpp"
#include "tcrisk/topology.hpp"

namespace {

using nlohmann::json;
using namespace tcrisk;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct RunConfig {
    std::string topology;
    std::string out_dir = "out";
    int days = 30;
    std::uint64_t seed = 1;
    double transfer_penalty = 3.0;  // section-equivalents per line change
    int horizon = 1;                // prediction horizon, 15-minute slots
    std::string fitter = "mle";
    long train_ref = 1600;
    long test_ref = 320;
    double sw_scale = 1.0;
    LogisticParams logistic;
    WeightRule weight_rule;
    DemandProfile profile;

    SimulationConfig sim() const {
        SimulationConfig s;
        s.profile = profile;
        s.days = days;
        s.seed = seed;
        s.transfer_penalty = transfer_penalty;
        return s;
    }
    RiskConfig risk() const {
        RiskConfig r;
        r.rule = weight_rule;
        r.logistic = logistic;
        r.sw_scale = sw_scale;
        return r;
    }
    ExperimentConfig experiment() const {
        ExperimentConfig e;
        e.fitter = fitter_from_string(fitter);
        e.horizon = horizon;
        e.train_ref = train_ref;
        e.test_ref = test_ref;
        e.risk = risk();
        return e;
    }
};

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path);
    json j = json::parse(in);
    cfg.topology = j.value("topology", cfg.topology);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.days = j.value("days", cfg.days);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.transfer_penalty = j.value("transfer_penalty", cfg.transfer_penalty);
    cfg.horizon = j.value("horizon", cfg.horizon);
    cfg.fitter = j.value("fitter", cfg.fitter);
    cfg.train_ref = j.value("train_ref", cfg.train_ref);
    cfg.test_ref = j.value("test_ref", cfg.test_ref);
    cfg.sw_scale = j.value("sw_scale", cfg.sw_scale);
    if (j.contains("logistic")) {
        cfg.logistic.a = j["logistic"].value("a", cfg.logistic.a);
        cfg.logistic.b = j["logistic"].value("b", cfg.logistic.b);
    }
    if (j.contains("weight_rule")) {
        cfg.weight_rule.thresholds =
            j["weight_rule"].value("thresholds", cfg.weight_rule.thresholds);
        cfg.weight_rule.weights = j["weight_rule"].value("weights", cfg.weight_rule.weights);
    }
    if (j.contains("profile")) {
        const json& p = j["profile"];
        cfg.profile.base_rate = p.value("base_rate", cfg.profile.base_rate);
        cfg.profile.noise_sigma = p.value("noise_sigma", cfg.profile.noise_sigma);
        for (int i = 0; i < 2; ++i) {
            if (p.contains("peak_slots")) cfg.profile.peak_slots[i] = p["peak_slots"].at(i);
            if (p.contains("peak_widths")) cfg.profile.peak_widths[i] = p["peak_widths"].at(i);
            if (p.contains("peak_gains")) cfg.profile.peak_gains[i] = p["peak_gains"].at(i);
        }
        if (p.contains("attraction")) {
            for (auto cls : {CapacityClass::Large, CapacityClass::Medium, CapacityClass::Small}) {
                if (p["attraction"].contains(to_string(cls)))
                    cfg.profile.attraction[cls] = p["attraction"][to_string(cls)];
            }
        }
    }
}

// Shared per-subcommand options; each flag overrides the config key of the
// same name.
struct CommonOpts {
    std::string config_path;

    void attach(CLI::App* cmd, RunConfig& cfg, bool with_sim = true) {
        cmd->add_option("--config", config_path, "JSON config file; flags override its keys")
            ->check(CLI::ExistingFile);
        cmd->add_option("--topology", cfg.topology, "topology JSON file");
        cmd->add_option("--out-dir", cfg.out_dir,
                        "output directory (default from TCRISK_OUT_DIR or 'out')");
        if (with_sim) {
            cmd->add_option("--days", cfg.days, "simulated operating days (64 slots each)");
            cmd->add_option("--seed", cfg.seed, "simulation RNG seed");
            cmd->add_option("--transfer-penalty", cfg.transfer_penalty,
                            "routing cost per line change, section-equivalents");
            cmd->add_option("--base-rate", cfg.profile.base_rate,
                            "demand scale per OD pair, persons/hour");
            cmd->add_option("--noise-sigma", cfg.profile.noise_sigma,
                            "lognormal demand noise sigma (dimensionless)");
        }
        cmd->add_option("--horizon", cfg.horizon, "prediction horizon, 15-minute slots");
        cmd->add_option("--fitter", cfg.fitter, "parameter fitter: mle or nnls")
            ->check(CLI::IsMember({"mle", "nnls"}));
        cmd->add_option("--sw-scale", cfg.sw_scale,
                        "scale applied to stranded dissipation time (hours) before the logistic");
        cmd->add_option("--logistic-a", cfg.logistic.a, "logistic slope a (per saturation unit)");
        cmd->add_option("--logistic-b", cfg.logistic.b, "logistic offset b (dimensionless)");
        cmd->add_option("--train-ref", cfg.train_ref, "reference training sample count");
        cmd->add_option("--test-ref", cfg.test_ref, "reference test sample count");
    }

    // Config file first, then reapply parsed flags by re-reading argv is
    // avoided: CLI11 already wrote flag values into cfg, so the config must
    // be applied before parse. We therefore pre-scan argv for --config.
};

std::string prescan_config(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") return argv[i + 1];
    }
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a.rfind("--config=", 0) == 0) return a.substr(9);
    }
    return {};
}

std::filesystem::path ensure_out_dir(const RunConfig& cfg) {
    std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

Network load_topology(const RunConfig& cfg) {
    if (cfg.topology.empty())
        throw Error("no topology file given (set --topology or the 'topology' config key)");
    return load_network(cfg.topology);
}

struct TrainedScheme {
    Scheme scheme;
    GBNModel model;
};

TrainedScheme train_scheme(const Network& net, const RunConfig& cfg, const std::string& scheme) {
    Scheme sch = scheme_from_string(scheme);
    if (sch == Scheme::AR) throw Error("train: AR has no persisted model; use evaluate");
    auto flows = run_simulation(net, cfg.sim());
    auto risks = assess_series(flows, net, cfg.risk());
    auto sats = saturation_series(flows, net);
    BNStructure s = build_structure(net, sch == Scheme::GBN2 ? 2 : 1);
    SupervisedDataset ds = make_supervised(s, risks, sats, sch, cfg.horizon);
    auto [n_train, n_test] = scaled_split_counts(ds.size(), cfg.train_ref, cfg.test_ref);
    auto [train, test] = split(ds, n_train, n_test);
    GBNModel model = cfg.fitter == "nnls" ? fit_nnls(s, train.matrix) : fit_mle(s, train.matrix);
    return {sch, std::move(model)};
}

int cmd_gen_fixture(const RunConfig& cfg, const std::string& scale, std::string out_path) {
    Network net = scale == "toy" ? make_toy_network() : make_chongqing_network();
    if (out_path.empty()) out_path = (ensure_out_dir(cfg) / (scale + "_topology.json")).string();
    save_network(net, out_path);
    std::cout << "wrote " << out_path << " (" << net.stations.size() << " stations, "
              << net.sections.size() << " sections, " << net.lines.size() << " lines)\n";
    return kExitOk;
}

int cmd_simulate(const RunConfig& cfg) {
    Network net = load_topology(cfg);
    auto flows = run_simulation(net, cfg.sim());
    auto path = ensure_out_dir(cfg) / "flows.csv";
    write_flows_csv(flows, path.string());
    std::cout << "wrote " << path.string() << " (" << flows.size() << " slots)\n";
    return kExitOk;
}

int cmd_assess(const RunConfig& cfg, const std::string& flows_path) {
    Network net = load_topology(cfg);
    std::vector<FlowSnapshot> flows;
    if (!flows_path.empty()) {
        flows = read_flows_csv(flows_path);
    } else {
        flows = run_simulation(net, cfg.sim());
    }
    auto risks = assess_series(flows, net, cfg.risk());
    auto path = ensure_out_dir(cfg) / "risks.csv";
    write_risks_csv(risks, path.string());
    std::cout << "wrote " << path.string() << " (" << risks.size() << " slots)\n";
    return kExitOk;
}

int cmd_train(const RunConfig& cfg, const std::string& scheme) {
    Network net = load_topology(cfg);
    TrainedScheme trained = train_scheme(net, cfg, scheme);
    std::string name = std::string("model_") +
                       (trained.scheme == Scheme::GBN2 ? "gbn2" : "gbn1") + ".json";
    auto path = ensure_out_dir(cfg) / name;
    save_model(trained.model, path.string());
    std::cout << "wrote " << path.string() << '\n';
    return kExitOk;
}

int cmd_predict(const RunConfig& cfg, const std::string& model_path) {
    Network net = load_topology(cfg);
    GBNModel model = load_model(model_path);
    int lags = 1;
    for (const auto& n : model.structure.nodes) lags = std::max(lags, n.lag + 1);
    Scheme sch = lags == 2 ? Scheme::GBN2 : Scheme::GBN1;

    auto flows = run_simulation(net, cfg.sim());
    auto risks = assess_series(flows, net, cfg.risk());
    auto sats = saturation_series(flows, net);
    SupervisedDataset ds = make_supervised(model.structure, risks, sats, sch, cfg.horizon);
    auto [n_train, n_test] = scaled_split_counts(ds.size(), cfg.train_ref, cfg.test_ref);
    auto [train, test] = split(ds, n_train, n_test);

    int rn = model.structure.node_index("RN");
    auto path = ensure_out_dir(cfg) / "predictions.csv";
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "slot,true_rn,pred_rn\n";
    char buf[64];
    for (long r = 0; r < test.size(); ++r) {
        std::map<std::string, double> evidence;
        for (std::size_t n = 0; n < model.structure.nodes.size(); ++n) {
            if (model.structure.is_root(static_cast<int>(n)))
                evidence[model.structure.nodes[n].name] =
                    test.matrix.values(r, static_cast<long>(n));
        }
        Eigen::VectorXd mean = predict_mean(model, evidence);
        std::snprintf(buf, sizeof buf, "%.6f,%.6f", test.matrix.values(r, rn), mean(rn));
        out << test.target_slots[static_cast<std::size_t>(r)] << ',' << buf << '\n';
    }
    std::cout << "wrote " << path.string() << " (" << test.size() << " test samples, "
              << to_string(sch) << ")\n";
    return kExitOk;
}

int cmd_evaluate(const RunConfig& cfg) {
    Network net = load_topology(cfg);
    ExperimentArtifacts art = run_experiment(net, cfg.sim(), cfg.experiment());
    auto dir = ensure_out_dir(cfg);
    write_report_json(art.report, (dir / "report.json").string());
    write_report_csv(art.report, (dir / "report.csv").string());
    std::cout << "wrote " << (dir / "report.json").string() << " and report.csv\n";
    for (const auto& [scheme, res] : art.report.schemes)
        std::cout << "  " << scheme << " global WMAPE " << res.wmape.at("global") << '\n';
    return kExitOk;
}

int cmd_pipeline(const RunConfig& cfg) {
    Network net = load_topology(cfg);
    auto dir = ensure_out_dir(cfg);
    ExperimentArtifacts art = run_experiment(net, cfg.sim(), cfg.experiment());
    write_flows_csv(art.flows, (dir / "flows.csv").string());
    write_risks_csv(art.risks, (dir / "risks.csv").string());
    save_model(art.gbn1, (dir / "model_gbn1.json").string());
    save_model(art.gbn2, (dir / "model_gbn2.json").string());
    write_report_json(art.report, (dir / "report.json").string());
    write_report_csv(art.report, (dir / "report.csv").string());
    write_plot_csv(art.report, (dir / "plot.csv").string());
    std::cout << "pipeline complete; artifacts in " << dir.string() << '\n';
    for (const auto& [scheme, res] : art.report.schemes)
        std::cout << "  " << scheme << " global WMAPE " << res.wmape.at("global") << '\n';
    return kExitOk;
}

int cmd_inspect(const std::string& model_path, const std::string& node) {
    GBNModel model = load_model(model_path);
    const BNStructure& s = model.structure;
    auto it = s.index.find(node);
    if (it == s.index.end()) {
        std::ostringstream msg;
        msg << "unknown node '" << node << "'";
        std::vector<std::string> close;
        for (const auto& [name, idx] : s.index) {
            if (name.find(node) != std::string::npos) close.push_back(name);
        }
        if (!close.empty()) {
            msg << "; near matches:";
            for (std::size_t i = 0; i < close.size() && i < 10; ++i) msg << ' ' << close[i];
        }
        throw ValidationError({msg.str()});
    }
    int n = it->second;
    if (s.is_root(n)) {
        std::cout << "root node: no CPD, sample mean/variance shown\n";
        std::cout << node << "  mean " << model.root_mean[static_cast<std::size_t>(n)]
                  << "  variance " << model.root_var[static_cast<std::size_t>(n)] << '\n';
        return kExitOk;
    }
    const auto& cpd = *model.cpds[static_cast<std::size_t>(n)];
    std::cout << "node " << node << "  beta0 " << cpd.beta0 << "  sigma2 " << cpd.sigma2 << '\n';
    std::vector<std::pair<double, std::string>> rows;
    for (std::size_t i = 0; i < cpd.parent_order.size(); ++i)
        rows.emplace_back(cpd.beta(static_cast<long>(i)),
                          s.nodes[static_cast<std::size_t>(cpd.parent_order[i])].name);
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& [coef, name] : rows) std::cout << "  " << name << "  " << coef << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tcrisk: rail transit transport-capacity risk simulation and prediction"};
    app.require_subcommand(1);

    RunConfig cfg;
    if (const char* env = std::getenv("TCRISK_OUT_DIR")) cfg.out_dir = env;

    std::string config_path = prescan_config(argc, argv);
    try {
        if (!config_path.empty()) apply_config_file(cfg, config_path);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    }

    CommonOpts common;
    std::string scale = "toy", out_path, flows_path, scheme = "gbn1", model_path, node;

    auto* gen = app.add_subcommand("gen-fixture", "write a generated topology file");
    gen->add_option("--scale", scale, "fixture scale")->check(CLI::IsMember({"toy", "chongqing"}));
    gen->add_option("--out", out_path, "output path (default <out-dir>/<scale>_topology.json)");
    common.attach(gen, cfg, false);

    auto* sim = app.add_subcommand("simulate", "run the seeded flow simulation, write flows.csv");
    common.attach(sim, cfg);

    auto* assess_cmd = app.add_subcommand("assess", "compute risk series, write risks.csv");
    assess_cmd->add_option("--flows", flows_path,
                           "flows CSV to assess (default: simulate in-process)");
    common.attach(assess_cmd, cfg);

    auto* train = app.add_subcommand("train", "fit a GBN model on the training split");
    train->add_option("--scheme", scheme, "gbn1 (inputs at t) or gbn2 (t and t-dt)")
        ->check(CLI::IsMember({"gbn1", "gbn2"}));
    common.attach(train, cfg);

    auto* predict = app.add_subcommand("predict", "predict test-split global risk with a model");
    predict->add_option("--model", model_path, "model JSON file")->required();
    common.attach(predict, cfg);

    auto* evaluate =
        app.add_subcommand("evaluate", "run the AR/GBN1/GBN2 comparison, write the report");
    common.attach(evaluate, cfg);

    auto* pipeline = app.add_subcommand("pipeline", "simulate, assess, train, predict, report");
    common.attach(pipeline, cfg);

    auto* inspect = app.add_subcommand("inspect", "print one node's fitted CPD");
    inspect->add_option("--model", model_path, "model JSON file")->required();
    inspect->add_option("--node", node, "node name, e.g. RL:line03 or RS:t01")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) return cmd_gen_fixture(cfg, scale, out_path);
        if (sim->parsed()) return cmd_simulate(cfg);
        if (assess_cmd->parsed()) return cmd_assess(cfg, flows_path);
        if (train->parsed()) return cmd_train(cfg, scheme);
        if (predict->parsed()) return cmd_predict(cfg, model_path);
        if (evaluate->parsed()) return cmd_evaluate(cfg);
        if (pipeline->parsed()) return cmd_pipeline(cfg);
        if (inspect->parsed()) return cmd_inspect(model_path, node);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
