#include "tcrisk/predict.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "json.hpp"

namespace tcrisk {

const char* to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::AR: return "AR";
        case Scheme::GBN1: return "GBN1";
        case Scheme::GBN2: return "GBN2";
    }
    return "?";
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "AR" || s == "ar") return Scheme::AR;
    if (s == "GBN1" || s == "gbn1") return Scheme::GBN1;
    if (s == "GBN2" || s == "gbn2") return Scheme::GBN2;
    throw Error("unknown scheme: " + s);
}

const char* to_string(Fitter f) { return f == Fitter::MLE ? "mle" : "nnls"; }

Fitter fitter_from_string(const std::string& s) {
    if (s == "mle") return Fitter::MLE;
    if (s == "nnls") return Fitter::NNLS;
    throw Error("unknown fitter: " + s + " (expected mle or nnls)");
}

namespace {

void check_alignment(const std::vector<RiskSnapshot>& risks,
                     const std::vector<SaturationSnapshot>& sats) {
    if (risks.size() != sats.size())
        throw Error("make_supervised: risk and saturation series lengths differ");
    for (std::size_t i = 0; i < risks.size(); ++i) {
        if (risks[i].slot_index != sats[i].slot_index)
            throw Error("make_supervised: slot misalignment at position " + std::to_string(i));
    }
}

// Sample windows must not cross an operating-day boundary.
bool window_in_one_day(std::int64_t earliest, std::int64_t target) {
    return earliest / kSlotsPerDay == target / kSlotsPerDay;
}

double feature_value(const SaturationSnapshot& sat, const BNNode& node) {
    if (node.name.rfind("SS:", 0) == 0) return sat.ss.at(node.entity);
    if (node.name.rfind("SW:", 0) == 0) return sat.sw.at(node.entity);
    if (node.name.rfind("SI:", 0) == 0) return sat.si.at(node.entity);
    throw Error("unexpected feature node: " + node.name);
}

double risk_value(const RiskSnapshot& risk, const BNNode& node) {
    switch (node.level) {
        case NodeLevel::StationRisk: return risk.rs.at(node.entity);
        case NodeLevel::SectionRisk: return risk.ri.at(node.entity);
        case NodeLevel::LineRisk: return risk.rl.at(node.entity);
        case NodeLevel::GlobalRisk: return risk.rn;
        case NodeLevel::Feature: break;
    }
    throw Error("unexpected risk node: " + node.name);
}

}  // namespace

SupervisedDataset make_supervised(const BNStructure& structure,
                                  const std::vector<RiskSnapshot>& risks,
                                  const std::vector<SaturationSnapshot>& sats, Scheme scheme,
                                  int horizon) {
    if (scheme == Scheme::AR) throw Error("make_supervised: AR takes no structure");
    if (horizon < 1) throw Error("make_supervised: horizon must be >= 1");
    check_alignment(risks, sats);
    int max_lag = 0;
    for (const auto& node : structure.nodes) max_lag = std::max(max_lag, node.lag);
    if ((scheme == Scheme::GBN2) != (max_lag == 1))
        throw Error("make_supervised: structure lags do not match the scheme");

    std::vector<long> rows;
    for (long t = max_lag; t + horizon < static_cast<long>(risks.size()); ++t) {
        std::int64_t slot = risks[static_cast<std::size_t>(t)].slot_index;
        std::int64_t target = risks[static_cast<std::size_t>(t + horizon)].slot_index;
        if (window_in_one_day(slot - max_lag, target)) rows.push_back(t);
    }
    if (rows.empty()) throw Error("make_supervised: every sample window crosses a day boundary");

    SupervisedDataset ds;
    ds.scheme = scheme;
    ds.horizon = horizon;
    ds.matrix.values.resize(static_cast<long>(rows.size()),
                            static_cast<long>(structure.nodes.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        long t = rows[r];
        ds.target_slots.push_back(risks[static_cast<std::size_t>(t + horizon)].slot_index);
        for (std::size_t n = 0; n < structure.nodes.size(); ++n) {
            const BNNode& node = structure.nodes[n];
            double v = node.level == NodeLevel::Feature
                           ? feature_value(sats[static_cast<std::size_t>(t - node.lag)], node)
                           : risk_value(risks[static_cast<std::size_t>(t + horizon)], node);
            ds.matrix.values(static_cast<long>(r), static_cast<long>(n)) = v;
        }
    }
    return ds;
}

SupervisedDataset make_supervised(const std::vector<RiskSnapshot>& risks, int horizon) {
    if (horizon < 1) throw Error("make_supervised: horizon must be >= 1");
    if (risks.empty()) throw Error("make_supervised: empty risk series");

    SupervisedDataset ds;
    ds.scheme = Scheme::AR;
    ds.horizon = horizon;
    for (const auto& [lid, v] : risks.front().rl) ds.ar_nodes.push_back("RL:" + lid);
    ds.ar_nodes.push_back("RN");

    std::vector<long> rows;
    for (long t = 1; t + horizon < static_cast<long>(risks.size()); ++t) {
        if (window_in_one_day(risks[static_cast<std::size_t>(t)].slot_index - 1,
                              risks[static_cast<std::size_t>(t + horizon)].slot_index))
            rows.push_back(t);
    }
    if (rows.empty()) throw Error("make_supervised: every sample window crosses a day boundary");

    const long n = static_cast<long>(ds.ar_nodes.size());
    ds.ar_y.resize(static_cast<long>(rows.size()), n);
    ds.ar_y1.resize(static_cast<long>(rows.size()), n);
    ds.ar_target.resize(static_cast<long>(rows.size()), n);
    auto value = [&](const RiskSnapshot& r, long col) {
        return col + 1 == n ? r.rn : r.rl.at(ds.ar_nodes[static_cast<std::size_t>(col)].substr(3));
    };
    for (std::size_t r = 0; r < rows.size(); ++r) {
        long t = rows[r];
        ds.target_slots.push_back(risks[static_cast<std::size_t>(t + horizon)].slot_index);
        for (long c = 0; c < n; ++c) {
            ds.ar_y(static_cast<long>(r), c) = value(risks[static_cast<std::size_t>(t)], c);
            ds.ar_y1(static_cast<long>(r), c) = value(risks[static_cast<std::size_t>(t - 1)], c);
            ds.ar_target(static_cast<long>(r), c) =
                value(risks[static_cast<std::size_t>(t + horizon)], c);
        }
    }
    return ds;
}

std::pair<long, long> scaled_split_counts(long available, long train_ref, long test_ref) {
    if (available >= train_ref + test_ref) return {train_ref, test_ref};
    long train = available * train_ref / (train_ref + test_ref);
    return {train, available - train};
}

namespace {

SupervisedDataset slice(const SupervisedDataset& ds, long begin, long count) {
    SupervisedDataset out;
    out.scheme = ds.scheme;
    out.horizon = ds.horizon;
    out.ar_nodes = ds.ar_nodes;
    out.target_slots.assign(ds.target_slots.begin() + begin,
                            ds.target_slots.begin() + begin + count);
    if (ds.matrix.values.size() > 0)
        out.matrix.values = ds.matrix.values.middleRows(begin, count);
    if (ds.ar_y.size() > 0) {
        out.ar_y = ds.ar_y.middleRows(begin, count);
        out.ar_y1 = ds.ar_y1.middleRows(begin, count);
        out.ar_target = ds.ar_target.middleRows(begin, count);
    }
    return out;
}

}  // namespace

std::pair<SupervisedDataset, SupervisedDataset> split(const SupervisedDataset& dataset,
                                                      long train_count, long test_count) {
    if (train_count < 1 || test_count < 1)
        throw Error("split: train and test must both be non-empty");
    if (train_count + test_count > dataset.size())
        throw Error("split: requested " + std::to_string(train_count + test_count) +
                    " samples from a dataset of " + std::to_string(dataset.size()));
    return {slice(dataset, 0, train_count),
            slice(dataset, dataset.size() - test_count, test_count)};
}

double ARModel::predict(int node, double y_t, double y_tm1) const {
    return coeffs(0, node) + coeffs(1, node) * y_t + coeffs(2, node) * y_tm1;
}

ARModel fit_ar(const SupervisedDataset& train, const FitOptions& options) {
    if (train.scheme != Scheme::AR) throw Error("fit_ar: dataset is not an AR dataset");
    const long M = train.size();
    if (M < 4) throw Error("fit_ar: need at least 4 samples");
    ARModel model;
    model.nodes = train.ar_nodes;
    model.coeffs.resize(3, static_cast<long>(train.ar_nodes.size()));
    for (long c = 0; c < static_cast<long>(train.ar_nodes.size()); ++c) {
        Eigen::MatrixXd X(M, 2);
        X.col(0) = train.ar_y.col(c);
        X.col(1) = train.ar_y1.col(c);
        Eigen::VectorXd y = train.ar_target.col(c);
        Eigen::RowVector2d mu_x = X.colwise().mean();
        double mu_y = y.mean();
        Eigen::MatrixXd Xc = X.rowwise() - mu_x;
        Eigen::VectorXd yc = y.array() - mu_y;
        Eigen::Matrix2d sxx = (Xc.transpose() * Xc) / static_cast<double>(M);
        Eigen::Vector2d sxy = (Xc.transpose() * yc) / static_cast<double>(M);
        // Same scale-aware ridge floor as the GBN node fits: a near-constant
        // series leaves the trace degenerate.
        double trace = sxx.trace();
        double floor = 1.0 + mu_x.squaredNorm() / 2.0;
        double ridge = options.ridge_scale * std::max(trace / 2.0, floor);
        sxx.diagonal().array() += ridge;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(sxx, Eigen::EigenvaluesOnly);
        double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
        if (!(lo > 0) || hi / lo > options.condition_threshold)
            throw Error("fit_ar: singular design for node " + train.ar_nodes[static_cast<std::size_t>(c)]);
        Eigen::Vector2d beta = sxx.ldlt().solve(sxy);
        model.coeffs(0, c) = mu_y - beta.dot(mu_x.transpose());
        model.coeffs(1, c) = beta(0);
        model.coeffs(2, c) = beta(1);
    }
    return model;
}

double mape(const std::vector<double>& y, const std::vector<double>& yhat) {
    if (y.size() != yhat.size()) throw Error("mape: length mismatch");
    if (y.empty()) throw Error("mape: empty series");
    double sum = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] == 0) throw Error("mape: zero target at position " + std::to_string(i));
        sum += std::abs(y[i] - yhat[i]) / std::abs(y[i]);
    }
    return sum / static_cast<double>(y.size());
}

double wmape(const std::vector<double>& y, const std::vector<double>& yhat) {
    if (y.size() != yhat.size()) throw Error("wmape: length mismatch");
    if (y.empty()) throw Error("wmape: empty series");
    double num = 0, den = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        num += std::abs(y[i] - yhat[i]);
        den += y[i];
    }
    if (!(den > 0)) throw Error("wmape: target series sums to zero");
    return num / den;
}

namespace {

// Predicted and true values for every report target, per test sample.
struct TargetSeries {
    std::map<std::string, std::vector<double>> truth, pred;
    std::vector<std::int64_t> slots;
};

std::string target_key(const std::string& node_name) {
    if (node_name == "RN") return "global";
    return node_name.substr(3);  // strip "RL:"
}

TargetSeries evaluate_gbn(const GBNModel& model, const SupervisedDataset& test) {
    const auto& s = model.structure;
    TargetSeries out;
    out.slots = test.target_slots;
    std::vector<std::size_t> target_nodes;
    for (std::size_t n = 0; n < s.nodes.size(); ++n) {
        if (s.nodes[n].level == NodeLevel::LineRisk || s.nodes[n].level == NodeLevel::GlobalRisk)
            target_nodes.push_back(n);
    }
    for (long r = 0; r < test.size(); ++r) {
        std::map<std::string, double> evidence;
        for (std::size_t n = 0; n < s.nodes.size(); ++n) {
            if (s.is_root(static_cast<int>(n)))
                evidence[s.nodes[n].name] = test.matrix.values(r, static_cast<long>(n));
        }
        Eigen::VectorXd mean = predict_mean(model, evidence);
        for (std::size_t n : target_nodes) {
            std::string key = target_key(s.nodes[n].name);
            out.truth[key].push_back(test.matrix.values(r, static_cast<long>(n)));
            out.pred[key].push_back(mean(static_cast<long>(n)));
        }
    }
    return out;
}

TargetSeries evaluate_ar(const ARModel& model, const SupervisedDataset& test) {
    TargetSeries out;
    out.slots = test.target_slots;
    for (std::size_t c = 0; c < model.nodes.size(); ++c) {
        std::string key = target_key(model.nodes[c]);
        for (long r = 0; r < test.size(); ++r) {
            out.truth[key].push_back(test.ar_target(r, static_cast<long>(c)));
            out.pred[key].push_back(
                model.predict(static_cast<int>(c), test.ar_y(r, static_cast<long>(c)),
                              test.ar_y1(r, static_cast<long>(c))));
        }
    }
    return out;
}

// Restricts a series to the given target slots so every scheme is scored on
// an identical evaluation window (schemes lose different rows to lag windows
// at day boundaries).
TargetSeries restrict_to(const TargetSeries& series, const std::set<std::int64_t>& slots) {
    TargetSeries out;
    for (std::size_t i = 0; i < series.slots.size(); ++i) {
        if (!slots.count(series.slots[i])) continue;
        out.slots.push_back(series.slots[i]);
        for (const auto& [key, truth] : series.truth) {
            out.truth[key].push_back(truth[i]);
            out.pred[key].push_back(series.pred.at(key)[i]);
        }
    }
    return out;
}

SchemeResult score(const TargetSeries& series, long train_count) {
    SchemeResult res;
    res.train_count = train_count;
    res.test_count = static_cast<long>(series.slots.size());
    for (const auto& [key, truth] : series.truth) {
        res.wmape[key] = wmape(truth, series.pred.at(key));
        res.mape[key] = mape(truth, series.pred.at(key));
    }
    return res;
}

}  // namespace

ExperimentArtifacts run_experiment(const Network& net, const SimulationConfig& sim,
                                   const ExperimentConfig& config) {
    ExperimentArtifacts art;
    art.flows = run_simulation(net, sim);
    art.risks = assess_series(art.flows, net, config.risk);
    std::vector<SaturationSnapshot> sats = saturation_series(art.flows, net);

    BNStructure s1 = build_structure(net, 1);
    BNStructure s2 = build_structure(net, 2);
    SupervisedDataset ds1 = make_supervised(s1, art.risks, sats, Scheme::GBN1, config.horizon);
    SupervisedDataset ds2 = make_supervised(s2, art.risks, sats, Scheme::GBN2, config.horizon);
    SupervisedDataset dsar = make_supervised(art.risks, config.horizon);

    auto fit_gbn = [&](const BNStructure& s, const SupervisedDataset& train) {
        return config.fitter == Fitter::MLE ? fit_mle(s, train.matrix, config.fit)
                                            : fit_nnls(s, train.matrix, config.fit);
    };

    PredictionReport& report = art.report;
    for (const auto& [lid, line] : net.lines) report.targets.push_back(lid);
    report.targets.push_back("global");

    std::map<std::string, TargetSeries> series;
    std::map<std::string, long> train_counts;
    {
        auto [n_train, n_test] = scaled_split_counts(ds1.size(), config.train_ref, config.test_ref);
        auto [train, test] = split(ds1, n_train, n_test);
        art.gbn1 = fit_gbn(s1, train);
        series["GBN1"] = evaluate_gbn(art.gbn1, test);
        train_counts["GBN1"] = n_train;
    }
    {
        auto [n_train, n_test] = scaled_split_counts(ds2.size(), config.train_ref, config.test_ref);
        auto [train, test] = split(ds2, n_train, n_test);
        art.gbn2 = fit_gbn(s2, train);
        series["GBN2"] = evaluate_gbn(art.gbn2, test);
        train_counts["GBN2"] = n_train;
    }
    {
        auto [n_train, n_test] =
            scaled_split_counts(dsar.size(), config.train_ref, config.test_ref);
        auto [train, test] = split(dsar, n_train, n_test);
        ARModel ar = fit_ar(train, config.fit);
        series["AR"] = evaluate_ar(ar, test);
        train_counts["AR"] = n_train;
    }

    // Score every scheme on the intersection of test target slots.
    std::set<std::int64_t> common;
    bool first = true;
    for (const auto& [scheme, ts] : series) {
        std::set<std::int64_t> own(ts.slots.begin(), ts.slots.end());
        if (first) {
            common = std::move(own);
            first = false;
        } else {
            std::set<std::int64_t> merged;
            std::set_intersection(common.begin(), common.end(), own.begin(), own.end(),
                                  std::inserter(merged, merged.begin()));
            common = std::move(merged);
        }
    }
    for (auto& [scheme, ts] : series) {
        ts = restrict_to(ts, common);
        report.schemes[scheme] = score(ts, train_counts[scheme]);
    }

    // Global-risk plot data on each scheme's test window.
    for (const auto& [scheme, ts] : series) {
        const auto& truth = ts.truth.at("global");
        const auto& pred = ts.pred.at("global");
        for (std::size_t i = 0; i < ts.slots.size(); ++i) {
            auto& entry = report.global_plot[ts.slots[i]];
            entry.first = truth[i];
            entry.second[scheme] = pred[i];
        }
    }

    nlohmann::json echo;
    echo["days"] = sim.days;
    echo["seed"] = sim.seed;
    echo["transfer_penalty"] = sim.transfer_penalty;
    echo["profile"] = {{"base_rate", sim.profile.base_rate},
                       {"peak_slots", {sim.profile.peak_slots[0], sim.profile.peak_slots[1]}},
                       {"peak_widths", {sim.profile.peak_widths[0], sim.profile.peak_widths[1]}},
                       {"peak_gains", {sim.profile.peak_gains[0], sim.profile.peak_gains[1]}},
                       {"noise_sigma", sim.profile.noise_sigma}};
    echo["fitter"] = to_string(config.fitter);
    echo["horizon"] = config.horizon;
    echo["train_ref"] = config.train_ref;
    echo["test_ref"] = config.test_ref;
    echo["logistic"] = {{"a", config.risk.logistic.a}, {"b", config.risk.logistic.b}};
    echo["weight_thresholds"] = config.risk.rule.thresholds;
    echo["weights"] = config.risk.rule.weights;
    echo["sw_scale"] = config.risk.sw_scale;
    report.config_echo = echo.dump();
    return art;
}

std::string report_to_json(const PredictionReport& report) {
    nlohmann::json j;
    j["targets"] = report.targets;
    for (const auto& [scheme, res] : report.schemes) {
        nlohmann::json js;
        js["train_count"] = res.train_count;
        js["test_count"] = res.test_count;
        js["wmape"] = res.wmape;
        js["mape"] = res.mape;
        j["schemes"][scheme] = js;
    }
    if (!report.config_echo.empty()) j["config"] = nlohmann::json::parse(report.config_echo);
    return j.dump(2) + "\n";
}

void write_report_json(const PredictionReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write report: " + path);
    out << report_to_json(report);
}

void write_report_csv(const PredictionReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write report: " + path);
    out << "target,scheme,wmape,mape\n";
    char buf[64];
    for (const auto& target : report.targets) {
        for (const auto& [scheme, res] : report.schemes) {
            std::snprintf(buf, sizeof buf, "%.6f,%.6f", res.wmape.at(target),
                          res.mape.at(target));
            out << target << ',' << scheme << ',' << buf << '\n';
        }
    }
}

void write_plot_csv(const PredictionReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write plot data: " + path);
    std::vector<std::string> schemes;
    for (const auto& [scheme, res] : report.schemes) schemes.push_back(scheme);
    out << "slot,true_rn";
    for (const auto& s : schemes) out << ",pred_" << s;
    out << '\n';
    char buf[32];
    for (const auto& [slot, entry] : report.global_plot) {
        std::snprintf(buf, sizeof buf, "%.6f", entry.first);
        out << slot << ',' << buf;
        for (const auto& s : schemes) {
            auto it = entry.second.find(s);
            if (it == entry.second.end()) {
                out << ',';
            } else {
                std::snprintf(buf, sizeof buf, ",%.6f", it->second);
                out << buf;
            }
        }
        out << '\n';
    }
}

}  // namespace tcrisk
