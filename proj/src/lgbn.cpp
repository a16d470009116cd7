#include "tcrisk/lgbn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tcrisk/nnls.hpp"

namespace tcrisk {

const char* to_string(NodeLevel level) {
    switch (level) {
        case NodeLevel::Feature: return "feature";
        case NodeLevel::StationRisk: return "station_risk";
        case NodeLevel::SectionRisk: return "section_risk";
        case NodeLevel::LineRisk: return "line_risk";
        case NodeLevel::GlobalRisk: return "global_risk";
    }
    return "?";
}

NodeLevel node_level_from_string(const std::string& s) {
    if (s == "feature") return NodeLevel::Feature;
    if (s == "station_risk") return NodeLevel::StationRisk;
    if (s == "section_risk") return NodeLevel::SectionRisk;
    if (s == "line_risk") return NodeLevel::LineRisk;
    if (s == "global_risk") return NodeLevel::GlobalRisk;
    throw ParseError("unknown node level: " + s);
}

int BNStructure::node_index(const std::string& name) const {
    auto it = index.find(name);
    if (it == index.end()) throw Error("unknown BN node: " + name);
    return it->second;
}

void BNStructure::check() const {
    if (parents.size() != nodes.size() || index.size() != nodes.size())
        throw Error("BN structure: inconsistent sizes");
    for (std::size_t n = 0; n < nodes.size(); ++n) {
        if (index.at(nodes[n].name) != static_cast<int>(n))
            throw Error("BN structure: bad index for " + nodes[n].name);
        for (int p : parents[n]) {
            if (p < 0 || p >= static_cast<int>(n))
                throw Error("BN structure: node " + nodes[n].name +
                            " has a parent outside topological order");
        }
    }
}

namespace {

std::string lag_suffix(int lag) { return lag == 0 ? "@t" : "@t-" + std::to_string(lag); }

}  // namespace

BNStructure build_structure(const Network& net, int lags) {
    if (lags != 1 && lags != 2) throw Error("build_structure: lags must be 1 or 2");
    BNStructure s;
    auto add = [&](const std::string& name, NodeLevel level, int lag, const std::string& entity,
                   std::vector<int> parent_idx) {
        s.index[name] = static_cast<int>(s.nodes.size());
        s.nodes.push_back({name, level, lag, entity});
        s.parents.push_back(std::move(parent_idx));
        return s.index[name];
    };

    for (int lag = 0; lag < lags; ++lag) {
        for (const auto& [id, st] : net.stations) {
            add("SS:" + id + lag_suffix(lag), NodeLevel::Feature, lag, id, {});
            add("SW:" + id + lag_suffix(lag), NodeLevel::Feature, lag, id, {});
        }
        for (const auto& [id, sec] : net.sections)
            add("SI:" + id + lag_suffix(lag), NodeLevel::Feature, lag, id, {});
    }

    for (const auto& [id, st] : net.stations) {
        std::vector<int> par;
        for (int lag = 0; lag < lags; ++lag) {
            par.push_back(s.node_index("SS:" + id + lag_suffix(lag)));
            par.push_back(s.node_index("SW:" + id + lag_suffix(lag)));
        }
        add("RS:" + id, NodeLevel::StationRisk, 0, id, std::move(par));
    }
    for (const auto& [id, sec] : net.sections) {
        std::vector<int> par;
        for (int lag = 0; lag < lags; ++lag)
            par.push_back(s.node_index("SI:" + id + lag_suffix(lag)));
        add("RI:" + id, NodeLevel::SectionRisk, 0, id, std::move(par));
    }
    for (const auto& [lid, line] : net.lines) {
        std::vector<int> par;
        std::set<std::string> seen;
        for (const auto& sid : line.station_sequence) {
            if (seen.insert(sid).second) par.push_back(s.node_index("RS:" + sid));
        }
        for (const auto& sid : net.line_sections(lid)) par.push_back(s.node_index("RI:" + sid));
        add("RL:" + lid, NodeLevel::LineRisk, 0, lid, std::move(par));
    }
    {
        std::vector<int> par;
        for (const auto& [lid, line] : net.lines) par.push_back(s.node_index("RL:" + lid));
        add("RN", NodeLevel::GlobalRisk, 0, "", std::move(par));
    }
    s.check();
    return s;
}

namespace {

struct NodeMoments {
    Eigen::VectorXd mu_x;
    Eigen::MatrixXd sxx;  ///< regularized parent covariance
    Eigen::VectorXd sxy;
    double mu_y = 0, syy = 0;
    double ridge = 0;
};

NodeMoments node_moments(const TrainingMatrix& data, const std::vector<int>& parents, int node,
                         const FitOptions& options, const std::string& name) {
    const auto M = data.values.rows();
    const int k = static_cast<int>(parents.size());
    if (M < k + 2)
        throw Error("fit: node " + name + " needs at least " + std::to_string(k + 2) +
                    " samples, got " + std::to_string(M));

    NodeMoments m;
    Eigen::MatrixXd X(M, k);
    for (int i = 0; i < k; ++i) X.col(i) = data.values.col(parents[i]);
    Eigen::VectorXd y = data.values.col(node);

    m.mu_x = X.colwise().mean();
    m.mu_y = y.mean();
    Eigen::MatrixXd Xc = X.rowwise() - m.mu_x.transpose();
    Eigen::VectorXd yc = y.array() - m.mu_y;
    m.sxx = (Xc.transpose() * Xc) / static_cast<double>(M);
    m.sxy = (Xc.transpose() * yc) / static_cast<double>(M);
    m.syy = yc.squaredNorm() / static_cast<double>(M);
    // Near-constant parents (a capacity-clipped saturation barely moves, a
    // never-loaded section does not move at all) make the covariance trace
    // collapse, so a purely trace-relative ridge no longer stabilizes the
    // solve and tiny correlated residuals produce enormous coefficients.
    // Floor the ridge with a term on the parents' scale; for well-spread
    // parents the floor is orders of magnitude below the eigenvalues.
    double trace = m.sxx.trace();
    double floor = 1.0 + m.mu_x.squaredNorm() / std::max(1, k);
    m.ridge = options.ridge_scale * std::max(trace / std::max(1, k), floor);
    m.sxx.diagonal().array() += m.ridge;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.sxx, Eigen::EigenvaluesOnly);
    double lo = es.eigenvalues().minCoeff();
    double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0) || hi / lo > options.condition_threshold)
        throw Error("fit: node " + name + " has a singular parent covariance (condition " +
                    std::to_string(lo > 0 ? hi / lo : std::numeric_limits<double>::infinity()) +
                    ")");
    return m;
}

double finish_sigma2(double raw, double scale, const FitOptions& options,
                     const std::string& name) {
    if (raw < options.sigma2_tolerance * std::max(1.0, scale))
        throw Error("fit: node " + name + " produced negative conditional variance " +
                    std::to_string(raw));
    return std::max(0.0, raw);
}

GBNModel fit_common(const BNStructure& structure, const TrainingMatrix& data,
                    const FitOptions& options, bool nonneg) {
    structure.check();
    if (data.values.cols() != static_cast<long>(structure.nodes.size()))
        throw Error("fit: training matrix does not match the structure");

    GBNModel model;
    model.structure = structure;
    model.cpds.resize(structure.nodes.size());
    model.root_mean.assign(structure.nodes.size(), 0.0);
    model.root_var.assign(structure.nodes.size(), 0.0);

    const auto M = data.values.rows();
    for (std::size_t n = 0; n < structure.nodes.size(); ++n) {
        const auto& name = structure.nodes[n].name;
        if (structure.is_root(static_cast<int>(n))) {
            Eigen::VectorXd col = data.values.col(static_cast<long>(n));
            model.root_mean[n] = col.mean();
            model.root_var[n] =
                (col.array() - model.root_mean[n]).square().sum() / static_cast<double>(M);
            continue;
        }
        NodeMoments m =
            node_moments(data, structure.parents[n], static_cast<int>(n), options, name);
        LinearGaussianCPD cpd;
        cpd.node = static_cast<int>(n);
        cpd.parent_order = structure.parents[n];
        if (nonneg) {
            NnlsOptions nopt;
            nopt.dual_tolerance = options.nnls_dual_tolerance;
            cpd.beta = nnls_normal(m.sxx, m.sxy, nopt);
            double raw = m.syy - 2.0 * cpd.beta.dot(m.sxy) + cpd.beta.dot(m.sxx * cpd.beta) -
                         m.ridge * cpd.beta.squaredNorm();
            cpd.sigma2 = finish_sigma2(raw, m.syy, options, name);
        } else {
            cpd.beta = m.sxx.ldlt().solve(m.sxy);
            double raw = m.syy - m.sxy.dot(cpd.beta);
            cpd.sigma2 = finish_sigma2(raw, m.syy, options, name);
        }
        cpd.beta0 = m.mu_y - cpd.beta.dot(m.mu_x);
        model.cpds[n] = std::move(cpd);
    }
    return model;
}

}  // namespace

GBNModel fit_mle(const BNStructure& structure, const TrainingMatrix& data,
                 const FitOptions& options) {
    return fit_common(structure, data, options, false);
}

GBNModel fit_nnls(const BNStructure& structure, const TrainingMatrix& data,
                  const FitOptions& options) {
    return fit_common(structure, data, options, true);
}

namespace {

Eigen::VectorXd root_evidence(const GBNModel& model,
                              const std::map<std::string, double>& evidence) {
    const auto& s = model.structure;
    Eigen::VectorXd values = Eigen::VectorXd::Zero(static_cast<long>(s.nodes.size()));
    std::vector<std::string> missing;
    for (std::size_t n = 0; n < s.nodes.size(); ++n) {
        if (!s.is_root(static_cast<int>(n))) continue;
        auto it = evidence.find(s.nodes[n].name);
        if (it == evidence.end())
            missing.push_back(s.nodes[n].name);
        else
            values(static_cast<long>(n)) = it->second;
    }
    if (!missing.empty()) {
        std::string msg = "predict: evidence missing for root nodes:";
        for (std::size_t i = 0; i < missing.size() && i < 8; ++i) msg += " " + missing[i];
        if (missing.size() > 8) msg += " (+" + std::to_string(missing.size() - 8) + " more)";
        throw Error(msg);
    }
    return values;
}

}  // namespace

Eigen::VectorXd predict_mean(const GBNModel& model,
                             const std::map<std::string, double>& evidence) {
    Eigen::VectorXd mean = root_evidence(model, evidence);
    const auto& s = model.structure;
    for (std::size_t n = 0; n < s.nodes.size(); ++n) {
        if (s.is_root(static_cast<int>(n))) continue;
        const auto& cpd = *model.cpds[n];
        double m = cpd.beta0;
        for (std::size_t i = 0; i < cpd.parent_order.size(); ++i)
            m += cpd.beta(static_cast<long>(i)) * mean(cpd.parent_order[i]);
        mean(static_cast<long>(n)) = m;
    }
    return mean;
}

Eigen::VectorXd predict_variance(const GBNModel& model,
                                 const std::map<std::string, double>& evidence) {
    root_evidence(model, evidence);  // validates coverage
    const auto& s = model.structure;
    const long N = static_cast<long>(s.nodes.size());
    // Running covariance over nodes in topological order; observed roots
    // contribute nothing.
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(N, N);
    for (long n = 0; n < N; ++n) {
        if (s.is_root(static_cast<int>(n))) continue;
        const auto& cpd = *model.cpds[static_cast<std::size_t>(n)];
        const long k = static_cast<long>(cpd.parent_order.size());
        Eigen::MatrixXd parent_cov(k, k);
        for (long i = 0; i < k; ++i)
            for (long j = 0; j < k; ++j)
                parent_cov(i, j) = cov(cpd.parent_order[static_cast<std::size_t>(i)],
                                       cpd.parent_order[static_cast<std::size_t>(j)]);
        cov(n, n) = cpd.sigma2 + cpd.beta.dot(parent_cov * cpd.beta);
        for (long z = 0; z < n; ++z) {
            double c = 0;
            for (long i = 0; i < k; ++i)
                c += cpd.beta(i) * cov(cpd.parent_order[static_cast<std::size_t>(i)], z);
            cov(n, z) = cov(z, n) = c;
        }
    }
    return cov.diagonal();
}

LogLikelihood log_likelihood(const GBNModel& model, const TrainingMatrix& data,
                             bool allow_zero_variance) {
    const auto& s = model.structure;
    if (data.values.cols() != static_cast<long>(s.nodes.size()))
        throw Error("log_likelihood: training matrix does not match the structure");
    LogLikelihood out;
    for (std::size_t n = 0; n < s.nodes.size(); ++n) {
        if (s.is_root(static_cast<int>(n))) continue;
        const auto& cpd = *model.cpds[n];
        if (cpd.sigma2 <= 0) {
            if (!allow_zero_variance)
                throw Error("log_likelihood: node " + s.nodes[n].name + " has zero variance");
            ++out.skipped_nodes;
            continue;
        }
        Eigen::VectorXd mu =
            Eigen::VectorXd::Constant(data.values.rows(), cpd.beta0);
        for (std::size_t i = 0; i < cpd.parent_order.size(); ++i)
            mu += cpd.beta(static_cast<long>(i)) * data.values.col(cpd.parent_order[i]);
        Eigen::VectorXd resid = data.values.col(static_cast<long>(n)) - mu;
        out.value += -0.5 * static_cast<double>(data.values.rows()) *
                         std::log(2.0 * std::numbers::pi * cpd.sigma2) -
                     resid.squaredNorm() / (2.0 * cpd.sigma2);
    }
    return out;
}

std::string serialize_model(const GBNModel& model) {
    const auto& s = model.structure;
    nlohmann::json j;
    j["structure"]["nodes"] = nlohmann::json::array();
    for (std::size_t n = 0; n < s.nodes.size(); ++n) {
        nlohmann::json jn;
        jn["name"] = s.nodes[n].name;
        jn["level"] = to_string(s.nodes[n].level);
        jn["lag"] = s.nodes[n].lag;
        jn["entity"] = s.nodes[n].entity;
        nlohmann::json par = nlohmann::json::array();
        for (int p : s.parents[n]) par.push_back(s.nodes[static_cast<std::size_t>(p)].name);
        jn["parents"] = par;
        j["structure"]["nodes"].push_back(jn);
    }
    j["cpds"] = nlohmann::json::object();
    j["root_stats"] = nlohmann::json::object();
    for (std::size_t n = 0; n < s.nodes.size(); ++n) {
        if (s.is_root(static_cast<int>(n))) {
            j["root_stats"][s.nodes[n].name] = {{"mean", model.root_mean[n]},
                                                {"variance", model.root_var[n]}};
            continue;
        }
        const auto& cpd = *model.cpds[n];
        nlohmann::json jc;
        nlohmann::json par = nlohmann::json::array();
        for (int p : cpd.parent_order) par.push_back(s.nodes[static_cast<std::size_t>(p)].name);
        jc["parents"] = par;
        jc["beta0"] = cpd.beta0;
        jc["beta"] = std::vector<double>(cpd.beta.data(), cpd.beta.data() + cpd.beta.size());
        jc["sigma2"] = cpd.sigma2;
        j["cpds"][s.nodes[n].name] = jc;
    }
    return j.dump(2) + "\n";
}

GBNModel parse_model(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model parse error: ") + e.what());
    }
    GBNModel model;
    try {
        BNStructure& s = model.structure;
        for (const auto& jn : j.at("structure").at("nodes")) {
            BNNode node;
            node.name = jn.at("name").get<std::string>();
            node.level = node_level_from_string(jn.at("level").get<std::string>());
            node.lag = jn.at("lag").get<int>();
            node.entity = jn.at("entity").get<std::string>();
            s.index[node.name] = static_cast<int>(s.nodes.size());
            s.nodes.push_back(node);
            std::vector<int> par;
            for (const auto& p : jn.at("parents")) par.push_back(s.node_index(p.get<std::string>()));
            s.parents.push_back(std::move(par));
        }
        s.check();
        model.cpds.resize(s.nodes.size());
        model.root_mean.assign(s.nodes.size(), 0.0);
        model.root_var.assign(s.nodes.size(), 0.0);
        for (const auto& [name, jc] : j.at("cpds").items()) {
            int n = s.node_index(name);
            LinearGaussianCPD cpd;
            cpd.node = n;
            for (const auto& p : jc.at("parents"))
                cpd.parent_order.push_back(s.node_index(p.get<std::string>()));
            if (cpd.parent_order != s.parents[static_cast<std::size_t>(n)])
                throw ParseError("model: CPD parents of " + name + " do not match the structure");
            cpd.beta0 = jc.at("beta0").get<double>();
            auto beta = jc.at("beta").get<std::vector<double>>();
            cpd.beta = Eigen::Map<Eigen::VectorXd>(beta.data(), static_cast<long>(beta.size()));
            if (cpd.beta.size() != static_cast<long>(cpd.parent_order.size()))
                throw ParseError("model: CPD of " + name + " has mismatched beta length");
            cpd.sigma2 = jc.at("sigma2").get<double>();
            model.cpds[static_cast<std::size_t>(n)] = std::move(cpd);
        }
        for (const auto& [name, jr] : j.at("root_stats").items()) {
            int n = s.node_index(name);
            model.root_mean[static_cast<std::size_t>(n)] = jr.at("mean").get<double>();
            model.root_var[static_cast<std::size_t>(n)] = jr.at("variance").get<double>();
        }
        for (std::size_t n = 0; n < s.nodes.size(); ++n) {
            if (!s.is_root(static_cast<int>(n)) && !model.cpds[n])
                throw ParseError("model: missing CPD for " + s.nodes[n].name);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model parse error: ") + e.what());
    }
    return model;
}

void save_model(const GBNModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write model file: " + path);
    out << serialize_model(model);
}

GBNModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open model file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

}  // namespace tcrisk
