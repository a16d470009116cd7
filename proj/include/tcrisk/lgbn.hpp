#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tcrisk/topology.hpp"

namespace tcrisk {

enum class NodeLevel { Feature, StationRisk, SectionRisk, LineRisk, GlobalRisk };

const char* to_string(NodeLevel level);
NodeLevel node_level_from_string(const std::string& s);

struct BNNode {
    std::string name;    ///< e.g. "SS:a1@t", "RS:a1", "RL:lineA", "RN"
    NodeLevel level = NodeLevel::Feature;
    int lag = 0;         ///< 0 = t, 1 = t - dt; only feature nodes carry lags
    std::string entity;  ///< station/section/line id, empty for the global node
};

/// DAG over feature and risk nodes. Nodes are stored in topological order
/// (every parent index is smaller than its child's index).
struct BNStructure {
    std::vector<BNNode> nodes;
    std::vector<std::vector<int>> parents;
    std::map<std::string, int> index;

    int node_index(const std::string& name) const;
    bool is_root(int node) const { return parents[node].empty(); }
    void check() const;  ///< throws Error on a malformed structure
};

/// Builds the topology-derived structure. lags=1: features at t only (GBN1);
/// lags=2: every feature node duplicated at t-dt with the same children
/// (GBN2).
BNStructure build_structure(const Network& net, int lags);

struct LinearGaussianCPD {
    int node = -1;
    std::vector<int> parent_order;  ///< matches BNStructure::parents[node]
    double beta0 = 0.0;
    Eigen::VectorXd beta;
    double sigma2 = 0.0;
};

struct GBNModel {
    BNStructure structure;
    std::vector<std::optional<LinearGaussianCPD>> cpds;  ///< per node, roots empty
    std::vector<double> root_mean, root_var;             ///< per node, non-roots 0
};

/// Column j of `values` holds samples of structure node j: feature columns at
/// their input lag, risk columns at the prediction target time.
struct TrainingMatrix {
    Eigen::MatrixXd values;  ///< M x |nodes|
};

struct FitOptions {
    double ridge_scale = 1e-8;           ///< lambda = ridge_scale * trace(Sxx)/k
    double condition_threshold = 1e12;   ///< on the regularized parent covariance
    double sigma2_tolerance = -1e-10;    ///< more negative closed-form residual variances are an error
    double nnls_dual_tolerance = 1e-10;
};

/// Closed-form per-node MLE: beta = Sxx^-1 Syx, beta0 = muY - beta' muX,
/// sigma2 = Syy - Syx Sxx^-1 Sxy (clamped at zero).
GBNModel fit_mle(const BNStructure& structure, const TrainingMatrix& data,
                 const FitOptions& options = {});

/// Same moments, but slope coefficients solve the nonnegative least squares
/// problem on centered data; the intercept stays unconstrained.
GBNModel fit_nnls(const BNStructure& structure, const TrainingMatrix& data,
                  const FitOptions& options = {});

/// Mean propagation in topological order; evidence must cover every root.
/// Returns a mean for every node (roots echo their evidence).
Eigen::VectorXd predict_mean(const GBNModel& model, const std::map<std::string, double>& evidence);

/// Variance propagation with cross-covariances tracked along shared
/// ancestry; observed roots have variance zero.
Eigen::VectorXd predict_variance(const GBNModel& model,
                                 const std::map<std::string, double>& evidence);

struct LogLikelihood {
    double value = 0.0;
    int skipped_nodes = 0;  ///< zero-variance CPDs excluded from the sum
};

/// Sum over non-root nodes and samples of the conditional Gaussian
/// log-density. With allow_zero_variance, deterministic CPDs are skipped and
/// counted; otherwise they raise an error.
LogLikelihood log_likelihood(const GBNModel& model, const TrainingMatrix& data,
                             bool allow_zero_variance = true);

std::string serialize_model(const GBNModel& model);
GBNModel parse_model(const std::string& json_text);
void save_model(const GBNModel& model, const std::string& path);
GBNModel load_model(const std::string& path);

}  // namespace tcrisk
