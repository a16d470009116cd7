#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "tcrisk/lgbn.hpp"
#include "tcrisk/risk.hpp"
#include "tcrisk/simulate.hpp"

namespace tcrisk {

enum class Scheme { AR, GBN1, GBN2 };

const char* to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& s);

/// Aligned supervised samples for one scheme. GBN schemes carry a
/// TrainingMatrix matching their BN structure (features at the input lags,
/// risks at the target slot); the AR scheme carries per-node lagged series.
/// Samples whose lag/target window crosses a day boundary are dropped.
struct SupervisedDataset {
    Scheme scheme = Scheme::GBN1;
    int horizon = 1;
    std::vector<std::int64_t> target_slots;  ///< per sample

    TrainingMatrix matrix;  ///< GBN schemes only

    std::vector<std::string> ar_nodes;  ///< AR only: "RL:<line>" ids then "RN"
    Eigen::MatrixXd ar_y, ar_y1, ar_target;

    long size() const { return static_cast<long>(target_slots.size()); }
};

SupervisedDataset make_supervised(const BNStructure& structure,
                                  const std::vector<RiskSnapshot>& risks,
                                  const std::vector<SaturationSnapshot>& sats, Scheme scheme,
                                  int horizon);
/// AR variant; inputs are each node's own values at t and t-dt.
SupervisedDataset make_supervised(const std::vector<RiskSnapshot>& risks, int horizon);

/// Chronological head/tail split; any middle remainder is discarded.
std::pair<SupervisedDataset, SupervisedDataset> split(const SupervisedDataset& dataset,
                                                      long train_count, long test_count);

/// Scales the reference 1600:320 split down proportionally when the dataset
/// is smaller than train_ref + test_ref.
std::pair<long, long> scaled_split_counts(long available, long train_ref = 1600,
                                          long test_ref = 320);

struct ARModel {
    std::vector<std::string> nodes;
    Eigen::MatrixXd coeffs;  ///< 3 x |nodes|: c0, c1 (value at t), c2 (at t-dt)

    double predict(int node, double y_t, double y_tm1) const;
};

/// Per-node OLS of y(t+h) on (1, y(t), y(t-dt)); same ridge/conditioning
/// policy as the GBN fits.
ARModel fit_ar(const SupervisedDataset& train, const FitOptions& options = {});

double mape(const std::vector<double>& y, const std::vector<double>& yhat);
double wmape(const std::vector<double>& y, const std::vector<double>& yhat);

struct SchemeResult {
    std::map<std::string, double> wmape;  ///< target -> error
    std::map<std::string, double> mape;
    long train_count = 0;
    long test_count = 0;
};

struct PredictionReport {
    std::vector<std::string> targets;  ///< line ids then "global"
    std::map<std::string, SchemeResult> schemes;  ///< keyed AR/GBN1/GBN2
    /// slot -> (true RN, scheme -> predicted RN), on the common test window
    std::map<std::int64_t, std::pair<double, std::map<std::string, double>>> global_plot;
    std::string config_echo;  ///< JSON text of the configuration used
};

enum class Fitter { MLE, NNLS };

const char* to_string(Fitter f);
Fitter fitter_from_string(const std::string& s);

struct ExperimentConfig {
    Fitter fitter = Fitter::MLE;
    int horizon = 1;
    long train_ref = 1600;
    long test_ref = 320;
    RiskConfig risk;
    FitOptions fit;
};

struct ExperimentArtifacts {
    PredictionReport report;
    GBNModel gbn1, gbn2;
    std::vector<FlowSnapshot> flows;
    std::vector<RiskSnapshot> risks;
};

/// End to end: simulate, assess, build the three datasets, fit AR/GBN1/GBN2,
/// evaluate WMAPE and MAPE per target on the test split.
ExperimentArtifacts run_experiment(const Network& net, const SimulationConfig& sim,
                                   const ExperimentConfig& config);

std::string report_to_json(const PredictionReport& report);
void write_report_json(const PredictionReport& report, const std::string& path);
/// CSV rows: target,scheme,wmape,mape
void write_report_csv(const PredictionReport& report, const std::string& path);
/// CSV rows: slot,true_rn,<one predicted column per scheme>
void write_plot_csv(const PredictionReport& report, const std::string& path);

}  // namespace tcrisk
