#pragma once

#include "cvilab/cluster.hpp"
#include "cvilab/cvi.hpp"
#include "cvilab/perturb.hpp"
#include "cvilab/profiles.hpp"
#include "cvilab/reduce.hpp"
#include "cvilab/serialize.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cvilab::app {

struct SynthOptions {
    int clusters = 0;
    int size = 50;
    double spread = 0.05;
    int outliers = 0;
    OutlierPlacement placement = OutlierPlacement::far;
};

enum class Space { reduced, original };

struct RunConfig {
    std::vector<std::string> inputs;
    std::optional<SynthOptions> synth;
    std::optional<int> dprime;  // empty: elbow
    std::optional<int> k;       // empty: FPC maximum
    std::optional<double> m;    // empty: default estimator
    int k_max = kDefaultMaxClusters;
    int restarts = 10;
    int max_iter = 300;
    double tol = 1e-6;
    PerturbConfig perturb;
    std::vector<ExperimentKind> experiments{ExperimentKind::outliers, ExperimentKind::density,
                                            ExperimentKind::diameter};
    Space space = Space::reduced;
    std::string out_dir = "cvilab_out";
    std::uint64_t seed = 0;

    // Exactly one data source must be present.
    void validate_source() const;
    FcmConfig fcm_config() const;
    SynthSpec synth_spec() const;
};

// Resolved configuration without the output directory, echoed into manifests.
Json config_echo(const RunConfig& config);

struct LoadedData {
    ProfileMatrix profiles;
    std::optional<Labels> truth;
    std::string digest;  // SHA-256 of the input bytes or of the synth spec
};

// Reads inputs (raw readings or profile CSVs, detected by header) or
// generates the synthetic population.
LoadedData load_data(const RunConfig& config);

struct PipelineResult {
    LoadedData data;
    PcaModel pca;
    std::vector<double> cevr;
    Matrix reduced;
    ClusterModel model;
    std::vector<int> ks;
    std::vector<double> fpc;
    CviReport cvi;
};

// preprocess -> PCA (elbow or override) -> FCM (FPC-selected or override) -> CVIs.
PipelineResult run_pipeline(const RunConfig& config);
PipelineResult run_pipeline(const RunConfig& config, LoadedData data);

// Points on which CVIs and experiments operate.
const Matrix& evaluation_points(const PipelineResult& result, Space space);

ExperimentReport run_experiment(ExperimentKind kind, const PipelineResult& result, const RunConfig& config);

// Entry point of the command-line tool. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cvilab::app
