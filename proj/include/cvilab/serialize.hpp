#pragma once

#include "cvilab/cluster.hpp"
#include "cvilab/cvi.hpp"
#include "cvilab/perturb.hpp"
#include "cvilab/reduce.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace cvilab {

using Json = nlohmann::ordered_json;

// JSON keeps full double precision; CSV uses 9 significant digits.
std::string format_csv_number(double value);

Json to_json(const PcaModel& model);
PcaModel pca_from_json(const Json& j);

Json to_json(const ClusterModel& model);
ClusterModel cluster_from_json(const Json& j);

// Degenerate values are written as null with a reason in degenerate_flags.
Json to_json(const CviReport& report);
CviReport cvi_from_json(const Json& j);

Json to_json(const PerturbConfig& config);
Json to_json(const ExperimentReport& report);
ExperimentReport experiment_from_json(const Json& j);

void write_cevr_csv(std::ostream& out, const std::vector<double>& cevr);
void write_fpc_csv(std::ostream& out, const std::vector<int>& ks, const std::vector<double>& fpc);
// One row per variant or trial, then AVERAGE for trial experiments.
void write_experiment_csv(std::ostream& out, const ExperimentReport& report);

}  // namespace cvilab
