#pragma once

#include "cvilab/cluster.hpp"
#include "cvilab/cvi.hpp"
#include "cvilab/matrix.hpp"
#include "cvilab/rng.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cvilab {

struct PerturbConfig {
    std::uint64_t seed = 0;
    int trials = 100;
    double density_add_fraction = 1.0;  // injected points per cluster, as a fraction of its size
    double shrink_factor = 0.8;
    double sigma_divisor = 4.0;         // sigma = radius / sigma_divisor
    int max_rejection_attempts = 1000;  // per accepted sample
    bool recluster = false;             // refit FCM on every variant instead of keeping the partition
    FcmConfig recluster_fcm;            // k is replaced by the variant's cluster count

    void validate() const;
};

// A fixed crisp partition of a point set.
struct Partition {
    Matrix points;
    Labels labels;
};

enum class ExperimentKind { outliers, density, diameter };

enum class Verdict {
    unaffected,
    improves_on_removal,
    improves_on_addition,
    mixed,
    positive,
    negative,
    inconclusive,
};

std::string_view kind_name(ExperimentKind kind);
ExperimentKind parse_kind(std::string_view name);
std::string_view verdict_name(Verdict verdict);
Verdict parse_verdict(std::string_view name);

struct ExperimentRow {
    std::string name;
    std::vector<int> included;  // outlier experiment: 1 if that singleton is kept
    CviReport cvi;
};

struct IndexJudgement {
    Verdict verdict = Verdict::inconclusive;
    double p_value = 1.0;  // sign test only
    int improved = 0;
    int worsened = 0;
    int ties = 0;
};

struct ExperimentReport {
    ExperimentKind kind = ExperimentKind::outliers;
    PerturbConfig config;
    std::vector<int> singleton_clusters;  // labels of the singleton clusters found in the input
    CviReport baseline;
    std::vector<ExperimentRow> rows;      // variants (outliers) or trials
    std::optional<CviReport> average;     // trial experiments only
    std::array<int, 5> degenerate_trials{};
    std::array<IndexJudgement, 5> judgements{};
};

// Labels (ascending) of clusters with exactly one member.
std::vector<int> find_singleton_clusters(const Labels& labels);
std::vector<int> find_singleton_clusters(const ClusterModel& model);

// Drops every singleton cluster and renumbers the rest to [0, k) in label order.
Partition remove_singletons(const Partition& partition);

// Removes excluded singleton clusters for each of the 2^s inclusion subsets
// and re-scores the fixed partition. Rows follow binary counting with the
// first singleton as the most significant bit: row 0 keeps none, the last
// row keeps all.
ExperimentReport outlier_experiment(const Partition& partition, const PerturbConfig& config);

// Draws `count` points from an isotropic Gaussian at the cluster centroid with
// sigma = radius / sigma_divisor, keeping a draw only when it lies within the
// radius and is nearest to this cluster's centroid.
Matrix inject_density(const Partition& partition, int cluster_label, int count, const PerturbConfig& config,
                      Rng& rng);

ExperimentReport density_experiment(const Partition& partition, const PerturbConfig& config);

// Shrinks every non-singleton cluster's radius by shrink_factor: members
// outside the new radius are replaced in place by fresh draws inside it, so
// labels and cluster sizes are unchanged.
Matrix shrink_clusters(const Partition& partition, const PerturbConfig& config, Rng& rng);

ExperimentReport diameter_experiment(const Partition& partition, const PerturbConfig& config);

std::array<IndexJudgement, 5> judge_hypothesis(const ExperimentReport& report);

// P(X >= successes) for X ~ Binomial(trials, 1/2).
double binomial_upper_tail(int trials, int successes);

}  // namespace cvilab
