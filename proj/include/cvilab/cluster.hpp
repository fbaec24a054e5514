#pragma once

#include "cvilab/matrix.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace cvilab {

inline constexpr int kDefaultMaxClusters = 10;

struct FcmConfig {
    int k = 2;
    double m = 2.0;
    int max_iter = 300;
    double tol = 1e-6;  // on max centroid displacement
    std::uint64_t seed = 0;
    int restarts = 10;
    int k_max = kDefaultMaxClusters;

    void validate() const;
};

struct ClusterModel {
    Matrix centroids;                     // k x d'
    Matrix memberships;                   // N x k, rows sum to 1
    double fuzzifier = 2.0;
    Labels labels;                        // argmax of each membership row
    std::vector<double> objective_trace;  // one value per membership update, nonincreasing
    int iterations = 0;
    bool converged = false;
    bool empty_cluster_warning = false;   // some cluster received no hardened member
    int best_restart = 0;

    int k() const noexcept { return static_cast<int>(centroids.rows()); }
};

// Best of `restarts` seeded runs by final objective (ties to the earliest
// restart). Restart r draws its initial centroids from derive_seed(seed, r)
// with D^2-weighted sampling of distinct data points.
ClusterModel fit_fcm(const Matrix& data, const FcmConfig& config);

// Alternating optimization from the given starting centroids.
ClusterModel fit_fcm_from(const Matrix& data, Matrix initial_centroids, const FcmConfig& config);

Matrix initial_centroids(const Matrix& data, int k, std::uint64_t seed);

using FuzzifierEstimator = std::function<double(const Matrix&)>;

// Default strategy: m = 2.
double default_fuzzifier(const Matrix& data);

// Runs the estimator and checks the result lies in (1, 5].
double estimate_fuzzifier(const Matrix& data, const FuzzifierEstimator& estimator = default_fuzzifier);

// (1/N) sum_ij u_ij^2
double fuzzy_partition_coefficient(const Matrix& memberships);

// Per-row argmax, ties to the lowest column.
Labels harden(const Matrix& memberships);

struct ClusterCountSelection {
    int best_k = 0;
    std::vector<int> ks;
    std::vector<double> fpc;
    ClusterModel model;  // the fit at best_k
};

// Fits FCM for every k in [k_min, k_max] and keeps the FPC maximizer
// (ties to the smaller k).
ClusterCountSelection select_cluster_count(const Matrix& data, const FcmConfig& base, int k_min = 2,
                                           int k_max = kDefaultMaxClusters);

}  // namespace cvilab
