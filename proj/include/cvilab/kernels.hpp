#pragma once

// OpenMP kernels shared by the clustering and validation code. Every kernel
// writes per-row or per-cluster results and reduces them serially in index
// order, so output does not depend on the thread count. Serial naive
// counterparts live in cvilab/reference.hpp.

#include "cvilab/matrix.hpp"

#include <cmath>
#include <vector>

namespace cvilab::kernels {

inline double distance(const double* a, const double* b, Eigen::Index d) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < d; ++c) {
        const double diff = a[c] - b[c];
        s += diff * diff;
    }
    return std::sqrt(s);
}

// FCM membership update. A point that coincides with a centroid gets crisp
// membership in the lowest such centroid.
void fcm_memberships(const Matrix& points, const Matrix& centroids, double m, Matrix& memberships);

// c_j = sum_i u_ij^m x_i / sum_i u_ij^m. A cluster with zero total weight
// keeps its previous centroid.
void fcm_centroids(const Matrix& points, const Matrix& memberships, double m, Matrix& centroids);

// sum_ij u_ij^m ||x_i - c_j||^2
double fcm_objective(const Matrix& points, const Matrix& memberships, const Matrix& centroids, double m);

// Per-point silhouette values for compact labels in [0, k).
std::vector<double> silhouette_values(const Matrix& points, const Labels& labels, int k);

struct PairExtremes {
    std::vector<double> diameters;  // per cluster, max intra-cluster pair distance
    double min_separation = 0.0;    // min distance between points of different clusters
};

// O(N^2) scan for diameters and single-linkage separation.
PairExtremes pair_extremes(const Matrix& points, const Labels& labels, int k);

}  // namespace cvilab::kernels
