#pragma once

// Serial textbook implementations of the clustering kernels and validation
// indices, written directly from their defining formulas. They are kept for
// testing and benchmarking only; the library never calls them.

#include "cvilab/matrix.hpp"

namespace cvilab::reference {

double euclidean(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j);

double silhouette(const Matrix& points, const Labels& labels);
double calinski_harabasz(const Matrix& points, const Labels& labels);
double davies_bouldin(const Matrix& points, const Labels& labels);
double dunn(const Matrix& points, const Labels& labels);
double xie_beni(const Matrix& points, const Matrix& memberships, const Matrix& centroids, double m);
double xie_beni(const Matrix& points, const Labels& labels);

// u_ij = 1 / sum_l (d_ij / d_il)^(2/(m-1)); assumes no zero distances.
Matrix fcm_memberships(const Matrix& points, const Matrix& centroids, double m);
Matrix fcm_centroids(const Matrix& points, const Matrix& memberships, double m);
double fcm_objective(const Matrix& points, const Matrix& memberships, const Matrix& centroids, double m);

}  // namespace cvilab::reference
