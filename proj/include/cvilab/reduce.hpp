#pragma once

#include "cvilab/matrix.hpp"

#include <vector>

namespace cvilab {

// Principal-component model of a profile matrix. All d components are kept;
// chosen_dprime records how many of them the pipeline uses.
struct PcaModel {
    Vector mean;                                  // length d
    Matrix components;                            // d x d, one component per row, decreasing eigenvalue
    std::vector<double> explained_variance_ratio; // length d, nonincreasing, sums to 1
    int chosen_dprime = 0;

    Eigen::Index dimension() const noexcept { return mean.size(); }
    Eigen::Index component_count() const noexcept { return components.rows(); }
};

// Eigen-decomposition of the sample covariance (N - 1 denominator).
// Eigenvalues below 1e-10 of the largest are treated as zero. Each component's
// sign is fixed so that its largest-magnitude coordinate is positive.
// Throws InvalidArgument for N < 2 and DegenerateInput when all rows coincide.
PcaModel fit_pca(const Matrix& data);

// Row i = components[0..dprime) . (x_i - mean).
Matrix project(const PcaModel& model, const Matrix& data, int dprime);

std::vector<double> cumulative_explained_variance(const PcaModel& model);

// 1-based index of the point farthest from the chord joining the first and
// last points of the curve; ties go to the smaller index.
int select_dimensions_elbow(const std::vector<double>& cevr);

}  // namespace cvilab
