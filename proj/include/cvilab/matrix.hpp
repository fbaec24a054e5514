#pragma once

#include <Eigen/Dense>

#include <vector>

namespace cvilab {

// Row-major so each observation is a contiguous row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Labels = std::vector<int>;

inline double squared_distance(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                               const Eigen::Ref<const Eigen::RowVectorXd>& b) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < a.size(); ++c) {
        const double diff = a[c] - b[c];
        s += diff * diff;
    }
    return s;
}

}  // namespace cvilab
