#include "cvilab/reduce.hpp"

#include "cvilab/error.hpp"

#include <cmath>
#include <numeric>

namespace cvilab {

namespace {
constexpr double kEigenTolerance = 1e-10;
}

PcaModel fit_pca(const Matrix& data) {
    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    if (n < 2) throw InvalidArgument("fit_pca: need at least 2 rows");
    if (d < 1) throw InvalidArgument("fit_pca: need at least 1 column");
    if (!data.allFinite()) throw InvalidArgument("fit_pca: non-finite data");

    PcaModel model;
    model.mean = data.colwise().mean().transpose();
    const Matrix centered = data.rowwise() - model.mean.transpose();
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
    if (cov.trace() <= 0.0) {
        throw DegenerateInput("fit_pca: rank-0 data (all rows identical)");
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw DegenerateInput("fit_pca: eigen-decomposition did not converge");
    }
    // Eigen returns ascending eigenvalues; reverse into descending order.
    const Eigen::VectorXd& values = solver.eigenvalues();
    const Eigen::MatrixXd& vectors = solver.eigenvectors();
    const double largest = values[d - 1];

    model.components.resize(d, d);
    model.explained_variance_ratio.resize(static_cast<std::size_t>(d));
    std::vector<double> lambda(static_cast<std::size_t>(d));
    for (Eigen::Index r = 0; r < d; ++r) {
        const Eigen::Index src = d - 1 - r;
        double l = values[src];
        if (l < kEigenTolerance * largest) l = 0.0;
        lambda[static_cast<std::size_t>(r)] = l;

        Eigen::VectorXd v = vectors.col(src);
        Eigen::Index pivot = 0;
        for (Eigen::Index c = 1; c < d; ++c) {
            if (std::abs(v[c]) > std::abs(v[pivot])) pivot = c;
        }
        if (v[pivot] < 0.0) v = -v;
        model.components.row(r) = v.transpose();
    }
    const double total = std::accumulate(lambda.begin(), lambda.end(), 0.0);
    for (std::size_t r = 0; r < lambda.size(); ++r) {
        model.explained_variance_ratio[r] = lambda[r] / total;
    }
    model.chosen_dprime = static_cast<int>(d);
    return model;
}

Matrix project(const PcaModel& model, const Matrix& data, int dprime) {
    if (dprime < 1 || dprime > model.component_count()) {
        throw InvalidArgument("project: dprime " + std::to_string(dprime) + " outside [1, " +
                              std::to_string(model.component_count()) + "]");
    }
    if (data.cols() != model.dimension()) {
        throw InvalidArgument("project: data dimension does not match the model");
    }
    const Matrix centered = data.rowwise() - model.mean.transpose();
    return centered * model.components.topRows(dprime).transpose();
}

std::vector<double> cumulative_explained_variance(const PcaModel& model) {
    std::vector<double> cevr(model.explained_variance_ratio.size());
    std::partial_sum(model.explained_variance_ratio.begin(), model.explained_variance_ratio.end(), cevr.begin());
    return cevr;
}

int select_dimensions_elbow(const std::vector<double>& cevr) {
    const std::size_t n = cevr.size();
    if (n < 3) throw InvalidArgument("select_dimensions_elbow: need at least 3 points");
    for (std::size_t j = 1; j < n; ++j) {
        if (!(cevr[j] >= cevr[j - 1])) {
            throw InvalidArgument("select_dimensions_elbow: curve must be nondecreasing");
        }
    }
    // Chord from (1, y1) to (n, yn); distance of (j, yj) is
    // |dy * (j - 1) - dx * (yj - y1)| / hypot(dx, dy).
    const double dx = static_cast<double>(n - 1);
    const double dy = cevr[n - 1] - cevr[0];
    const double length = std::hypot(dx, dy);
    std::size_t best = 0;
    double best_distance = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double dist = std::abs(dy * static_cast<double>(j) - dx * (cevr[j] - cevr[0])) / length;
        if (dist > best_distance) {
            best_distance = dist;
            best = j;
        }
    }
    const double scale = std::max({1.0, std::abs(cevr[0]), std::abs(cevr[n - 1])});
    if (best_distance <= 1e-12 * scale) {
        throw DegenerateInput("select_dimensions_elbow: no elbow (curve is a straight line)");
    }
    return static_cast<int>(best) + 1;
}

}  // namespace cvilab
