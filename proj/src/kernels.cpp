#include "cvilab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cvilab::kernels {

void fcm_memberships(const Matrix& points, const Matrix& centroids, double m, Matrix& memberships) {
    const Eigen::Index n = points.rows();
    const Eigen::Index k = centroids.rows();
    const Eigen::Index d = points.cols();
    const double exponent = 2.0 / (m - 1.0);
    memberships.resize(n, k);

#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        const double* x = points.row(i).data();
        double dist[64];
        std::vector<double> heap_dist;
        double* dd = dist;
        if (k > 64) {
            heap_dist.resize(static_cast<std::size_t>(k));
            dd = heap_dist.data();
        }
        Eigen::Index zero_at = -1;
        double nearest = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < k; ++j) {
            dd[j] = distance(x, centroids.row(j).data(), d);
            if (dd[j] == 0.0 && zero_at < 0) zero_at = j;
            nearest = std::min(nearest, dd[j]);
        }
        if (zero_at >= 0) {
            for (Eigen::Index j = 0; j < k; ++j) memberships(i, j) = j == zero_at ? 1.0 : 0.0;
            continue;
        }
        // u_ij = w_j / sum_l w_l with w_j = (nearest / d_ij)^(2/(m-1)) in (0, 1].
        double total = 0.0;
        for (Eigen::Index j = 0; j < k; ++j) {
            dd[j] = std::pow(nearest / dd[j], exponent);
            total += dd[j];
        }
        for (Eigen::Index j = 0; j < k; ++j) memberships(i, j) = dd[j] / total;
    }
}

void fcm_centroids(const Matrix& points, const Matrix& memberships, double m, Matrix& centroids) {
    const Eigen::Index n = points.rows();
    const Eigen::Index k = memberships.cols();
    const Eigen::Index d = points.cols();
    centroids.conservativeResize(k, d);

#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < k; ++j) {
        std::vector<double> acc(static_cast<std::size_t>(d), 0.0);
        double weight = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double w = std::pow(memberships(i, j), m);
            if (w == 0.0) continue;
            weight += w;
            const double* x = points.row(i).data();
            for (Eigen::Index c = 0; c < d; ++c) acc[static_cast<std::size_t>(c)] += w * x[c];
        }
        if (weight > 0.0) {
            for (Eigen::Index c = 0; c < d; ++c) centroids(j, c) = acc[static_cast<std::size_t>(c)] / weight;
        }
    }
}

double fcm_objective(const Matrix& points, const Matrix& memberships, const Matrix& centroids, double m) {
    const Eigen::Index n = points.rows();
    const Eigen::Index k = centroids.rows();
    const Eigen::Index d = points.cols();
    std::vector<double> per_row(static_cast<std::size_t>(n));

#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < k; ++j) {
            const double u = memberships(i, j);
            if (u == 0.0) continue;
            const double r = distance(points.row(i).data(), centroids.row(j).data(), d);
            s += std::pow(u, m) * r * r;
        }
        per_row[static_cast<std::size_t>(i)] = s;
    }
    double total = 0.0;
    for (double v : per_row) total += v;
    return total;
}

std::vector<double> silhouette_values(const Matrix& points, const Labels& labels, int k) {
    const Eigen::Index n = points.rows();
    const Eigen::Index d = points.cols();
    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
    std::vector<double> s(static_cast<std::size_t>(n), 0.0);

#pragma omp parallel
    {
        std::vector<double> sums(static_cast<std::size_t>(k));
#pragma omp for schedule(dynamic, 16)
        for (Eigen::Index i = 0; i < n; ++i) {
            const int own = labels[static_cast<std::size_t>(i)];
            if (sizes[static_cast<std::size_t>(own)] < 2) {
                s[static_cast<std::size_t>(i)] = 0.0;
                continue;
            }
            std::fill(sums.begin(), sums.end(), 0.0);
            const double* x = points.row(i).data();
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                sums[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])] +=
                    distance(x, points.row(j).data(), d);
            }
            const double a = sums[static_cast<std::size_t>(own)] / (sizes[static_cast<std::size_t>(own)] - 1);
            double b = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                if (c == own || sizes[static_cast<std::size_t>(c)] == 0) continue;
                b = std::min(b, sums[static_cast<std::size_t>(c)] / sizes[static_cast<std::size_t>(c)]);
            }
            const double denom = std::max(a, b);
            s[static_cast<std::size_t>(i)] = denom > 0.0 ? (b - a) / denom : 0.0;
        }
    }
    return s;
}

PairExtremes pair_extremes(const Matrix& points, const Labels& labels, int k) {
    const Eigen::Index n = points.rows();
    const Eigen::Index d = points.cols();
    const auto kk = static_cast<std::size_t>(k);
    std::vector<double> row_sep(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    std::vector<double> row_diam(static_cast<std::size_t>(n), 0.0);

#pragma omp parallel for schedule(dynamic, 16)
    for (Eigen::Index i = 0; i < n; ++i) {
        const double* x = points.row(i).data();
        const int li = labels[static_cast<std::size_t>(i)];
        double sep = std::numeric_limits<double>::infinity();
        double diam = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double r = distance(x, points.row(j).data(), d);
            if (labels[static_cast<std::size_t>(j)] == li) {
                diam = std::max(diam, r);
            } else {
                sep = std::min(sep, r);
            }
        }
        row_sep[static_cast<std::size_t>(i)] = sep;
        row_diam[static_cast<std::size_t>(i)] = diam;
    }

    PairExtremes out;
    out.diameters.assign(kk, 0.0);
    out.min_separation = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        auto& diam = out.diameters[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
        diam = std::max(diam, row_diam[static_cast<std::size_t>(i)]);
        out.min_separation = std::min(out.min_separation, row_sep[static_cast<std::size_t>(i)]);
    }
    return out;
}

}  // namespace cvilab::kernels
