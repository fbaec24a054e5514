#include "cvilab/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

namespace cvilab::reference {

namespace {

using Groups = std::map<int, std::vector<Eigen::Index>>;

Groups group(const Labels& labels) {
    Groups g;
    for (std::size_t i = 0; i < labels.size(); ++i) g[labels[i]].push_back(static_cast<Eigen::Index>(i));
    return g;
}

Eigen::RowVectorXd mean_of(const Matrix& points, const std::vector<Eigen::Index>& members) {
    Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(points.cols());
    for (auto i : members) c += points.row(i);
    return c / static_cast<double>(members.size());
}

double dist(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) { return (a - b).norm(); }

}  // namespace

double euclidean(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < a.cols(); ++c) s += (a(i, c) - b(j, c)) * (a(i, c) - b(j, c));
    return std::sqrt(s);
}

double silhouette(const Matrix& points, const Labels& labels) {
    const Groups groups = group(labels);
    double total = 0.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const int own = labels[static_cast<std::size_t>(i)];
        const auto& mates = groups.at(own);
        if (mates.size() == 1) continue;  // s(i) = 0
        double a = 0.0;
        for (auto j : mates) {
            if (j != i) a += euclidean(points, i, points, j);
        }
        a /= static_cast<double>(mates.size() - 1);
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [label, members] : groups) {
            if (label == own) continue;
            double m = 0.0;
            for (auto j : members) m += euclidean(points, i, points, j);
            b = std::min(b, m / static_cast<double>(members.size()));
        }
        if (std::max(a, b) > 0.0) total += (b - a) / std::max(a, b);
    }
    return total / static_cast<double>(points.rows());
}

double calinski_harabasz(const Matrix& points, const Labels& labels) {
    const Groups groups = group(labels);
    const double n = static_cast<double>(points.rows());
    const double k = static_cast<double>(groups.size());
    const Eigen::RowVectorXd overall = points.colwise().mean();
    double between = 0.0, within = 0.0;
    for (const auto& [label, members] : groups) {
        const Eigen::RowVectorXd c = mean_of(points, members);
        between += static_cast<double>(members.size()) * (c - overall).squaredNorm();
        for (auto i : members) within += (points.row(i) - c).squaredNorm();
    }
    if (within == 0.0) return std::numeric_limits<double>::infinity();
    return (between / (k - 1.0)) / (within / (n - k));
}

double davies_bouldin(const Matrix& points, const Labels& labels) {
    const Groups groups = group(labels);
    std::vector<Eigen::RowVectorXd> centres;
    std::vector<double> scatter;
    for (const auto& [label, members] : groups) {
        const Eigen::RowVectorXd c = mean_of(points, members);
        double s = 0.0;
        for (auto i : members) s += dist(points.row(i), c);
        centres.push_back(c);
        scatter.push_back(s / static_cast<double>(members.size()));
    }
    const std::size_t k = centres.size();
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < k; ++j) {
            if (i != j) worst = std::max(worst, (scatter[i] + scatter[j]) / dist(centres[i], centres[j]));
        }
        total += worst;
    }
    return total / static_cast<double>(k);
}

double dunn(const Matrix& points, const Labels& labels) {
    const Groups groups = group(labels);
    double min_sep = std::numeric_limits<double>::infinity();
    double max_diam = 0.0;
    for (auto p = groups.begin(); p != groups.end(); ++p) {
        const auto& a = p->second;
        for (std::size_t x = 0; x < a.size(); ++x) {
            for (std::size_t y = x + 1; y < a.size(); ++y) max_diam = std::max(max_diam, euclidean(points, a[x], points, a[y]));
        }
        for (auto q = std::next(p); q != groups.end(); ++q) {
            for (auto i : a) {
                for (auto j : q->second) min_sep = std::min(min_sep, euclidean(points, i, points, j));
            }
        }
    }
    if (max_diam == 0.0) return std::numeric_limits<double>::infinity();
    return min_sep / max_diam;
}

double xie_beni(const Matrix& points, const Matrix& memberships, const Matrix& centroids, double m) {
    double num = 0.0;
    for (Eigen::Index j = 0; j < centroids.rows(); ++j) {
        for (Eigen::Index i = 0; i < points.rows(); ++i) {
            double sq = 0.0;
            for (Eigen::Index c = 0; c < points.cols(); ++c) sq += std::pow(points(i, c) - centroids(j, c), 2);
            num += std::pow(memberships(i, j), m) * sq;
        }
    }
    double min_sq = std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < centroids.rows(); ++a) {
        for (Eigen::Index b = 0; b < centroids.rows(); ++b) {
            if (a != b) min_sq = std::min(min_sq, (centroids.row(a) - centroids.row(b)).squaredNorm());
        }
    }
    return num / (static_cast<double>(points.rows()) * min_sq);
}

double xie_beni(const Matrix& points, const Labels& labels) {
    const Groups groups = group(labels);
    Matrix centres(static_cast<Eigen::Index>(groups.size()), points.cols());
    Matrix u = Matrix::Zero(points.rows(), centres.rows());
    Eigen::Index j = 0;
    for (const auto& [label, members] : groups) {
        centres.row(j) = mean_of(points, members);
        for (auto i : members) u(i, j) = 1.0;
        ++j;
    }
    return xie_beni(points, u, centres, 2.0);
}

Matrix fcm_memberships(const Matrix& points, const Matrix& centroids, double m) {
    Matrix u(points.rows(), centroids.rows());
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        for (Eigen::Index j = 0; j < centroids.rows(); ++j) {
            double denom = 0.0;
            for (Eigen::Index l = 0; l < centroids.rows(); ++l) {
                denom += std::pow(euclidean(points, i, centroids, j) / euclidean(points, i, centroids, l), 2.0 / (m - 1.0));
            }
            u(i, j) = 1.0 / denom;
        }
    }
    return u;
}

Matrix fcm_centroids(const Matrix& points, const Matrix& memberships, double m) {
    Matrix c(memberships.cols(), points.cols());
    for (Eigen::Index j = 0; j < memberships.cols(); ++j) {
        double w = 0.0;
        Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(points.cols());
        for (Eigen::Index i = 0; i < points.rows(); ++i) {
            w += std::pow(memberships(i, j), m);
            acc += std::pow(memberships(i, j), m) * points.row(i);
        }
        c.row(j) = acc / w;
    }
    return c;
}

double fcm_objective(const Matrix& points, const Matrix& memberships, const Matrix& centroids, double m) {
    double j = 0.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
            j += std::pow(memberships(i, c), m) * (points.row(i) - centroids.row(c)).squaredNorm();
        }
    }
    return j;
}

}  // namespace cvilab::reference
