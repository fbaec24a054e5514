#include "cvilab/cvi.hpp"

#include "cvilab/error.hpp"
#include "cvilab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace cvilab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_inputs(const Matrix& points, const Labels& labels) {
    if (static_cast<Eigen::Index>(labels.size()) != points.rows()) {
        throw InvalidArgument("cvi: label count does not match point count");
    }
    if (points.rows() == 0) throw InvalidArgument("cvi: no points");
    for (int l : labels) {
        if (l < 0) throw InvalidArgument("cvi: negative label");
    }
}

double centroid_gap(const Matrix& centroids, Eigen::Index a, Eigen::Index b) {
    return kernels::distance(centroids.row(a).data(), centroids.row(b).data(), centroids.cols());
}

}  // namespace

PartitionGeometry partition_summary(const Matrix& points, const Labels& labels) {
    check_inputs(points, labels);
    PartitionGeometry g;
    std::map<int, int> compact;
    for (int l : labels) compact.emplace(l, 0);
    for (auto& [label, index] : compact) {
        index = g.k++;
        g.cluster_ids.push_back(label);
    }
    g.compact_labels.reserve(labels.size());
    for (int l : labels) g.compact_labels.push_back(compact.at(l));

    const Eigen::Index d = points.cols();
    const auto kk = static_cast<std::size_t>(g.k);
    g.cluster_sizes.assign(kk, 0);
    g.centroids = Matrix::Zero(g.k, d);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const int c = g.compact_labels[static_cast<std::size_t>(i)];
        ++g.cluster_sizes[static_cast<std::size_t>(c)];
        g.centroids.row(c) += points.row(i);
    }
    for (int c = 0; c < g.k; ++c) g.centroids.row(c) /= g.cluster_sizes[static_cast<std::size_t>(c)];
    g.data_centroid = points.colwise().mean().transpose();

    g.mean_scatter.assign(kk, 0.0);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const int c = g.compact_labels[static_cast<std::size_t>(i)];
        g.mean_scatter[static_cast<std::size_t>(c)] +=
            kernels::distance(points.row(i).data(), g.centroids.row(c).data(), d);
    }
    for (std::size_t c = 0; c < kk; ++c) g.mean_scatter[c] /= g.cluster_sizes[c];

    g.min_separation_centroids = kInf;
    for (int a = 0; a < g.k; ++a) {
        for (int b = a + 1; b < g.k; ++b) {
            g.min_separation_centroids = std::min(g.min_separation_centroids, centroid_gap(g.centroids, a, b));
        }
    }
    return g;
}

PartitionGeometry compute_geometry(const Matrix& points, const Labels& labels) {
    PartitionGeometry g = partition_summary(points, labels);
    auto extremes = kernels::pair_extremes(points, g.compact_labels, g.k);
    g.diameters = std::move(extremes.diameters);
    g.min_separation_points = extremes.min_separation;
    return g;
}

double silhouette(const Matrix& points, const Labels& labels) {
    const PartitionGeometry g = partition_summary(points, labels);
    if (g.k < 2) throw InvalidArgument("silhouette: need at least 2 clusters");
    if (points.rows() < 3) throw InvalidArgument("silhouette: need at least 3 points");
    const auto s = kernels::silhouette_values(points, g.compact_labels, g.k);
    double total = 0.0;
    for (double v : s) total += v;
    return total / static_cast<double>(s.size());
}

double calinski_harabasz(const Matrix& points, const Labels& labels) {
    const PartitionGeometry g = partition_summary(points, labels);
    const Eigen::Index n = points.rows();
    if (g.k < 2 || g.k >= n) throw InvalidArgument("calinski_harabasz: requires 2 <= k < N");
    double between = 0.0;
    for (int c = 0; c < g.k; ++c) {
        between += g.cluster_sizes[static_cast<std::size_t>(c)] *
                   squared_distance(g.centroids.row(c), g.data_centroid.transpose());
    }
    double within = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        within += squared_distance(points.row(i), g.centroids.row(g.compact_labels[static_cast<std::size_t>(i)]));
    }
    if (within == 0.0) return kInf;
    return (between / (g.k - 1)) / (within / static_cast<double>(n - g.k));
}

double davies_bouldin(const Matrix& points, const Labels& labels) {
    const PartitionGeometry g = partition_summary(points, labels);
    if (g.k < 2) throw InvalidArgument("davies_bouldin: need at least 2 clusters");
    double total = 0.0;
    for (int a = 0; a < g.k; ++a) {
        double worst = 0.0;
        for (int b = 0; b < g.k; ++b) {
            if (a == b) continue;
            const double spread = g.mean_scatter[static_cast<std::size_t>(a)] + g.mean_scatter[static_cast<std::size_t>(b)];
            const double gap = centroid_gap(g.centroids, a, b);
            if (gap == 0.0) {
                if (spread == 0.0) continue;
                throw DegenerateInput("davies_bouldin: clusters " + std::to_string(g.cluster_ids[static_cast<std::size_t>(a)]) +
                                      " and " + std::to_string(g.cluster_ids[static_cast<std::size_t>(b)]) +
                                      " share a centroid");
            }
            worst = std::max(worst, spread / gap);
        }
        total += worst;
    }
    return total / g.k;
}

double dunn(const Matrix& points, const Labels& labels) {
    const PartitionGeometry g = compute_geometry(points, labels);
    if (g.k < 2) throw InvalidArgument("dunn: need at least 2 clusters");
    const double widest = *std::max_element(g.diameters.begin(), g.diameters.end());
    if (widest == 0.0) return kInf;
    return g.min_separation_points / widest;
}

double xie_beni(const Matrix& points, const Matrix& memberships, const Matrix& centroids, double m) {
    const Eigen::Index n = points.rows();
    const Eigen::Index k = centroids.rows();
    if (memberships.rows() != n || memberships.cols() != k || centroids.cols() != points.cols()) {
        throw InvalidArgument("xie_beni: shape mismatch");
    }
    if (k < 2) throw InvalidArgument("xie_beni: need at least 2 clusters");
    double min_gap = kInf;
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = a + 1; b < k; ++b) min_gap = std::min(min_gap, centroid_gap(centroids, a, b));
    }
    if (min_gap == 0.0) throw DegenerateInput("xie_beni: coincident centroids");
    const double compactness = kernels::fcm_objective(points, memberships, centroids, m);
    return compactness / (static_cast<double>(n) * min_gap * min_gap);
}

double xie_beni(const Matrix& points, const Labels& labels) {
    const PartitionGeometry g = partition_summary(points, labels);
    if (g.k < 2) throw InvalidArgument("xie_beni: need at least 2 clusters");
    Matrix onehot = Matrix::Zero(points.rows(), g.k);
    for (Eigen::Index i = 0; i < points.rows(); ++i) onehot(i, g.compact_labels[static_cast<std::size_t>(i)]) = 1.0;
    return xie_beni(points, onehot, g.centroids, 1.0);
}

std::string_view index_name(CviIndex index) {
    switch (index) {
        case CviIndex::sh: return "sh";
        case CviIndex::ch: return "ch";
        case CviIndex::db: return "db";
        case CviIndex::di: return "di";
        case CviIndex::xb: return "xb";
    }
    return "?";
}

bool higher_is_better(CviIndex index) {
    return index == CviIndex::sh || index == CviIndex::ch || index == CviIndex::di;
}

const CviValue& CviReport::at(CviIndex index) const {
    switch (index) {
        case CviIndex::sh: return sh;
        case CviIndex::ch: return ch;
        case CviIndex::db: return db;
        case CviIndex::di: return di;
        case CviIndex::xb: return xb;
    }
    return sh;
}

CviValue& CviReport::at(CviIndex index) {
    return const_cast<CviValue&>(static_cast<const CviReport&>(*this).at(index));
}

namespace {

template <typename F>
CviValue guarded(F&& compute) {
    CviValue v;
    try {
        v.value = compute();
        if (std::isinf(v.value)) {
            v.status = CviStatus::infinite;
            v.note = "unbounded: zero denominator";
        } else {
            v.status = CviStatus::ok;
        }
    } catch (const Error& e) {
        v.value = std::numeric_limits<double>::quiet_NaN();
        v.status = CviStatus::undefined;
        v.note = e.what();
    }
    return v;
}

CviReport crisp_report(const Matrix& points, const Labels& labels) {
    CviReport r;
    r.sh = guarded([&] { return silhouette(points, labels); });
    r.ch = guarded([&] { return calinski_harabasz(points, labels); });
    r.db = guarded([&] { return davies_bouldin(points, labels); });
    r.di = guarded([&] { return dunn(points, labels); });
    r.k_effective = partition_summary(points, labels).k;
    return r;
}

}  // namespace

CviReport evaluate_all(const Matrix& points, const Labels& labels) {
    CviReport r = crisp_report(points, labels);
    r.xb = guarded([&] { return xie_beni(points, labels); });
    r.fuzzy = false;
    return r;
}

CviReport evaluate_all(const Matrix& points, const ClusterModel& model) {
    if (model.memberships.rows() != points.rows()) {
        throw InvalidArgument("evaluate_all: model was fitted on a different point set");
    }
    CviReport r = crisp_report(points, model.labels);
    Matrix centroids = model.centroids;
    if (centroids.cols() != points.cols()) {
        centroids = Matrix::Zero(model.k(), points.cols());
        kernels::fcm_centroids(points, model.memberships, model.fuzzifier, centroids);
    }
    r.xb = guarded([&] { return xie_beni(points, model.memberships, centroids, model.fuzzifier); });
    r.fuzzy = true;
    return r;
}

}  // namespace cvilab
