#include "cvilab/cluster.hpp"
#include "cvilab/cvi.hpp"
#include "cvilab/error.hpp"
#include "cvilab/reference.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace cvilab;

TEST_CASE("four-point instance matches hand computation") {
    const auto p = testing::four_points();
    // a = 1 for every point; b = (10 + sqrt(101)) / 2.
    const double b = (10.0 + std::sqrt(101.0)) / 2.0;
    const double sh = (b - 1.0) / b;
    CHECK(silhouette(p.points, p.labels) == doctest::Approx(sh).epsilon(1e-14));
    CHECK(silhouette(p.points, p.labels) == doctest::Approx(0.900249).epsilon(1e-6));
    CHECK(std::abs(calinski_harabasz(p.points, p.labels) - 200.0) < 1e-9);
    CHECK(std::abs(davies_bouldin(p.points, p.labels) - 0.1) < 1e-12);
    CHECK(std::abs(dunn(p.points, p.labels) - 10.0) < 1e-12);
    CHECK(std::abs(xie_beni(p.points, p.labels) - 0.0025) < 1e-12);

    const CviReport r = evaluate_all(p.points, p.labels);
    CHECK(r.k_effective == 2);
    CHECK_FALSE(r.fuzzy);
    for (CviIndex i : kAllIndices) CHECK(r.at(i).ok());
}

TEST_CASE("geometry statistics") {
    auto p = testing::four_points();
    p = testing::append_point(p, Vector::Constant(2, 50.0), 7);
    const auto g = compute_geometry(p.points, p.labels);
    CHECK(g.k == 3);
    CHECK(g.cluster_ids == std::vector<int>{0, 1, 7});
    CHECK(g.cluster_sizes == std::vector<int>{2, 2, 1});
    CHECK(g.diameters[2] == 0.0);
    CHECK(g.mean_scatter[2] == 0.0);
    CHECK(g.diameters[0] == doctest::Approx(1.0));
    CHECK(g.mean_scatter[0] == doctest::Approx(0.5));
    CHECK(g.min_separation_points == doctest::Approx(10.0));
    CHECK(g.min_separation_centroids == doctest::Approx(10.0));
    CHECK(g.data_centroid(0) == doctest::Approx(14.0));
}

TEST_CASE("silhouette conventions") {
    Matrix x(3, 1);
    x << 0, 1, 3;
    CHECK(silhouette(x, {0, 1, 2}) == 0.0);
    CHECK_THROWS_AS(silhouette(x, {0, 0, 0}), InvalidArgument);
}

TEST_CASE("degenerate sentinels and errors") {
    Matrix x(4, 1);
    x << 0, 0, 5, 5;
    CHECK(calinski_harabasz(x, {0, 0, 1, 1}) == std::numeric_limits<double>::infinity());
    Matrix pair(2, 1);
    pair << 0, 1;
    CHECK(davies_bouldin(pair, {0, 1}) == 0.0);
    CHECK(dunn(pair, {0, 1}) == std::numeric_limits<double>::infinity());

    // Two distinct clusters sharing a centroid.
    Matrix y(4, 1);
    y << -1, 1, -2, 2;
    CHECK_THROWS_AS(davies_bouldin(y, {0, 0, 1, 1}), DegenerateInput);
    CHECK_THROWS_AS(xie_beni(y, {0, 0, 1, 1}), DegenerateInput);

    const CviReport r = evaluate_all(x, {0, 0, 1, 1});
    CHECK(r.ch.status == CviStatus::infinite);
    CHECK(r.di.status == CviStatus::infinite);
    CHECK(r.sh.ok());
    CHECK(r.db.ok());

    const CviReport bad = evaluate_all(y, {0, 0, 1, 1});
    CHECK(bad.db.status == CviStatus::undefined);
    CHECK_FALSE(bad.db.note.empty());
    CHECK(bad.sh.ok());
    CHECK(bad.di.ok());
}

TEST_CASE("random instances agree with the naive reference") {
    for (int t = 0; t < 40; ++t) {
        Rng rng(derive_seed(11, static_cast<std::uint64_t>(t)));
        const int n = 10 + static_cast<int>(rng.below(120));
        const int k = 2 + static_cast<int>(rng.below(6));
        const int d = 1 + static_cast<int>(rng.below(8));
        Matrix x(n, d);
        Labels labels(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            labels[static_cast<std::size_t>(i)] = i < k ? i : static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
            for (int j = 0; j < d; ++j) x(i, j) = rng.normal() + 3.0 * labels[static_cast<std::size_t>(i)];
        }
        CAPTURE(t);
        CHECK(testing::rel_err(silhouette(x, labels), reference::silhouette(x, labels)) < 1e-10);
        CHECK(testing::rel_err(calinski_harabasz(x, labels), reference::calinski_harabasz(x, labels)) < 1e-9);
        CHECK(testing::rel_err(davies_bouldin(x, labels), reference::davies_bouldin(x, labels)) < 1e-10);
        CHECK(testing::rel_err(dunn(x, labels), reference::dunn(x, labels)) < 1e-12);
        CHECK(testing::rel_err(xie_beni(x, labels), reference::xie_beni(x, labels)) < 1e-10);

        Matrix u(n, k);
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < k; ++j) s += u(i, j) = rng.uniform() + 1e-3;
            u.row(i) /= s;
        }
        Matrix c(k, d);
        for (int j = 0; j < k; ++j)
            for (int q = 0; q < d; ++q) c(j, q) = rng.normal() * 5.0;
        CHECK(testing::rel_err(xie_beni(x, u, c, 2.0), reference::xie_beni(x, u, c, 2.0)) < 1e-10);
    }
}

TEST_CASE("fuzzy XB with one-hot memberships equals crisp XB exactly") {
    const auto p = testing::gaussian_blobs(3, 20, 2, 6.0, 1.0, 5);
    const auto g = compute_geometry(p.points, p.labels);
    Matrix u = Matrix::Zero(p.points.rows(), 3);
    for (std::size_t i = 0; i < p.labels.size(); ++i) u(static_cast<Eigen::Index>(i), p.labels[i]) = 1.0;
    for (double m : {1.5, 2.0, 3.7}) {
        CHECK(xie_beni(p.points, u, g.centroids, m) == xie_beni(p.points, p.labels));
    }
}

TEST_CASE("invariance under relabelling, rigid motion and scaling") {
    const auto p = testing::gaussian_blobs(4, 15, 3, 5.0, 1.0, 21);
    const CviReport base = evaluate_all(p.points, p.labels);

    Labels permuted = p.labels;
    const int perm[] = {12, 3, 40, 0};
    for (auto& l : permuted) l = perm[l];
    const CviReport relabelled = evaluate_all(p.points, permuted);

    const double angle = 0.7;
    Eigen::Matrix3d rot;
    rot << std::cos(angle), -std::sin(angle), 0, std::sin(angle), std::cos(angle), 0, 0, 0, 1;
    Matrix moved = (p.points * rot.transpose()).rowwise() + Eigen::RowVector3d(4, -2, 9);
    const CviReport rigid = evaluate_all(moved, p.labels);
    const CviReport scaled = evaluate_all(Matrix(p.points * 3.5), p.labels);

    for (CviIndex i : kAllIndices) {
        CAPTURE(index_name(i));
        const double v = base.at(i).value;
        CHECK(testing::rel_err(relabelled.at(i).value, v) < 1e-12);
        CHECK(testing::rel_err(rigid.at(i).value, v) < 1e-9);
        CHECK(testing::rel_err(scaled.at(i).value, v) < 1e-9);
    }
}

TEST_CASE("a far singleton leaves Dunn unchanged") {
    const auto p = testing::gaussian_blobs(3, 30, 2, 8.0, 1.0, 3);
    const double before = dunn(p.points, p.labels);
    const auto q = testing::append_point(p, Vector::Constant(2, 500.0), 3);
    CHECK(dunn(q.points, q.labels) == before);
}

TEST_CASE("evaluate_all on a fuzzy model") {
    const auto p = testing::gaussian_blobs(3, 25, 2, 6.0, 0.8, 9);
    FcmConfig cfg;
    cfg.k = 3;
    cfg.seed = 4;
    const ClusterModel model = fit_fcm(p.points, cfg);
    const CviReport r = evaluate_all(p.points, model);
    CHECK(r.fuzzy);
    CHECK(r.k_effective == 3);
    const CviReport crisp = evaluate_all(p.points, model.labels);
    CHECK(r.sh == crisp.sh);
    CHECK(r.ch == crisp.ch);
    CHECK(r.db == crisp.db);
    CHECK(r.di == crisp.di);
    CHECK(testing::rel_err(r.xb.value,
                           reference::xie_beni(p.points, model.memberships, model.centroids, model.fuzzifier)) < 1e-10);
}

TEST_CASE("label validation") {
    const auto p = testing::four_points();
    CHECK_THROWS_AS(silhouette(p.points, {0, 0, 1}), InvalidArgument);
    CHECK_THROWS_AS(silhouette(p.points, {0, 0, -1, 1}), InvalidArgument);
}
