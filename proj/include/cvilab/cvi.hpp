#pragma once

#include "cvilab/cluster.hpp"
#include "cvilab/matrix.hpp"

#include <array>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace cvilab {

// Shared statistics of a crisp partition. Labels passed to the CVI functions
// may use any nonnegative integers; clusters are the distinct values present,
// ordered by value.
struct PartitionGeometry {
    int k = 0;
    Labels compact_labels;                 // relabelled to [0, k)
    std::vector<int> cluster_ids;          // original label of each compact cluster
    Matrix centroids;                      // k x d
    Vector data_centroid;
    std::vector<int> cluster_sizes;
    std::vector<double> diameters;         // max pairwise intra-cluster distance
    std::vector<double> mean_scatter;      // mean member distance to centroid
    double min_separation_points = 0.0;    // single linkage
    double min_separation_centroids = 0.0;
};

// Centroids, sizes and scatter only; no O(N^2) pass.
PartitionGeometry partition_summary(const Matrix& points, const Labels& labels);
PartitionGeometry compute_geometry(const Matrix& points, const Labels& labels);

double silhouette(const Matrix& points, const Labels& labels);
// +infinity when the within-cluster scatter is zero.
double calinski_harabasz(const Matrix& points, const Labels& labels);
double davies_bouldin(const Matrix& points, const Labels& labels);
// +infinity when every cluster is a singleton.
double dunn(const Matrix& points, const Labels& labels);
double xie_beni(const Matrix& points, const Labels& labels);
double xie_beni(const Matrix& points, const Matrix& memberships, const Matrix& centroids, double m);

enum class CviIndex { sh, ch, db, di, xb };
inline constexpr std::array<CviIndex, 5> kAllIndices{CviIndex::sh, CviIndex::ch, CviIndex::db, CviIndex::di,
                                                     CviIndex::xb};

std::string_view index_name(CviIndex index);
// SH, CH, DI improve upward; DB, XB downward.
bool higher_is_better(CviIndex index);

enum class CviStatus { ok, infinite, undefined };

struct CviValue {
    double value = std::numeric_limits<double>::quiet_NaN();
    CviStatus status = CviStatus::undefined;
    std::string note;  // reason when not ok

    bool ok() const noexcept { return status == CviStatus::ok; }
    bool operator==(const CviValue&) const = default;
};

struct CviReport {
    CviValue sh, ch, db, di, xb;
    int k_effective = 0;
    bool fuzzy = false;

    const CviValue& at(CviIndex index) const;
    CviValue& at(CviIndex index);
    bool operator==(const CviReport&) const = default;
};

// All five indices on a crisp partition. A failing index is recorded in its
// field without aborting the others.
CviReport evaluate_all(const Matrix& points, const Labels& labels);

// Indices on the hardened labels; XB uses the fuzzy memberships. Model
// centroids are used when they live in the same space as `points`, otherwise
// fuzzy-weighted centroids are recomputed there.
CviReport evaluate_all(const Matrix& points, const ClusterModel& model);

}  // namespace cvilab
