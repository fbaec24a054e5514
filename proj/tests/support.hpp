#pragma once

#include "cvilab/matrix.hpp"
#include "cvilab/perturb.hpp"
#include "cvilab/rng.hpp"

#include <cmath>
#include <filesystem>
#include <string>

namespace testing {

// Isotropic Gaussian blobs with centres on the coordinate axes, `sep` apart
// from the origin.
inline cvilab::Partition gaussian_blobs(int k, int per_cluster, int d, double sep, double sigma,
                                        std::uint64_t seed) {
    cvilab::Rng rng(seed);
    cvilab::Partition p{cvilab::Matrix(k * per_cluster, d), {}};
    for (int c = 0; c < k; ++c) {
        for (int n = 0; n < per_cluster; ++n) {
            const int row = c * per_cluster + n;
            for (int j = 0; j < d; ++j) {
                double centre = 0.0;
                if (c < d && j == c) centre = sep;
                if (c >= d && j == c - d) centre = -sep;
                p.points(row, j) = centre + sigma * rng.normal();
            }
            p.labels.push_back(c);
        }
    }
    return p;
}

inline cvilab::Partition append_point(const cvilab::Partition& p, const cvilab::Vector& x, int label) {
    cvilab::Partition out{cvilab::Matrix(p.points.rows() + 1, p.points.cols()), p.labels};
    out.points.topRows(p.points.rows()) = p.points;
    out.points.row(p.points.rows()) = x.transpose();
    out.labels.push_back(label);
    return out;
}

// {(0,0),(0,1)} and {(10,0),(10,1)}
inline cvilab::Partition four_points() {
    cvilab::Partition p{cvilab::Matrix(4, 2), {0, 0, 1, 1}};
    p.points << 0, 0, 0, 1, 10, 0, 10, 1;
    return p;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("cvilab_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace testing
