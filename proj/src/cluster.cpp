#include "cvilab/cluster.hpp"

#include "cvilab/error.hpp"
#include "cvilab/kernels.hpp"
#include "cvilab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cvilab {

void FcmConfig::validate() const {
    if (k_max < 2) throw InvalidArgument("fcm: k_max must be at least 2");
    if (k < 2 || k > k_max) {
        throw InvalidArgument("fcm: k = " + std::to_string(k) + " outside [2, " + std::to_string(k_max) + "]");
    }
    if (!(m > 1.0) || !std::isfinite(m)) throw InvalidArgument("fcm: fuzzifier must exceed 1");
    if (max_iter < 1) throw InvalidArgument("fcm: max_iter must be positive");
    if (!(tol > 0.0)) throw InvalidArgument("fcm: tol must be positive");
    if (restarts < 1) throw InvalidArgument("fcm: restarts must be positive");
}

Matrix initial_centroids(const Matrix& data, int k, std::uint64_t seed) {
    const Eigen::Index n = data.rows();
    Rng rng(seed);
    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    std::vector<double> nearest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    Matrix centroids(k, data.cols());

    auto take = [&](Eigen::Index idx, int slot) {
        taken[static_cast<std::size_t>(idx)] = true;
        centroids.row(slot) = data.row(idx);
        for (Eigen::Index i = 0; i < n; ++i) {
            nearest[static_cast<std::size_t>(i)] =
                std::min(nearest[static_cast<std::size_t>(i)], squared_distance(data.row(i), data.row(idx)));
        }
    };

    take(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))), 0);
    for (int slot = 1; slot < k; ++slot) {
        double total = 0.0;
        Eigen::Index available = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (taken[static_cast<std::size_t>(i)]) continue;
            total += nearest[static_cast<std::size_t>(i)];
            ++available;
        }
        Eigen::Index pick = -1;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double run = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (taken[static_cast<std::size_t>(i)]) continue;
                run += nearest[static_cast<std::size_t>(i)];
                pick = i;
                if (run > target && nearest[static_cast<std::size_t>(i)] > 0.0) break;
            }
        } else {
            // Only duplicates of chosen points remain: pick uniformly among them.
            auto nth = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(available)));
            for (Eigen::Index i = 0; i < n; ++i) {
                if (taken[static_cast<std::size_t>(i)]) continue;
                if (nth-- == 0) {
                    pick = i;
                    break;
                }
            }
        }
        take(pick, slot);
    }
    return centroids;
}

ClusterModel fit_fcm_from(const Matrix& data, Matrix initial, const FcmConfig& config) {
    ClusterModel model;
    model.fuzzifier = config.m;
    model.centroids = std::move(initial);
    Matrix previous;
    for (int iter = 0; iter < config.max_iter; ++iter) {
        kernels::fcm_memberships(data, model.centroids, config.m, model.memberships);
        model.objective_trace.push_back(kernels::fcm_objective(data, model.memberships, model.centroids, config.m));
        previous = model.centroids;
        kernels::fcm_centroids(data, model.memberships, config.m, model.centroids);
        model.iterations = iter + 1;
        double shift = 0.0;
        for (Eigen::Index j = 0; j < model.centroids.rows(); ++j) {
            shift = std::max(shift, std::sqrt(squared_distance(model.centroids.row(j), previous.row(j))));
        }
        if (shift < config.tol) {
            model.converged = true;
            break;
        }
    }
    // Final memberships consistent with the final centroids.
    kernels::fcm_memberships(data, model.centroids, config.m, model.memberships);
    model.objective_trace.push_back(kernels::fcm_objective(data, model.memberships, model.centroids, config.m));
    model.labels = harden(model.memberships);
    std::vector<int> counts(static_cast<std::size_t>(model.k()), 0);
    for (int l : model.labels) ++counts[static_cast<std::size_t>(l)];
    model.empty_cluster_warning = std::find(counts.begin(), counts.end(), 0) != counts.end();
    return model;
}

ClusterModel fit_fcm(const Matrix& data, const FcmConfig& config) {
    config.validate();
    if (data.rows() <= config.k) {
        throw InvalidArgument("fcm: need more points (" + std::to_string(data.rows()) + ") than clusters (" +
                              std::to_string(config.k) + ")");
    }
    if (data.cols() < 1) throw InvalidArgument("fcm: data has no columns");
    if (!data.allFinite()) throw InvalidArgument("fcm: non-finite data");

    std::vector<ClusterModel> runs(static_cast<std::size_t>(config.restarts));
#pragma omp parallel for schedule(dynamic, 1)
    for (int r = 0; r < config.restarts; ++r) {
        runs[static_cast<std::size_t>(r)] =
            fit_fcm_from(data, initial_centroids(data, config.k, derive_seed(config.seed, static_cast<std::uint64_t>(r))),
                         config);
    }
    std::size_t best = 0;
    for (std::size_t r = 1; r < runs.size(); ++r) {
        if (runs[r].objective_trace.back() < runs[best].objective_trace.back()) best = r;
    }
    ClusterModel model = std::move(runs[best]);
    model.best_restart = static_cast<int>(best);
    return model;
}

double default_fuzzifier(const Matrix&) { return 2.0; }

double estimate_fuzzifier(const Matrix& data, const FuzzifierEstimator& estimator) {
    if (data.rows() < 2) throw InvalidArgument("estimate_fuzzifier: need at least 2 rows");
    const double m = estimator(data);
    if (!(m > 1.0 && m <= 5.0)) {
        throw InvalidArgument("estimate_fuzzifier: estimator returned " + std::to_string(m) +
                              ", fuzzifier must lie in (1, 5]");
    }
    return m;
}

double fuzzy_partition_coefficient(const Matrix& memberships) {
    if (memberships.rows() == 0 || memberships.cols() == 0) {
        throw InvalidArgument("fuzzy_partition_coefficient: empty membership matrix");
    }
    // Compensated sum of squares (error-free products and sums), so the
    // result is accurate to about twice working precision before the final
    // rounding; uniform rows then give exactly 1/k.
    double hi = 0.0;
    double lo = 0.0;
    for (Eigen::Index i = 0; i < memberships.rows(); ++i) {
        for (Eigen::Index j = 0; j < memberships.cols(); ++j) {
            const double u = memberships(i, j);
            const double p = u * u;
            const double p_err = std::fma(u, u, -p);
            const double s = hi + p;
            const double z = s - hi;
            const double s_err = (hi - (s - z)) + (p - z);
            hi = s;
            lo += p_err + s_err;
        }
    }
    const double n = static_cast<double>(memberships.rows());
    const double q = hi / n;
    return q + (std::fma(-q, n, hi) + lo) / n;
}

Labels harden(const Matrix& memberships) {
    Labels labels(static_cast<std::size_t>(memberships.rows()));
    for (Eigen::Index i = 0; i < memberships.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < memberships.cols(); ++j) {
            if (memberships(i, j) > memberships(i, best)) best = j;
        }
        labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return labels;
}

ClusterCountSelection select_cluster_count(const Matrix& data, const FcmConfig& base, int k_min, int k_max) {
    if (k_min < 2 || k_max < k_min) throw InvalidArgument("select_cluster_count: invalid k range");
    if (k_max > data.rows() - 1) {
        throw InvalidArgument("select_cluster_count: k_max must not exceed N - 1");
    }
    ClusterCountSelection out;
    double best_fpc = -1.0;
    for (int k = k_min; k <= k_max; ++k) {
        FcmConfig config = base;
        config.k = k;
        config.k_max = std::max(config.k_max, k_max);
        ClusterModel model = fit_fcm(data, config);
        const double fpc = fuzzy_partition_coefficient(model.memberships);
        out.ks.push_back(k);
        out.fpc.push_back(fpc);
        if (fpc > best_fpc) {
            best_fpc = fpc;
            out.best_k = k;
            out.model = std::move(model);
        }
    }
    return out;
}

}  // namespace cvilab
