#include "cvilab/perturb.hpp"

#include "cvilab/error.hpp"
#include "cvilab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>

namespace cvilab {

namespace {

constexpr double kSignificance = 0.05;

struct ClusterShapes {
    PartitionGeometry summary;
    std::vector<double> radii;  // max member distance to centroid, per compact cluster
};

ClusterShapes cluster_shapes(const Partition& p) {
    ClusterShapes s{partition_summary(p.points, p.labels), {}};
    s.radii.assign(static_cast<std::size_t>(s.summary.k), 0.0);
    for (Eigen::Index i = 0; i < p.points.rows(); ++i) {
        const int c = s.summary.compact_labels[static_cast<std::size_t>(i)];
        auto& r = s.radii[static_cast<std::size_t>(c)];
        r = std::max(r, kernels::distance(p.points.row(i).data(), s.summary.centroids.row(c).data(), p.points.cols()));
    }
    return s;
}

// Index of the nearest centroid, ties to the lowest index.
int nearest_centroid(const double* x, const Matrix& centroids) {
    int best = 0;
    double best_d = kernels::distance(x, centroids.row(0).data(), centroids.cols());
    for (Eigen::Index j = 1; j < centroids.rows(); ++j) {
        const double d = kernels::distance(x, centroids.row(j).data(), centroids.cols());
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(j);
        }
    }
    return best;
}

// Rejection sampler shared by density injection and shrinkage.
void sample_in_ball(const ClusterShapes& shapes, int compact, double radius, double sigma_divisor,
                    int max_attempts, Rng& rng, double* out) {
    const Matrix& centroids = shapes.summary.centroids;
    const Eigen::Index d = centroids.cols();
    const double sigma = radius / sigma_divisor;
    const double* centre = centroids.row(compact).data();
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        for (Eigen::Index c = 0; c < d; ++c) out[c] = centre[c] + sigma * rng.normal();
        if (kernels::distance(out, centre, d) <= radius && nearest_centroid(out, centroids) == compact) return;
    }
    throw DegenerateInput("rejection budget of " + std::to_string(max_attempts) + " exhausted for cluster " +
                          std::to_string(shapes.summary.cluster_ids[static_cast<std::size_t>(compact)]));
}

int compact_index(const ClusterShapes& shapes, int label) {
    const auto& ids = shapes.summary.cluster_ids;
    const auto it = std::find(ids.begin(), ids.end(), label);
    if (it == ids.end()) throw InvalidArgument("no cluster labelled " + std::to_string(label));
    return static_cast<int>(it - ids.begin());
}

CviReport evaluate_variant(const Matrix& points, const Labels& labels, const PerturbConfig& config) {
    if (!config.recluster) return evaluate_all(points, labels);
    FcmConfig fcm = config.recluster_fcm;
    fcm.k = partition_summary(points, labels).k;
    fcm.k_max = std::max(fcm.k_max, fcm.k);
    return evaluate_all(points, fit_fcm(points, fcm).labels);
}

Labels renumber(const Labels& labels) {
    std::map<int, int> compact;
    for (int l : labels) compact.emplace(l, 0);
    int next = 0;
    for (auto& [label, index] : compact) index = next++;
    Labels out;
    out.reserve(labels.size());
    for (int l : labels) out.push_back(compact.at(l));
    return out;
}

Partition subset(const Partition& p, const std::vector<bool>& keep) {
    const auto n = static_cast<Eigen::Index>(std::count(keep.begin(), keep.end(), true));
    Partition out{Matrix(n, p.points.cols()), {}};
    out.labels.reserve(static_cast<std::size_t>(n));
    Eigen::Index row = 0;
    for (Eigen::Index i = 0; i < p.points.rows(); ++i) {
        if (!keep[static_cast<std::size_t>(i)]) continue;
        out.points.row(row++) = p.points.row(i);
        out.labels.push_back(p.labels[static_cast<std::size_t>(i)]);
    }
    out.labels = renumber(out.labels);
    return out;
}

// Runs `trial(t, rng)` for every trial in parallel, rethrowing the first
// failure by trial index.
template <typename F>
std::vector<ExperimentRow> run_trials(const PerturbConfig& config, F&& trial) {
    std::vector<ExperimentRow> rows(static_cast<std::size_t>(config.trials));
    std::vector<std::exception_ptr> errors(rows.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (int t = 0; t < config.trials; ++t) {
        try {
            Rng rng(derive_seed(derive_seed(config.seed, Stream::perturb), static_cast<std::uint64_t>(t)));
            rows[static_cast<std::size_t>(t)] = {"trial " + std::to_string(t), {}, trial(t, rng)};
        } catch (...) {
            errors[static_cast<std::size_t>(t)] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return rows;
}

void summarize_trials(ExperimentReport& report) {
    CviReport avg;
    avg.k_effective = report.baseline.k_effective;
    avg.fuzzy = false;
    for (std::size_t x = 0; x < kAllIndices.size(); ++x) {
        const CviIndex index = kAllIndices[x];
        double sum = 0.0;
        int used = 0;
        for (const auto& row : report.rows) {
            const CviValue& v = row.cvi.at(index);
            if (!v.ok()) continue;
            sum += v.value;
            ++used;
        }
        report.degenerate_trials[x] = static_cast<int>(report.rows.size()) - used;
        CviValue& out = avg.at(index);
        if (used > 0) {
            out.value = sum / used;
            out.status = CviStatus::ok;
        } else {
            out.status = CviStatus::undefined;
            out.note = "every trial was degenerate";
        }
    }
    report.average = avg;
}

void check_trial_partition(const Partition& baseline, const char* what) {
    const auto g = partition_summary(baseline.points, baseline.labels);
    if (g.k < 2) {
        throw InvalidArgument(std::string(what) + ": need at least 2 non-singleton clusters");
    }
}

}  // namespace

void PerturbConfig::validate() const {
    if (trials < 1) throw InvalidArgument("perturb: trials must be at least 1");
    if (!(shrink_factor > 0.0 && shrink_factor < 1.0)) {
        throw InvalidArgument("perturb: shrink factor must lie in (0, 1)");
    }
    if (!(density_add_fraction >= 0.0) || !std::isfinite(density_add_fraction)) {
        throw InvalidArgument("perturb: density fraction must be nonnegative");
    }
    if (!(sigma_divisor > 0.0) || !std::isfinite(sigma_divisor)) {
        throw InvalidArgument("perturb: sigma divisor must be positive");
    }
    if (max_rejection_attempts < 1) throw InvalidArgument("perturb: rejection budget must be positive");
}

std::string_view kind_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::outliers: return "outliers";
        case ExperimentKind::density: return "density";
        case ExperimentKind::diameter: return "diameter";
    }
    return "?";
}

ExperimentKind parse_kind(std::string_view name) {
    for (auto k : {ExperimentKind::outliers, ExperimentKind::density, ExperimentKind::diameter}) {
        if (kind_name(k) == name) return k;
    }
    throw InvalidArgument("unknown experiment kind '" + std::string(name) + "'");
}

std::string_view verdict_name(Verdict verdict) {
    switch (verdict) {
        case Verdict::unaffected: return "UNAFFECTED";
        case Verdict::improves_on_removal: return "IMPROVES_ON_REMOVAL";
        case Verdict::improves_on_addition: return "IMPROVES_ON_ADDITION";
        case Verdict::mixed: return "MIXED";
        case Verdict::positive: return "POSITIVE";
        case Verdict::negative: return "NEGATIVE";
        case Verdict::inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

Verdict parse_verdict(std::string_view name) {
    for (auto v : {Verdict::unaffected, Verdict::improves_on_removal, Verdict::improves_on_addition, Verdict::mixed,
                   Verdict::positive, Verdict::negative, Verdict::inconclusive}) {
        if (verdict_name(v) == name) return v;
    }
    throw InvalidArgument("unknown verdict '" + std::string(name) + "'");
}

std::vector<int> find_singleton_clusters(const Labels& labels) {
    std::map<int, int> counts;
    for (int l : labels) ++counts[l];
    std::vector<int> out;
    for (const auto& [label, n] : counts) {
        if (n == 1) out.push_back(label);
    }
    return out;
}

std::vector<int> find_singleton_clusters(const ClusterModel& model) { return find_singleton_clusters(model.labels); }

Partition remove_singletons(const Partition& partition) {
    const auto singles = find_singleton_clusters(partition.labels);
    std::vector<bool> keep(partition.labels.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        keep[i] = !std::binary_search(singles.begin(), singles.end(), partition.labels[i]);
    }
    return subset(partition, keep);
}

ExperimentReport outlier_experiment(const Partition& partition, const PerturbConfig& config) {
    ExperimentReport report;
    report.kind = ExperimentKind::outliers;
    report.config = config;
    report.singleton_clusters = find_singleton_clusters(partition.labels);
    const auto s = report.singleton_clusters.size();
    if (s == 0) throw InvalidArgument("outlier experiment: partition has no singleton clusters");
    if (s > 16) throw InvalidArgument("outlier experiment: too many singleton clusters to enumerate");

    report.baseline = evaluate_variant(partition.points, partition.labels, config);
    const std::size_t variants = std::size_t{1} << s;
    for (std::size_t code = 0; code < variants; ++code) {
        ExperimentRow row;
        row.name = "kept=";
        for (std::size_t b = 0; b < s; ++b) {
            const int kept = static_cast<int>((code >> (s - 1 - b)) & 1U);
            row.included.push_back(kept);
            row.name += kept ? '1' : '0';
        }
        std::vector<bool> keep(partition.labels.size(), true);
        for (std::size_t i = 0; i < keep.size(); ++i) {
            const auto it = std::find(report.singleton_clusters.begin(), report.singleton_clusters.end(),
                                      partition.labels[i]);
            if (it != report.singleton_clusters.end()) {
                keep[i] = row.included[static_cast<std::size_t>(it - report.singleton_clusters.begin())] == 1;
            }
        }
        const Partition variant = subset(partition, keep);
        row.cvi = evaluate_variant(variant.points, variant.labels, config);
        report.rows.push_back(std::move(row));
    }
    report.judgements = judge_hypothesis(report);
    return report;
}

Matrix inject_density(const Partition& partition, int cluster_label, int count, const PerturbConfig& config,
                      Rng& rng) {
    config.validate();
    if (count < 1) throw InvalidArgument("inject_density: count must be at least 1");
    const ClusterShapes shapes = cluster_shapes(partition);
    const int j = compact_index(shapes, cluster_label);
    const double radius = shapes.radii[static_cast<std::size_t>(j)];
    if (!(radius > 0.0)) {
        throw InvalidArgument("inject_density: cluster " + std::to_string(cluster_label) + " has zero radius");
    }
    Matrix out(count, partition.points.cols());
    for (int n = 0; n < count; ++n) {
        sample_in_ball(shapes, j, radius, config.sigma_divisor, config.max_rejection_attempts, rng, out.row(n).data());
    }
    return out;
}

ExperimentReport density_experiment(const Partition& partition, const PerturbConfig& config) {
    config.validate();
    ExperimentReport report;
    report.kind = ExperimentKind::density;
    report.config = config;
    report.singleton_clusters = find_singleton_clusters(partition.labels);
    const Partition base = remove_singletons(partition);
    check_trial_partition(base, "density experiment");
    report.baseline = evaluate_variant(base.points, base.labels, config);

    const ClusterShapes shapes = cluster_shapes(base);
    std::vector<int> counts(static_cast<std::size_t>(shapes.summary.k));
    Eigen::Index added = 0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        counts[c] = static_cast<int>(std::ceil(config.density_add_fraction * shapes.summary.cluster_sizes[c]));
        added += counts[c];
    }

    report.rows = run_trials(config, [&](int, Rng& rng) {
        Partition aug{Matrix(base.points.rows() + added, base.points.cols()), base.labels};
        aug.points.topRows(base.points.rows()) = base.points;
        aug.labels.reserve(static_cast<std::size_t>(aug.points.rows()));
        Eigen::Index row = base.points.rows();
        for (int c = 0; c < shapes.summary.k; ++c) {
            for (int n = 0; n < counts[static_cast<std::size_t>(c)]; ++n) {
                sample_in_ball(shapes, c, shapes.radii[static_cast<std::size_t>(c)], config.sigma_divisor,
                               config.max_rejection_attempts, rng, aug.points.row(row++).data());
                aug.labels.push_back(c);
            }
        }
        return evaluate_variant(aug.points, aug.labels, config);
    });
    summarize_trials(report);
    report.judgements = judge_hypothesis(report);
    return report;
}

Matrix shrink_clusters(const Partition& partition, const PerturbConfig& config, Rng& rng) {
    config.validate();
    const ClusterShapes shapes = cluster_shapes(partition);
    if (shapes.summary.k < 2) throw InvalidArgument("shrink_clusters: need at least 2 clusters");
    Matrix out = partition.points;
    const Eigen::Index d = out.cols();
    for (int c = 0; c < shapes.summary.k; ++c) {
        if (shapes.summary.cluster_sizes[static_cast<std::size_t>(c)] < 2) continue;
        const double radius = config.shrink_factor * shapes.radii[static_cast<std::size_t>(c)];
        if (!(radius > 0.0)) continue;
        const double* centre = shapes.summary.centroids.row(c).data();
        for (Eigen::Index i = 0; i < out.rows(); ++i) {
            if (shapes.summary.compact_labels[static_cast<std::size_t>(i)] != c) continue;
            if (kernels::distance(out.row(i).data(), centre, d) <= radius) continue;
            sample_in_ball(shapes, c, radius, config.sigma_divisor, config.max_rejection_attempts, rng,
                           out.row(i).data());
        }
    }
    return out;
}

ExperimentReport diameter_experiment(const Partition& partition, const PerturbConfig& config) {
    config.validate();
    ExperimentReport report;
    report.kind = ExperimentKind::diameter;
    report.config = config;
    report.singleton_clusters = find_singleton_clusters(partition.labels);
    const Partition base = remove_singletons(partition);
    check_trial_partition(base, "diameter experiment");
    report.baseline = evaluate_variant(base.points, base.labels, config);
    report.rows = run_trials(config, [&](int, Rng& rng) {
        const Matrix shrunk = shrink_clusters(base, config, rng);
        return evaluate_variant(shrunk, base.labels, config);
    });
    summarize_trials(report);
    report.judgements = judge_hypothesis(report);
    return report;
}

double binomial_upper_tail(int trials, int successes) {
    if (trials < 0) throw InvalidArgument("binomial_upper_tail: negative trial count");
    if (successes <= 0) return 1.0;
    if (successes > trials) return 0.0;
    const double log_half_n = trials * std::log(0.5);
    const double log_n_fact = std::lgamma(trials + 1.0);
    double tail = 0.0;
    // Sum from the far tail inwards so that small terms accumulate first.
    for (int i = trials; i >= successes; --i) {
        tail += std::exp(log_n_fact - std::lgamma(i + 1.0) - std::lgamma(trials - i + 1.0) + log_half_n);
    }
    return std::min(1.0, tail);
}

namespace {

bool same_value(const CviValue& a, const CviValue& b) {
    if (a.status != b.status) return false;
    if (a.status != CviStatus::ok) return true;
    return std::abs(a.value - b.value) <= 1e-9 * std::max(1.0, std::abs(b.value));
}

// +1 when `a` is better than `b` for this index, -1 when worse, 0 when equal.
int compare(CviIndex index, const CviValue& a, const CviValue& b) {
    if (same_value(a, b)) return 0;
    const double diff = a.value - b.value;
    return (diff > 0) == higher_is_better(index) ? 1 : -1;
}

IndexJudgement judge_outliers(const ExperimentReport& report, CviIndex index) {
    IndexJudgement j;
    const auto& rows = report.rows;
    const bool all_same = std::all_of(rows.begin(), rows.end(),
                                      [&](const ExperimentRow& r) { return same_value(r.cvi.at(index), rows.front().cvi.at(index)); });
    if (all_same) {
        j.verdict = Verdict::unaffected;
        return j;
    }
    const auto count_kept = [](const ExperimentRow& r) { return std::count(r.included.begin(), r.included.end(), 1); };
    const ExperimentRow* none = nullptr;
    const ExperimentRow* all = nullptr;
    std::vector<const ExperimentRow*> singles;
    for (const auto& r : rows) {
        const auto kept = count_kept(r);
        if (kept == 0) none = &r;
        if (kept == static_cast<long>(r.included.size())) all = &r;
        if (kept == 1) singles.push_back(&r);
    }
    const bool comparable = none && all && std::all_of(rows.begin(), rows.end(), [&](const ExperimentRow& r) {
                                return r.cvi.at(index).ok();
                            });
    if (!comparable) {
        j.verdict = Verdict::mixed;
        return j;
    }
    const int overall = compare(index, all->cvi.at(index), none->cvi.at(index));
    bool consistent = overall != 0;
    for (const ExperimentRow* r : singles) {
        const int s = compare(index, r->cvi.at(index), none->cvi.at(index));
        if (s != 0 && s != overall) consistent = false;
    }
    if (!consistent) {
        j.verdict = Verdict::mixed;
    } else {
        j.verdict = overall > 0 ? Verdict::improves_on_addition : Verdict::improves_on_removal;
    }
    return j;
}

IndexJudgement judge_trials(const ExperimentReport& report, CviIndex index) {
    IndexJudgement j;
    const CviValue& base = report.baseline.at(index);
    if (!base.ok()) {
        j.verdict = Verdict::inconclusive;
        return j;
    }
    const double tie_band = 1e-12 * std::max(1.0, std::abs(base.value));
    for (const auto& row : report.rows) {
        const CviValue& v = row.cvi.at(index);
        if (!v.ok()) continue;
        const double delta = (v.value - base.value) * (higher_is_better(index) ? 1.0 : -1.0);
        if (std::abs(delta) <= tie_band) {
            ++j.ties;
        } else if (delta > 0) {
            ++j.improved;
        } else {
            ++j.worsened;
        }
    }
    const int n = j.improved + j.worsened;
    const double p_up = binomial_upper_tail(n, j.improved);
    const double p_down = binomial_upper_tail(n, j.worsened);
    if (n > 0 && p_up < kSignificance) {
        j.verdict = Verdict::positive;
        j.p_value = p_up;
    } else if (n > 0 && p_down < kSignificance) {
        j.verdict = Verdict::negative;
        j.p_value = p_down;
    } else {
        j.verdict = Verdict::inconclusive;
        j.p_value = std::min(p_up, p_down);
    }
    return j;
}

}  // namespace

std::array<IndexJudgement, 5> judge_hypothesis(const ExperimentReport& report) {
    if (report.rows.empty()) throw InvalidArgument("judge_hypothesis: report has no variants or trials");
    std::array<IndexJudgement, 5> out{};
    for (std::size_t x = 0; x < kAllIndices.size(); ++x) {
        out[x] = report.kind == ExperimentKind::outliers ? judge_outliers(report, kAllIndices[x])
                                                          : judge_trials(report, kAllIndices[x]);
    }
    return out;
}

}  // namespace cvilab
