// Acceptance suite: one PASS/FAIL line per criterion.

#include "cvilab/app.hpp"
#include "cvilab/cluster.hpp"
#include "cvilab/cvi.hpp"
#include "cvilab/parallel.hpp"
#include "cvilab/perturb.hpp"
#include "cvilab/reduce.hpp"
#include "cvilab/reference.hpp"
#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace cvilab;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

app::PipelineResult synth_pipeline(int clusters, int size, int outliers, std::optional<int> dprime,
                                   std::optional<int> k, std::uint64_t seed) {
    app::RunConfig c;
    c.synth = app::SynthOptions{clusters, size, 0.05, outliers, OutlierPlacement::far};
    c.dprime = dprime;
    c.k = k;
    c.seed = seed;
    return app::run_pipeline(c);
}

Partition pipeline_partition(const app::PipelineResult& r) { return {r.reduced, r.model.labels}; }

Outcome hand_oracle() {
    Outcome o;
    const auto p = testing::four_points();
    const CviReport r = evaluate_all(p.points, p.labels);
    o.require(std::abs(r.sh.value - 0.900249) <= 1e-6, "SH " + num(r.sh.value));
    o.require(std::abs(r.ch.value - 200.0) <= 1e-9, "CH " + num(r.ch.value));
    o.require(std::abs(r.db.value - 0.1) <= 1e-9, "DB " + num(r.db.value));
    o.require(std::abs(r.di.value - 10.0) <= 1e-9, "DI " + num(r.di.value));
    o.require(std::abs(r.xb.value - 0.0025) <= 1e-9, "XB " + num(r.xb.value));
    return o;
}

Outcome brute_force() {
    Outcome o;
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
        Rng rng(derive_seed(2024, static_cast<std::uint64_t>(t)));
        const int k = 2 + static_cast<int>(rng.below(9));
        const int n = k + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(200 - k)));
        const int d = 1 + static_cast<int>(rng.below(20));
        Matrix centres(k, d);
        for (int j = 0; j < k; ++j)
            for (int q = 0; q < d; ++q) centres(j, q) = 4.0 * rng.normal();
        Matrix x(n, d);
        Labels labels(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const int c = i < k ? i : static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
            labels[static_cast<std::size_t>(i)] = c;
            for (int q = 0; q < d; ++q) x(i, q) = centres(c, q) + rng.normal();
        }
        Matrix u(n, k);
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < k; ++j) s += u(i, j) = rng.uniform() + 1e-6;
            u.row(i) /= s;
        }
        const double pairs[][2] = {
            {silhouette(x, labels), reference::silhouette(x, labels)},
            {calinski_harabasz(x, labels), reference::calinski_harabasz(x, labels)},
            {davies_bouldin(x, labels), reference::davies_bouldin(x, labels)},
            {dunn(x, labels), reference::dunn(x, labels)},
            {xie_beni(x, labels), reference::xie_beni(x, labels)},
            {xie_beni(x, u, centres, 2.0), reference::xie_beni(x, u, centres, 2.0)},
        };
        for (const auto& pr : pairs) {
            const double err = std::abs(pr[0] - pr[1]) / std::max(std::abs(pr[1]), 1e-300);
            worst = std::max(worst, err);
        }
    }
    o.require(worst <= 1e-9, "worst relative error " + num(worst));
    if (o.pass) o.detail = "worst relative error " + num(worst);
    return o;
}

Outcome outlier_invariance() {
    Outcome o;
    const auto r = synth_pipeline(5, 40, 3, std::nullopt, std::nullopt, 7);
    const auto singles = find_singleton_clusters(r.model);
    o.require(singles.size() == 3, std::to_string(singles.size()) + " singleton clusters found");
    if (!o.pass) return o;
    const ExperimentReport rep = outlier_experiment(pipeline_partition(r), PerturbConfig{});
    o.require(rep.rows.size() == 8, "row count");
    const auto& none = rep.rows.front().cvi;
    const auto& all = rep.rows.back().cvi;
    for (const auto& row : rep.rows) {
        o.require(row.cvi.di.ok() && row.cvi.di.value == none.di.value, "DI differs in " + row.name);
        if (&row != &rep.rows.front()) o.require(none.sh.value > row.cvi.sh.value, "SH not maximal vs " + row.name);
        if (&row != &rep.rows.back()) {
            o.require(all.db.value < row.cvi.db.value, "DB not minimal vs " + row.name);
            o.require(all.xb.value < row.cvi.xb.value, "XB not minimal vs " + row.name);
        }
    }
    o.require(rep.judgements[3].verdict == Verdict::unaffected,
              "DI verdict " + std::string(verdict_name(rep.judgements[3].verdict)));
    if (o.pass) o.detail = "DI " + num(none.di.value) + " in all 8 rows";
    return o;
}

Outcome ch_dichotomy() {
    Outcome o;
    // Four blobs placed symmetrically about the origin, so the data centroid
    // is close to the origin.
    const Partition base = testing::gaussian_blobs(4, 40, 2, 10.0, 1.0, 5);
    const Vector centre = base.points.colwise().mean().transpose();
    Vector far_point = centre;
    far_point(0) += 60.0;
    far_point(1) += 45.0;
    const Partition far = testing::append_point(base, far_point, 4);
    const Partition near = testing::append_point(base, centre, 4);
    const auto far_rep = outlier_experiment(far, PerturbConfig{});
    const auto near_rep = outlier_experiment(near, PerturbConfig{});
    const double far_gain = far_rep.rows[1].cvi.ch.value - far_rep.rows[0].cvi.ch.value;
    const double near_gain = near_rep.rows[1].cvi.ch.value - near_rep.rows[0].cvi.ch.value;
    o.require(far_gain > 0.0, "far singleton CH change " + num(far_gain));
    o.require(near_gain < 0.0, "near singleton CH change " + num(near_gain));
    if (o.pass) o.detail = "far +" + num(far_gain) + ", near " + num(near_gain);
    return o;
}

// 5 planted blobs of 100 profiles. PCA is fixed at d' = 3: the sigma =
// radius/4 injection only densifies isotropic clusters of low dimension.
const app::PipelineResult& five_blobs() {
    static const app::PipelineResult r = synth_pipeline(5, 100, 0, 3, 5, 7);
    return r;
}

std::string verdicts(const ExperimentReport& rep) {
    std::string s;
    for (std::size_t i = 0; i < kAllIndices.size(); ++i) {
        if (!s.empty()) s += ' ';
        s += std::string(index_name(kAllIndices[i])) + "=" + std::string(verdict_name(rep.judgements[i].verdict));
    }
    return s;
}

Outcome density_directions() {
    Outcome o;
    PerturbConfig cfg;
    cfg.seed = 1;
    cfg.trials = 100;
    cfg.density_add_fraction = 1.0;
    const auto rep = density_experiment(pipeline_partition(five_blobs()), cfg);
    o.require(rep.baseline.k_effective == 5 && five_blobs().reduced.rows() == 500, "dataset shape");
    for (std::size_t i : {0u, 1u, 2u, 4u}) o.require(rep.judgements[i].verdict == Verdict::positive, "not POSITIVE");
    o.require(rep.judgements[3].verdict != Verdict::positive, "DI POSITIVE");
    o.detail = verdicts(rep) + (o.pass ? "" : " | " + o.detail);
    return o;
}

Outcome diameter_directions() {
    Outcome o;
    PerturbConfig cfg;
    cfg.seed = 1;
    cfg.trials = 100;
    cfg.shrink_factor = 0.8;
    const auto rep = diameter_experiment(pipeline_partition(five_blobs()), cfg);
    for (const auto& j : rep.judgements) o.require(j.verdict == Verdict::positive, "not POSITIVE");
    o.detail = verdicts(rep) + (o.pass ? "" : " | " + o.detail);
    return o;
}

Outcome pipeline_invariants() {
    Outcome o;
    for (int t = 0; t < 100; ++t) {
        Rng rng(derive_seed(99, static_cast<std::uint64_t>(t)));
        const int n = 20 + static_cast<int>(rng.below(80));
        const int d = 1 + static_cast<int>(rng.below(6));
        Matrix x(n, d);
        for (int i = 0; i < n; ++i)
            for (int q = 0; q < d; ++q) x(i, q) = rng.normal() + 3.0 * (i % 4);
        FcmConfig cfg;
        cfg.k = 2 + static_cast<int>(rng.below(5));
        cfg.seed = static_cast<std::uint64_t>(t);
        cfg.restarts = 3;
        const ClusterModel m = fit_fcm(x, cfg);
        for (std::size_t i = 1; i < m.objective_trace.size(); ++i) {
            o.require(m.objective_trace[i] <= m.objective_trace[i - 1] + 1e-12, "objective rose in fit " + std::to_string(t));
        }
        o.require((m.memberships.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-9, "row sum");
        const double fpc = fuzzy_partition_coefficient(m.memberships);
        o.require(fpc >= 1.0 / cfg.k && fpc <= 1.0, "FPC out of range");
    }
    for (int k = 2; k <= 10; ++k) {
        Matrix crisp = Matrix::Zero(3 * k, k);
        for (int i = 0; i < 3 * k; ++i) crisp(i, i % k) = 1.0;
        o.require(fuzzy_partition_coefficient(crisp) == 1.0, "crisp FPC k=" + std::to_string(k));
        o.require(fuzzy_partition_coefficient(Matrix::Constant(3 * k, k, 1.0 / k)) == 1.0 / k,
                  "uniform FPC k=" + std::to_string(k));
    }
    const auto data = generate_synthetic(uniform_synth_spec(6, 30, 0.05, 2, 3));
    const PcaModel pca = fit_pca(data.profiles.values());
    const Matrix gram = pca.components * pca.components.transpose();
    o.require((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <= 1e-9, "orthonormality");
    const auto cevr = cumulative_explained_variance(pca);
    for (std::size_t i = 1; i < cevr.size(); ++i) o.require(cevr[i] >= cevr[i - 1], "CEVR decreasing");
    o.require(std::abs(cevr.back() - 1.0) <= 1e-9, "CEVR end " + num(cevr.back()));
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome determinism() {
    Outcome o;
    const fs::path root = fs::temp_directory_path() / "cvilab_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    const char* threads[] = {"1", "8", "1"};
    std::vector<fs::path> dirs;
    for (int run = 0; run < 3; ++run) {
        const fs::path out = root / ("run" + std::to_string(run));
        const fs::path conf = root / ("run" + std::to_string(run) + ".conf");
        std::ofstream(conf) << "# determinism check\nsynth-clusters = 4\nsynth-size = 30\nsynth-outliers = 2\n"
                            << "seed = 42\ntrials = 20\nout = " << out.string() << "\n";
        setenv("CVILAB_THREADS", threads[run], 1);
        std::ostringstream sink;
        const int code = app::run_cli({"run", "--config", conf.string()}, sink, sink);
        o.require(code == 0, "run exited " + std::to_string(code) + ": " + sink.str());
        dirs.push_back(out);
    }
    unsetenv("CVILAB_THREADS");
    apply_thread_limit();
    if (!o.pass) return o;
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(dirs[0])) {
        const auto name = e.path().filename();
        for (std::size_t r = 1; r < dirs.size(); ++r) {
            std::string a = slurp(dirs[0] / name);
            std::string b = slurp(dirs[r] / name);
            if (name == "manifest.json") {
                auto ja = Json::parse(a);
                auto jb = Json::parse(b);
                ja.erase("timestamps");
                jb.erase("timestamps");
                a = ja.dump();
                b = jb.dump();
            }
            o.require(a == b, name.string() + " differs (CVILAB_THREADS=" + threads[r] + ")");
        }
        ++files;
    }
    for (std::size_t r = 1; r < dirs.size(); ++r) {
        std::size_t count = 0;
        for ([[maybe_unused]] const auto& e : fs::directory_iterator(dirs[r])) ++count;
        o.require(count == files, "file count differs");
    }
    if (o.pass) o.detail = std::to_string(files) + " files identical across CVILAB_THREADS=1,8,1";
    fs::remove_all(root);
    return o;
}

Outcome selection() {
    Outcome o;
    const auto p = testing::gaussian_blobs(3, 50, 4, 10.0, 0.2, 17);
    FcmConfig cfg;
    cfg.seed = 5;
    const auto sel = select_cluster_count(p.points, cfg);
    o.require(sel.best_k == 3, "k* = " + std::to_string(sel.best_k));
    const int elbow = select_dimensions_elbow({0.50, 0.90, 0.95, 0.98, 1.00});
    o.require(elbow == 2, "elbow = " + std::to_string(elbow));
    if (o.pass) o.detail = "k* = 3, elbow = 2";
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "hand-oracle exactness", 1.0, hand_oracle},
        {2, "brute-force equivalence", 30.0, brute_force},
        {3, "DI outlier invariance", 10.0, outlier_invariance},
        {4, "CH centroid-distance dichotomy", 10.0, ch_dichotomy},
        {5, "density directions", 120.0, density_directions},
        {6, "diameter directions", 120.0, diameter_directions},
        {7, "pipeline invariants", 60.0, pipeline_invariants},
        {8, "determinism", 120.0, determinism},
        {9, "selection procedures", 30.0, selection},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > c.budget_s) o.require(false, "took " + num(secs) + " s, budget " + num(c.budget_s) + " s");
        if (!o.pass) ++failed;
        std::printf("%s criterion %d (%s) %.2fs%s%s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                    o.detail.empty() ? "" : ": ", o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
