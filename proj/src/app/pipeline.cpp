#include "cvilab/app.hpp"

#include "cvilab/error.hpp"
#include "digest.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace cvilab::app {

namespace {

enum class InputKind { readings, profiles };

InputKind sniff(const std::string& text, const std::string& path) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (line.rfind("household_id,timestamp", 0) == 0) return InputKind::readings;
        if (line.rfind("household_id,", 0) == 0) return InputKind::profiles;
        break;
    }
    throw InvalidArgument(path + ": unrecognized CSV header");
}

// Merges series that share a household id across files.
std::vector<ReadingSeries> merge_series(std::vector<ReadingSeries> all) {
    std::vector<ReadingSeries> out;
    std::map<std::string, std::size_t> index;
    for (auto& s : all) {
        auto [it, fresh] = index.emplace(s.household_id, out.size());
        if (fresh) {
            out.push_back(std::move(s));
            continue;
        }
        auto& into = out[it->second].samples;
        into.insert(into.end(), s.samples.begin(), s.samples.end());
        std::sort(into.begin(), into.end(), [](const Sample& a, const Sample& b) { return a.minute < b.minute; });
        const auto dup = std::adjacent_find(into.begin(), into.end(),
                                            [](const Sample& a, const Sample& b) { return a.minute == b.minute; });
        if (dup != into.end()) {
            throw InvalidArgument("household '" + s.household_id + "' has duplicate readings across input files");
        }
    }
    return out;
}

}  // namespace

LoadedData load_data(const RunConfig& config) {
    config.validate_source();
    LoadedData data;
    if (config.synth) {
        SynthData synth = generate_synthetic(config.synth_spec());
        data.profiles = std::move(synth.profiles);
        data.truth = std::move(synth.truth);
        data.digest = sha256_hex(config_echo(config)["synth"].dump() + "#seed=" + std::to_string(config.seed));
        return data;
    }

    std::string all_bytes;
    std::vector<ReadingSeries> series;
    std::vector<std::string> ids;
    Matrix rows;
    std::optional<InputKind> kind;
    for (const auto& path : config.inputs) {
        const std::string text = read_file(path);
        all_bytes += text;
        const InputKind k = sniff(text, path);
        if (kind && *kind != k) throw InvalidArgument("inputs mix raw readings and profile CSVs");
        kind = k;
        std::istringstream in(text);
        try {
            if (k == InputKind::readings) {
                auto parsed = parse_readings(in);
                series.insert(series.end(), std::make_move_iterator(parsed.begin()), std::make_move_iterator(parsed.end()));
            } else {
                const ProfileMatrix p = read_profiles_csv(in);
                if (rows.size() > 0 && rows.cols() != p.dimension()) {
                    throw InvalidArgument("profile CSVs differ in dimension");
                }
                Matrix merged(rows.rows() + p.size(), p.dimension());
                merged.topRows(rows.rows()) = rows;
                merged.bottomRows(p.size()) = p.values();
                rows = std::move(merged);
                ids.insert(ids.end(), p.ids().begin(), p.ids().end());
            }
        } catch (const Error& e) {
            throw InvalidArgument(path + ": " + e.what());
        }
    }
    data.profiles = *kind == InputKind::readings ? build_profile_matrix(merge_series(std::move(series)))
                                                 : ProfileMatrix(std::move(ids), std::move(rows));
    data.digest = sha256_hex(all_bytes);
    return data;
}

PipelineResult run_pipeline(const RunConfig& config) { return run_pipeline(config, load_data(config)); }

PipelineResult run_pipeline(const RunConfig& config, LoadedData data) {
    PipelineResult r;
    r.data = std::move(data);
    const Matrix& values = r.data.profiles.values();
    r.pca = fit_pca(values);
    r.cevr = cumulative_explained_variance(r.pca);
    r.pca.chosen_dprime = config.dprime ? *config.dprime : select_dimensions_elbow(r.cevr);
    r.reduced = project(r.pca, values, r.pca.chosen_dprime);

    FcmConfig fcm = config.fcm_config();
    fcm.m = config.m ? *config.m : estimate_fuzzifier(r.reduced);
    if (config.k) {
        r.model = fit_fcm(r.reduced, fcm);
        r.ks = {*config.k};
        r.fpc = {fuzzy_partition_coefficient(r.model.memberships)};
    } else {
        const int upper = std::min<int>(config.k_max, static_cast<int>(r.reduced.rows()) - 1);
        ClusterCountSelection sel = select_cluster_count(r.reduced, fcm, 2, upper);
        r.model = std::move(sel.model);
        r.ks = std::move(sel.ks);
        r.fpc = std::move(sel.fpc);
    }
    r.cvi = evaluate_all(evaluation_points(r, config.space), r.model);
    return r;
}

const Matrix& evaluation_points(const PipelineResult& result, Space space) {
    return space == Space::reduced ? result.reduced : result.data.profiles.values();
}

ExperimentReport run_experiment(ExperimentKind kind, const PipelineResult& result, const RunConfig& config) {
    PerturbConfig perturb = config.perturb;
    perturb.seed = config.seed;
    perturb.recluster_fcm = config.fcm_config();
    perturb.recluster_fcm.m = result.model.fuzzifier;
    const Partition partition{evaluation_points(result, config.space), result.model.labels};
    switch (kind) {
        case ExperimentKind::outliers: return outlier_experiment(partition, perturb);
        case ExperimentKind::density: return density_experiment(partition, perturb);
        case ExperimentKind::diameter: return diameter_experiment(partition, perturb);
    }
    throw InvalidArgument("unknown experiment kind");
}

}  // namespace cvilab::app
