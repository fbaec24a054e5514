#include "cvilab/app.hpp"

#include "cvilab/error.hpp"
#include "cvilab/parallel.hpp"
#include "digest.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;

namespace cvilab::app {

namespace {

constexpr const char* kManifest = "manifest.json";

// Configuration-level failure: reported with exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

// A failure tagged with the stage it happened in.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what) : Error(what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

template <typename F>
auto stage(const char* name, F&& body) {
    try {
        return body();
    } catch (const StageError&) {
        throw;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Writes artifacts into the output directory, remembers their digests, and
// produces a verified manifest.
class ArtifactWriter {
public:
    explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw StageError("output", "cannot create " + dir_.string() + ": " + ec.message());
    }

    const fs::path& dir() const noexcept { return dir_; }

    void write(const std::string& name, const std::string& bytes) {
        std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
        out << bytes;
        out.close();
        if (!out) throw StageError("output", "failed to write " + (dir_ / name).string());
        written_[name] = sha256_hex(bytes);
    }

    void write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }

    // Re-reads every artifact of this invocation and checks its digest, then
    // merges still-valid entries of an earlier manifest in the same directory.
    void finish(const std::string& command, const Json& config, const std::string& input_digest,
                const std::string& started) {
        std::map<std::string, std::string> entries;
        Json previous;
        if (fs::exists(dir_ / kManifest)) {
            try {
                previous = Json::parse(read_file(dir_ / kManifest));
                for (const auto& a : previous.at("artifacts")) {
                    const auto file = a.at("file").get<std::string>();
                    const auto digest = a.at("sha256").get<std::string>();
                    if (fs::exists(dir_ / file) && sha256_hex(read_file(dir_ / file)) == digest) {
                        entries[file] = digest;
                    }
                }
            } catch (const std::exception&) {
                previous = Json();
            }
        }
        for (const auto& [name, digest] : written_) {
            if (sha256_hex(read_file(dir_ / name)) != digest) {
                throw StageError("output", "digest mismatch after writing " + name);
            }
            entries[name] = digest;
        }
        Json manifest;
        manifest["tool"] = "cvilab";
        manifest["version"] = CVILAB_VERSION;
        manifest["command"] = command;
        manifest["config"] = config;
        std::string digest = input_digest;
        if (digest.empty() && previous.is_object()) digest = previous.value("input_digest", std::string());
        manifest["input_digest"] = digest;
        manifest["timestamps"] = {{"started", started}, {"finished", utc_now()}};
        Json artifacts = Json::array();
        for (const auto& [file, d] : entries) artifacts.push_back({{"file", file}, {"sha256", d}});
        manifest["artifacts"] = artifacts;
        const std::string bytes = manifest.dump(2) + "\n";
        std::ofstream out(dir_ / kManifest, std::ios::binary | std::ios::trunc);
        out << bytes;
        out.close();
        if (!out || read_file(dir_ / kManifest) != bytes) {
            throw StageError("output", "failed to write manifest");
        }
    }

private:
    fs::path dir_;
    std::map<std::string, std::string> written_;
};

template <typename F>
std::string render(F&& write) {
    std::ostringstream s;
    write(s);
    return s.str();
}

void write_pipeline_artifacts(ArtifactWriter& w, const PipelineResult& r, const RunConfig& config) {
    w.write("profiles.csv", render([&](std::ostream& o) { write_profiles_csv(o, r.data.profiles); }));
    if (r.data.truth) {
        w.write("truth.csv", render([&](std::ostream& o) {
                    o << "household_id,label\n";
                    for (std::size_t i = 0; i < r.data.truth->size(); ++i) {
                        o << r.data.profiles.ids()[i] << ',' << (*r.data.truth)[i] << '\n';
                    }
                }));
    }
    w.write_json("pca.json", to_json(r.pca));
    w.write("cevr.csv", render([&](std::ostream& o) { write_cevr_csv(o, r.cevr); }));
    Json cluster = to_json(r.model);
    cluster["fpc"] = fuzzy_partition_coefficient(r.model.memberships);
    cluster["seed"] = config.seed;
    w.write_json("cluster.json", cluster);
    w.write("fpc.csv", render([&](std::ostream& o) { write_fpc_csv(o, r.ks, r.fpc); }));
}

Json cvi_json(const CviReport& report, const RunConfig& config) {
    Json j = to_json(report);
    j["space"] = config.space == Space::reduced ? "reduced" : "original";
    return j;
}

bool load_artifacts_present(const fs::path& dir) {
    return fs::exists(dir / "profiles.csv") && fs::exists(dir / "pca.json") && fs::exists(dir / "cluster.json");
}

// Rebuilds a pipeline result from the artifacts of an earlier `cluster` run.
std::optional<PipelineResult> load_artifacts(const fs::path& dir, const RunConfig& config) {
    if (!load_artifacts_present(dir)) return std::nullopt;
    PipelineResult r;
    std::istringstream profiles(read_file(dir / "profiles.csv"));
    r.data.profiles = read_profiles_csv(profiles);
    r.pca = pca_from_json(Json::parse(read_file(dir / "pca.json")));
    r.cevr = cumulative_explained_variance(r.pca);
    r.reduced = project(r.pca, r.data.profiles.values(), r.pca.chosen_dprime);
    r.model = cluster_from_json(Json::parse(read_file(dir / "cluster.json")));
    if (static_cast<Eigen::Index>(r.model.labels.size()) != r.data.profiles.size()) {
        throw StageError("load", "cluster.json does not match profiles.csv");
    }
    r.cvi = evaluate_all(evaluation_points(r, config.space), r.model);
    return r;
}

PipelineResult artifacts_or_pipeline(const fs::path& dir, const RunConfig& config, ArtifactWriter* writer,
                                     std::string& digest) {
    if (auto loaded = stage("load", [&] { return load_artifacts(dir, config); })) return std::move(*loaded);
    auto data = stage("preprocess", [&] { return load_data(config); });
    digest = data.digest;
    auto result = stage("pipeline", [&] { return run_pipeline(config, std::move(data)); });
    if (writer) {
        write_pipeline_artifacts(*writer, result, config);
        writer->write_json("cvi.json", cvi_json(result.cvi, config));
    }
    return result;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

std::string cell(const CviValue& v) {
    if (v.status == CviStatus::infinite) return "inf";
    if (!v.ok()) return "undefined";
    return format_csv_number(v.value);
}

// Writes summary.txt and the plot-data CSVs from artifacts already on disk.
void emit_report(ArtifactWriter& w) {
    const fs::path& dir = w.dir();
    for (const char* name : {"profiles.csv", "pca.json", "cluster.json", "cvi.json", "fpc.csv"}) {
        if (!fs::exists(dir / name)) {
            throw StageError("report", std::string("missing artifact ") + name + " (run the pipeline first)");
        }
    }
    std::istringstream profiles_in(read_file(dir / "profiles.csv"));
    const ProfileMatrix profiles = read_profiles_csv(profiles_in);
    const PcaModel pca = pca_from_json(Json::parse(read_file(dir / "pca.json")));
    const Json cluster = Json::parse(read_file(dir / "cluster.json"));
    const ClusterModel model = cluster_from_json(cluster);
    const Json cvi_doc = Json::parse(read_file(dir / "cvi.json"));
    const CviReport cvi = cvi_from_json(cvi_doc);

    w.write("cevr.csv", render([&](std::ostream& o) { write_cevr_csv(o, cumulative_explained_variance(pca)); }));
    const int plot_dims = std::min<int>(2, static_cast<int>(pca.component_count()));
    const Matrix plane = project(pca, profiles.values(), plot_dims);
    w.write("scatter2d.csv", render([&](std::ostream& o) {
                o << "x,y,cluster\n";
                for (Eigen::Index i = 0; i < plane.rows(); ++i) {
                    o << format_csv_number(plane(i, 0)) << ','
                      << format_csv_number(plot_dims > 1 ? plane(i, 1) : 0.0) << ','
                      << model.labels[static_cast<std::size_t>(i)] << '\n';
                }
            }));

    std::ostringstream s;
    s << "cvilab summary\n\n";
    s << "profiles      " << profiles.size() << " households x " << profiles.dimension() << " slots\n";
    s << "pca           d' = " << pca.chosen_dprime << ", cumulative explained variance "
      << format_csv_number(cumulative_explained_variance(pca)[static_cast<std::size_t>(pca.chosen_dprime - 1)]) << '\n';
    s << "fcm           k = " << model.k() << ", m = " << format_csv_number(model.fuzzifier)
      << ", fpc = " << format_csv_number(cluster.value("fpc", 0.0)) << ", singleton clusters = "
      << find_singleton_clusters(model).size() << (model.empty_cluster_warning ? " (warning: empty cluster)" : "")
      << '\n';
    s << "cvi           space = " << cvi_doc.value("space", std::string("reduced"))
      << ", xb = " << (cvi.fuzzy ? "fuzzy" : "crisp") << '\n';
    for (CviIndex index : kAllIndices) {
        s << "  " << pad(std::string(index_name(index)), 4) << cell(cvi.at(index)) << '\n';
    }

    for (ExperimentKind kind : {ExperimentKind::outliers, ExperimentKind::density, ExperimentKind::diameter}) {
        const std::string base = "experiment_" + std::string(kind_name(kind));
        if (!fs::exists(dir / (base + ".json"))) continue;
        const ExperimentReport report = experiment_from_json(Json::parse(read_file(dir / (base + ".json"))));
        w.write(base + ".csv", render([&](std::ostream& o) { write_experiment_csv(o, report); }));
        s << "\nexperiment " << kind_name(kind);
        if (kind == ExperimentKind::outliers) {
            s << " (" << report.singleton_clusters.size() << " singleton clusters, " << report.rows.size()
              << " variants)\n";
            s << "  " << pad("index", 7) << pad("all kept", 16) << pad("none kept", 16) << "verdict\n";
        } else {
            s << " (" << report.rows.size() << " trials)\n";
            s << "  " << pad("index", 7) << pad("baseline", 16) << pad("average", 16) << pad("verdict", 14)
              << "p-value\n";
        }
        for (std::size_t x = 0; x < kAllIndices.size(); ++x) {
            const CviIndex index = kAllIndices[x];
            const IndexJudgement& j = report.judgements[x];
            s << "  " << pad(std::string(index_name(index)), 7);
            if (kind == ExperimentKind::outliers) {
                s << pad(cell(report.rows.back().cvi.at(index)), 16) << pad(cell(report.rows.front().cvi.at(index)), 16)
                  << verdict_name(j.verdict) << '\n';
            } else {
                s << pad(cell(report.baseline.at(index)), 16) << pad(cell(report.average->at(index)), 16)
                  << pad(std::string(verdict_name(j.verdict)), 14) << format_csv_number(j.p_value) << '\n';
            }
        }
    }
    w.write("summary.txt", s.str());
}

void write_experiment(ArtifactWriter& w, const ExperimentReport& report) {
    const std::string base = "experiment_" + std::string(kind_name(report.kind));
    w.write_json(base + ".json", to_json(report));
    w.write(base + ".csv", render([&](std::ostream& o) { write_experiment_csv(o, report); }));
}

struct RawOptions {
    std::vector<std::string> inputs;
    std::string out = "cvilab_out";
    std::uint64_t seed = 0;
    std::string dprime = "elbow";
    std::string k = "fpc";
    std::string m = "default";
    int k_max = kDefaultMaxClusters;
    int restarts = 10;
    int max_iter = 300;
    double tol = 1e-6;
    int trials = 100;
    double shrink = 0.8;
    double density_fraction = 1.0;
    double sigma_divisor = 4.0;
    int max_rejections = 1000;
    bool recluster = false;
    std::string space = "reduced";
    std::vector<std::string> experiments{"outliers", "density", "diameter"};
    int synth_clusters = 0;
    int synth_size = 50;
    double synth_spread = 0.05;
    int synth_outliers = 0;
    std::string synth_placement = "far";
};

template <typename T>
T parse_number(const std::string& flag, const std::string& text) {
    T value{};
    std::istringstream in(text);
    in >> value;
    if (!in || !(in >> std::ws).eof()) throw ConfigError("--" + flag + ": cannot parse '" + text + "'");
    return value;
}

RunConfig resolve(const RawOptions& raw) {
    RunConfig c;
    c.inputs = raw.inputs;
    c.out_dir = raw.out;
    c.seed = raw.seed;
    if (raw.dprime != "elbow") {
        c.dprime = parse_number<int>("dprime", raw.dprime);
        if (*c.dprime < 1) throw ConfigError("--dprime must be positive or 'elbow'");
    }
    if (raw.k != "fpc") {
        c.k = parse_number<int>("k", raw.k);
        if (*c.k < 2 || *c.k > raw.k_max) throw ConfigError("--k must lie in [2, k-max] or be 'fpc'");
    }
    if (raw.m != "default") {
        c.m = parse_number<double>("m", raw.m);
        if (!(*c.m > 1.0)) throw ConfigError("--m must exceed 1 or be 'default'");
    }
    c.k_max = raw.k_max;
    c.restarts = raw.restarts;
    c.max_iter = raw.max_iter;
    c.tol = raw.tol;
    c.perturb.seed = raw.seed;
    c.perturb.trials = raw.trials;
    c.perturb.shrink_factor = raw.shrink;
    c.perturb.density_add_fraction = raw.density_fraction;
    c.perturb.sigma_divisor = raw.sigma_divisor;
    c.perturb.max_rejection_attempts = raw.max_rejections;
    c.perturb.recluster = raw.recluster;
    try {
        c.perturb.validate();
        c.fcm_config().validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    if (raw.space == "reduced") {
        c.space = Space::reduced;
    } else if (raw.space == "original") {
        c.space = Space::original;
    } else {
        throw ConfigError("--space must be 'reduced' or 'original'");
    }
    c.experiments.clear();
    for (const auto& name : raw.experiments) {
        try {
            c.experiments.push_back(parse_kind(name));
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
    }
    if (raw.synth_clusters > 0) {
        SynthOptions s;
        s.clusters = raw.synth_clusters;
        s.size = raw.synth_size;
        s.spread = raw.synth_spread;
        s.outliers = raw.synth_outliers;
        if (raw.synth_placement == "far") {
            s.placement = OutlierPlacement::far;
        } else if (raw.synth_placement == "near") {
            s.placement = OutlierPlacement::near;
        } else {
            throw ConfigError("--synth-placement must be 'far' or 'near'");
        }
        if (s.size < 1 || s.outliers < 0 || !(s.spread >= 0.0)) throw ConfigError("invalid synth settings");
        c.synth = s;
    }
    return c;
}

void require_source(const RunConfig& c) {
    try {
        c.validate_source();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

int execute(const std::string& command, const std::string& kind_arg, const RunConfig& config, std::ostream& out) {
    const std::string started = utc_now();
    ArtifactWriter w(config.out_dir);
    std::string digest;

    if (command == "synth") {
        if (!config.synth) throw ConfigError("synth: set synth-clusters");
        if (!config.inputs.empty()) throw ConfigError("synth: input paths cannot be combined with a synth spec");
        LoadedData data = stage("synth", [&] { return load_data(config); });
        digest = data.digest;
        PipelineResult r;
        r.data = std::move(data);
        w.write("profiles.csv", render([&](std::ostream& o) { write_profiles_csv(o, r.data.profiles); }));
        w.write("truth.csv", render([&](std::ostream& o) {
                    o << "household_id,label\n";
                    for (std::size_t i = 0; i < r.data.truth->size(); ++i) {
                        o << r.data.profiles.ids()[i] << ',' << (*r.data.truth)[i] << '\n';
                    }
                }));
    } else if (command == "preprocess") {
        if (config.inputs.empty()) throw ConfigError("preprocess: give at least one --input");
        require_source(config);
        LoadedData data = stage("preprocess", [&] { return load_data(config); });
        digest = data.digest;
        w.write("profiles.csv", render([&](std::ostream& o) { write_profiles_csv(o, data.profiles); }));
    } else if (command == "cluster") {
        require_source(config);
        LoadedData data = stage("preprocess", [&] { return load_data(config); });
        digest = data.digest;
        const PipelineResult r = stage("pipeline", [&] { return run_pipeline(config, std::move(data)); });
        write_pipeline_artifacts(w, r, config);
    } else if (command == "validate") {
        auto r = stage("load", [&] { return load_artifacts(w.dir(), config); });
        if (!r) throw StageError("validate", "missing profiles.csv, pca.json or cluster.json (run cluster first)");
        w.write_json("cvi.json", cvi_json(r->cvi, config));
    } else if (command == "experiment") {
        const ExperimentKind kind = [&] {
            try {
                return parse_kind(kind_arg);
            } catch (const InvalidArgument& e) {
                throw ConfigError(e.what());
            }
        }();
        if (!load_artifacts_present(w.dir())) require_source(config);
        const PipelineResult r = artifacts_or_pipeline(w.dir(), config, &w, digest);
        const ExperimentReport report = stage("experiment", [&] { return run_experiment(kind, r, config); });
        write_experiment(w, report);
    } else if (command == "report") {
        stage("report", [&] {
            emit_report(w);
            return 0;
        });
    } else if (command == "run") {
        require_source(config);
        LoadedData data = stage("preprocess", [&] { return load_data(config); });
        digest = data.digest;
        const PipelineResult r = stage("pipeline", [&] { return run_pipeline(config, std::move(data)); });
        write_pipeline_artifacts(w, r, config);
        w.write_json("cvi.json", cvi_json(r.cvi, config));
        for (ExperimentKind kind : config.experiments) {
            if (kind == ExperimentKind::outliers && find_singleton_clusters(r.model).empty()) {
                out << "note: no singleton clusters; outlier experiment skipped\n";
                continue;
            }
            const ExperimentReport report = stage("experiment", [&] { return run_experiment(kind, r, config); });
            write_experiment(w, report);
        }
        stage("report", [&] {
            emit_report(w);
            return 0;
        });
    }
    w.finish(command, config_echo(config), digest, started);
    out << "wrote " << (w.dir() / kManifest).string() << '\n';
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    apply_thread_limit();
    CLI::App cli{"cvilab: clustering validation laboratory for daily load profiles"};
    cli.fallthrough();
    cli.set_config("--config", "", "Flat key = value config file; flags override it");
    cli.require_subcommand(1, 1);
    RawOptions raw;

    cli.add_option("--input", raw.inputs, "Raw readings or profile CSV (repeatable)");
    cli.add_option("--out", raw.out, "Output directory");
    cli.add_option("--seed", raw.seed, "Run seed");
    cli.add_option("--dprime", raw.dprime, "Reduced dimension N or 'elbow'");
    cli.add_option("--k", raw.k, "Cluster count N or 'fpc'");
    cli.add_option("--m", raw.m, "Fuzzifier F or 'default'");
    cli.add_option("--k-max", raw.k_max, "Largest k tried by FPC selection");
    cli.add_option("--restarts", raw.restarts, "FCM restarts");
    cli.add_option("--max-iter", raw.max_iter, "FCM iteration cap");
    cli.add_option("--tol", raw.tol, "FCM centroid displacement tolerance");
    cli.add_option("--trials", raw.trials, "Trials per perturbation experiment");
    cli.add_option("--shrink", raw.shrink, "Diameter shrink factor in (0, 1)");
    cli.add_option("--density-fraction", raw.density_fraction, "Injected points per cluster, fraction of its size");
    cli.add_option("--sigma-divisor", raw.sigma_divisor, "Sampling sigma = radius / divisor");
    cli.add_option("--max-rejections", raw.max_rejections, "Rejection budget per injected point");
    cli.add_flag("--recluster", raw.recluster, "Refit FCM on every perturbed variant");
    cli.add_option("--space", raw.space, "CVI space: reduced or original");
    cli.add_option("--experiments", raw.experiments, "Experiments for 'run'")->delimiter(',');
    cli.add_option("--synth-clusters", raw.synth_clusters, "Synthetic cluster count (enables synth source)");
    cli.add_option("--synth-size", raw.synth_size, "Profiles per synthetic cluster");
    cli.add_option("--synth-spread", raw.synth_spread, "Per-slot noise std (kW)");
    cli.add_option("--synth-outliers", raw.synth_outliers, "Planted outlier profiles");
    cli.add_option("--synth-placement", raw.synth_placement, "Outlier placement: far or near");

    cli.add_subcommand("synth", "Generate a synthetic profile population");
    cli.add_subcommand("preprocess", "Raw readings to normalized median daily profiles");
    cli.add_subcommand("cluster", "PCA + FCM on profiles");
    cli.add_subcommand("validate", "Compute the validation indices of a clustering");
    std::string kind;
    cli.add_subcommand("experiment", "Run a perturbation experiment")
        ->add_option("kind", kind, "outliers | density | diameter")
        ->required();
    cli.add_subcommand("report", "Summary table and plot data");
    cli.add_subcommand("run", "End-to-end pipeline, experiments and report");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    std::string command = "?";
    try {
        cli.parse(reversed);
        command = cli.get_subcommands().front()->get_name();
        const RunConfig config = resolve(raw);
        return execute(command, kind, config, out);
    } catch (const CLI::CallForHelp&) {
        out << cli.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << Json{{"error", {{"command", command}, {"stage", "config"}, {"message", e.what()}}}}.dump() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        err << Json{{"error", {{"command", command}, {"stage", "config"}, {"message", e.what()}}}}.dump() << '\n';
        return 2;
    } catch (const StageError& e) {
        err << Json{{"error", {{"command", command}, {"stage", e.stage()}, {"message", e.what()}}}}.dump() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << Json{{"error", {{"command", command}, {"stage", "internal"}, {"message", e.what()}}}}.dump() << '\n';
        return 1;
    }
}

}  // namespace cvilab::app
