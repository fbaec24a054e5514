#include "cvilab/serialize.hpp"

#include "cvilab/error.hpp"

#include <cstdio>
#include <limits>
#include <ostream>

namespace cvilab {

namespace {

Json matrix_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from(const Json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.at(0).size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Json& row = j.at(static_cast<std::size_t>(r));
        if (static_cast<Eigen::Index>(row.size()) != cols) throw InvalidArgument("json: ragged matrix");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return m;
}

std::string_view status_name(CviStatus s) {
    switch (s) {
        case CviStatus::ok: return "ok";
        case CviStatus::infinite: return "infinite";
        case CviStatus::undefined: return "undefined";
    }
    return "?";
}

CviStatus parse_status(const std::string& s) {
    if (s == "infinite") return CviStatus::infinite;
    if (s == "undefined") return CviStatus::undefined;
    if (s == "ok") return CviStatus::ok;
    throw InvalidArgument("json: unknown CVI status '" + s + "'");
}

}  // namespace

std::string format_csv_number(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

Json to_json(const PcaModel& model) {
    Json j;
    j["mean"] = std::vector<double>(model.mean.data(), model.mean.data() + model.mean.size());
    j["components"] = matrix_json(model.components);
    j["explained_variance_ratio"] = model.explained_variance_ratio;
    j["chosen_dprime"] = model.chosen_dprime;
    return j;
}

PcaModel pca_from_json(const Json& j) {
    PcaModel m;
    const auto mean = j.at("mean").get<std::vector<double>>();
    m.mean = Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    m.components = matrix_from(j.at("components"));
    m.explained_variance_ratio = j.at("explained_variance_ratio").get<std::vector<double>>();
    m.chosen_dprime = j.at("chosen_dprime").get<int>();
    if (m.components.cols() != m.mean.size()) throw InvalidArgument("pca.json: component length mismatch");
    return m;
}

Json to_json(const ClusterModel& model) {
    Json j;
    j["k"] = model.k();
    j["fuzzifier"] = model.fuzzifier;
    j["centroids"] = matrix_json(model.centroids);
    j["memberships"] = matrix_json(model.memberships);
    j["labels"] = model.labels;
    j["objective_trace"] = model.objective_trace;
    j["iterations"] = model.iterations;
    j["converged"] = model.converged;
    j["empty_cluster_warning"] = model.empty_cluster_warning;
    j["best_restart"] = model.best_restart;
    return j;
}

ClusterModel cluster_from_json(const Json& j) {
    ClusterModel m;
    m.fuzzifier = j.at("fuzzifier").get<double>();
    m.centroids = matrix_from(j.at("centroids"));
    m.memberships = matrix_from(j.at("memberships"));
    m.labels = j.at("labels").get<Labels>();
    m.objective_trace = j.at("objective_trace").get<std::vector<double>>();
    m.iterations = j.value("iterations", 0);
    m.converged = j.value("converged", false);
    m.empty_cluster_warning = j.value("empty_cluster_warning", false);
    m.best_restart = j.value("best_restart", 0);
    if (static_cast<Eigen::Index>(m.labels.size()) != m.memberships.rows()) {
        throw InvalidArgument("cluster.json: label count does not match memberships");
    }
    return m;
}

Json to_json(const CviReport& report) {
    Json j;
    Json flags = Json::object();
    for (CviIndex index : kAllIndices) {
        const CviValue& v = report.at(index);
        const std::string key(index_name(index));
        if (v.ok()) {
            j[key] = v.value;
        } else {
            j[key] = nullptr;
            flags[key] = {{"status", status_name(v.status)}, {"reason", v.note}};
        }
    }
    j["k_effective"] = report.k_effective;
    j["fuzzy"] = report.fuzzy;
    j["degenerate_flags"] = flags;
    return j;
}

CviReport cvi_from_json(const Json& j) {
    CviReport r;
    const Json& flags = j.contains("degenerate_flags") ? j.at("degenerate_flags") : Json::object();
    for (CviIndex index : kAllIndices) {
        const std::string key(index_name(index));
        CviValue& v = r.at(index);
        if (j.at(key).is_null()) {
            const Json& f = flags.contains(key) ? flags.at(key) : Json::object();
            v.status = parse_status(f.value("status", std::string("undefined")));
            v.note = f.value("reason", std::string());
            v.value = v.status == CviStatus::infinite ? std::numeric_limits<double>::infinity()
                                                      : std::numeric_limits<double>::quiet_NaN();
        } else {
            v.value = j.at(key).get<double>();
            v.status = CviStatus::ok;
        }
    }
    r.k_effective = j.at("k_effective").get<int>();
    r.fuzzy = j.at("fuzzy").get<bool>();
    return r;
}

Json to_json(const PerturbConfig& c) {
    return Json{{"seed", c.seed},
                {"trials", c.trials},
                {"density_add_fraction", c.density_add_fraction},
                {"shrink_factor", c.shrink_factor},
                {"sigma_divisor", c.sigma_divisor},
                {"max_rejection_attempts", c.max_rejection_attempts},
                {"recluster", c.recluster}};
}

namespace {

PerturbConfig perturb_config_from(const Json& j) {
    PerturbConfig c;
    c.seed = j.at("seed").get<std::uint64_t>();
    c.trials = j.at("trials").get<int>();
    c.density_add_fraction = j.at("density_add_fraction").get<double>();
    c.shrink_factor = j.at("shrink_factor").get<double>();
    c.sigma_divisor = j.at("sigma_divisor").get<double>();
    c.max_rejection_attempts = j.at("max_rejection_attempts").get<int>();
    c.recluster = j.at("recluster").get<bool>();
    return c;
}

}  // namespace

Json to_json(const ExperimentReport& report) {
    Json j;
    j["kind"] = kind_name(report.kind);
    j["config"] = to_json(report.config);
    j["seed"] = report.config.seed;
    j["singleton_clusters"] = report.singleton_clusters;
    j["baseline"] = to_json(report.baseline);
    Json rows = Json::array();
    for (const auto& row : report.rows) {
        Json r{{"name", row.name}};
        if (!row.included.empty()) r["included"] = row.included;
        r["cvi"] = to_json(row.cvi);
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    if (report.average) {
        j["average"] = to_json(*report.average);
        Json degenerate;
        for (std::size_t x = 0; x < kAllIndices.size(); ++x) {
            degenerate[std::string(index_name(kAllIndices[x]))] = report.degenerate_trials[x];
        }
        j["degenerate_trials"] = degenerate;
    }
    Json verdicts;
    for (std::size_t x = 0; x < kAllIndices.size(); ++x) {
        const IndexJudgement& v = report.judgements[x];
        Json entry{{"verdict", verdict_name(v.verdict)}};
        if (report.kind != ExperimentKind::outliers) {
            entry["p_value"] = v.p_value;
            entry["improved"] = v.improved;
            entry["worsened"] = v.worsened;
            entry["ties"] = v.ties;
        }
        verdicts[std::string(index_name(kAllIndices[x]))] = std::move(entry);
    }
    j["verdicts"] = std::move(verdicts);
    return j;
}

ExperimentReport experiment_from_json(const Json& j) {
    ExperimentReport r;
    r.kind = parse_kind(j.at("kind").get<std::string>());
    r.config = perturb_config_from(j.at("config"));
    r.singleton_clusters = j.at("singleton_clusters").get<std::vector<int>>();
    r.baseline = cvi_from_json(j.at("baseline"));
    for (const Json& row : j.at("rows")) {
        ExperimentRow out;
        out.name = row.at("name").get<std::string>();
        if (row.contains("included")) out.included = row.at("included").get<std::vector<int>>();
        out.cvi = cvi_from_json(row.at("cvi"));
        r.rows.push_back(std::move(out));
    }
    if (j.contains("average")) {
        r.average = cvi_from_json(j.at("average"));
        for (std::size_t x = 0; x < kAllIndices.size(); ++x) {
            r.degenerate_trials[x] = j.at("degenerate_trials").at(std::string(index_name(kAllIndices[x]))).get<int>();
        }
    }
    for (std::size_t x = 0; x < kAllIndices.size(); ++x) {
        const Json& v = j.at("verdicts").at(std::string(index_name(kAllIndices[x])));
        IndexJudgement& out = r.judgements[x];
        out.verdict = parse_verdict(v.at("verdict").get<std::string>());
        out.p_value = v.value("p_value", 1.0);
        out.improved = v.value("improved", 0);
        out.worsened = v.value("worsened", 0);
        out.ties = v.value("ties", 0);
    }
    return r;
}

void write_cevr_csv(std::ostream& out, const std::vector<double>& cevr) {
    out << "dprime,cevr\n";
    for (std::size_t i = 0; i < cevr.size(); ++i) out << i + 1 << ',' << format_csv_number(cevr[i]) << '\n';
}

void write_fpc_csv(std::ostream& out, const std::vector<int>& ks, const std::vector<double>& fpc) {
    out << "k,fpc\n";
    for (std::size_t i = 0; i < ks.size(); ++i) out << ks[i] << ',' << format_csv_number(fpc[i]) << '\n';
}

namespace {

std::string csv_cell(const CviValue& v) {
    switch (v.status) {
        case CviStatus::ok: return format_csv_number(v.value);
        case CviStatus::infinite: return "inf";
        case CviStatus::undefined: return "undefined";
    }
    return "";
}

void write_cvi_cells(std::ostream& out, const CviReport& r) {
    for (CviIndex index : kAllIndices) out << ',' << csv_cell(r.at(index));
    out << '\n';
}

}  // namespace

void write_experiment_csv(std::ostream& out, const ExperimentReport& report) {
    out << "variant";
    if (report.kind == ExperimentKind::outliers) {
        for (int label : report.singleton_clusters) out << ",outlier_" << label;
    }
    out << ",sh,ch,db,di,xb\n";
    for (const auto& row : report.rows) {
        if (report.kind == ExperimentKind::outliers) {
            out << row.name;
            for (int kept : row.included) out << ',' << kept;
        } else {
            out << row.name.substr(row.name.find(' ') + 1);
        }
        write_cvi_cells(out, row.cvi);
    }
    if (report.average) {
        out << "AVERAGE";
        write_cvi_cells(out, *report.average);
    }
}

}  // namespace cvilab
