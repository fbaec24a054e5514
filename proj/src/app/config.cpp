#include "cvilab/app.hpp"

#include "cvilab/error.hpp"
#include "cvilab/rng.hpp"

namespace cvilab::app {

void RunConfig::validate_source() const {
    if (!inputs.empty() && synth) {
        throw InvalidArgument("config: give either input paths or a synth spec, not both");
    }
    if (inputs.empty() && !synth) {
        throw InvalidArgument("config: no data source (set input or synth-clusters)");
    }
}

FcmConfig RunConfig::fcm_config() const {
    FcmConfig c;
    c.k = k.value_or(2);
    c.m = m.value_or(2.0);
    c.max_iter = max_iter;
    c.tol = tol;
    c.seed = derive_seed(seed, Stream::fcm);
    c.restarts = restarts;
    c.k_max = k_max;
    return c;
}

SynthSpec RunConfig::synth_spec() const {
    if (!synth) throw InvalidArgument("config: no synth spec");
    SynthSpec spec = uniform_synth_spec(synth->clusters, synth->size, synth->spread, synth->outliers,
                                        derive_seed(seed, Stream::synth));
    spec.placement = synth->placement;
    return spec;
}

Json config_echo(const RunConfig& c) {
    Json j;
    j["seed"] = c.seed;
    j["inputs"] = c.inputs;
    if (c.synth) {
        j["synth"] = {{"clusters", c.synth->clusters},
                      {"size", c.synth->size},
                      {"spread", c.synth->spread},
                      {"outliers", c.synth->outliers},
                      {"placement", c.synth->placement == OutlierPlacement::far ? "far" : "near"}};
    } else {
        j["synth"] = nullptr;
    }
    j["dprime"] = c.dprime ? Json(*c.dprime) : Json("elbow");
    j["k"] = c.k ? Json(*c.k) : Json("fpc");
    j["m"] = c.m ? Json(*c.m) : Json("default");
    j["k_max"] = c.k_max;
    j["restarts"] = c.restarts;
    j["max_iter"] = c.max_iter;
    j["tol"] = c.tol;
    j["perturb"] = to_json(c.perturb);
    Json kinds = Json::array();
    for (auto k : c.experiments) kinds.push_back(kind_name(k));
    j["experiments"] = kinds;
    j["space"] = c.space == Space::reduced ? "reduced" : "original";
    return j;
}

}  // namespace cvilab::app
