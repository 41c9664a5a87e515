#include "rgtn/config.hpp"

#include <fstream>
#include <set>

namespace rgtn {

using nlohmann::json;

TruthSpec SynthSettings::truth_spec(std::uint64_t seed) const {
    if (!preset.empty()) return rgtn::preset(preset, seed);
    TruthSpec s;
    s.dims = dims;
    s.edges = edges;
    s.bond_min = bond_min;
    s.bond_max = bond_max;
    s.seed = seed;
    return s;
}

void RunConfig::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError("config: " + what);
    };
    require(workers >= 1, "workers must be at least 1");
    require(!out.empty(), "out must not be empty");
    try {
        search.validate();
        if (synth.preset.empty()) synth.truth_spec(seed).validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    require(synth.preset.empty() || (synth.dims.empty() && synth.edges.empty()),
            "synth.preset and synth.dims/edges are mutually exclusive");
    require(synth.missing_fraction >= 0.0 && synth.missing_fraction < 1.0, "synth.missing_fraction must lie in [0, 1)");
    require(synth.noise_fraction >= 0.0, "synth.noise_fraction must be >= 0");
    require(eval.re_bound >= 0.0, "eval.re_bound must be >= 0");
    require(eval.max_bond >= search.init_bond, "eval.max_bond must be >= search.init_bond");
    require(eval.peak > 0.0, "eval.peak must be positive");
    require(trals.max_rank >= 1 && trals.max_iters >= 1, "trals.max_rank and trals.max_iters must be >= 1");
    for (auto r : trals.ranks) require(r >= 1, "trals.ranks must be >= 1");
    require(reveal.trials >= 1, "reveal.trials must be >= 1");
    require(!reveal.specs.empty(), "reveal.specs must not be empty");
    for (const auto& m : compare.methods)
        require(m == "rgtn" || m == "trals", "unknown compare method '" + m + "' (expected rgtn or trals)");
    require(!compare.methods.empty() && !compare.re_bounds.empty(), "compare needs methods and re_bounds");
}

namespace {

template <class T>
json opt_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

json search_json(const RGConfig& c) {
    const auto& k = c.couplings;
    json smooth{{"temporal", opt_json(c.smoothness.temporal)}, {"spatial", opt_json(c.smoothness.spatial)}};
    return {{"scales", c.scales},
            {"expand_steps", c.expand_steps},
            {"compress_steps", c.compress_steps},
            {"epochs_initial", c.epochs_initial},
            {"epochs_expand", c.epochs_expand},
            {"epochs_compress", c.epochs_compress},
            {"epochs_refine", c.epochs_refine},
            {"eta0_cores", c.eta0_cores},
            {"s0", c.s0},
            {"eta0_struct", c.eta0_struct},
            {"s1", c.s1},
            {"tau0", c.tau0},
            {"t0", c.t0},
            {"tau_floor", c.tau_floor},
            {"svd_threshold", c.svd_threshold},
            {"split_max_rank", opt_json(c.split_max_rank)},
            {"tension_percentile", c.tension_percentile},
            {"flow_percentile", c.flow_percentile},
            {"eps_diag", c.eps_diag},
            {"delta_gate", c.delta_gate},
            {"init", to_string(c.init)},
            {"init_bond", c.init_bond},
            {"compression", to_string(c.compression)},
            {"tabu", c.tabu},
            {"restarts", c.restarts},
            {"spatial_modes", opt_json(c.spatial_modes)},
            {"smoothness", smooth},
            {"couplings",
             {{"alpha", k.alpha},
              {"beta", k.beta},
              {"gamma", k.gamma},
              {"delta", k.delta},
              {"epsilon", k.epsilon},
              {"tnn_mode_weights", k.tnn_mode_weights},
              {"rho_alpha", k.rho_alpha},
              {"rho_beta", k.rho_beta},
              {"rho_gamma", k.rho_gamma},
              {"rho_delta", k.rho_delta},
              {"rho_epsilon", k.rho_epsilon}}}};
}

// Reads keys of one JSON object, remembering which were consumed so that
// leftovers can be reported as unknown.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError("config: " + where() + " must be an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) return;
        try {
            if constexpr (is_optional<T>::value) {
                if (it->is_null())
                    out.reset();
                else
                    out = it->template get<typename T::value_type>();
            } else {
                check_kind<T>(*it, key);
                out = it->template get<T>();
            }
        } catch (const json::exception& e) {
            throw ConfigError("config: bad value for " + child(key) + ": " + e.what());
        }
    }

    template <class Parse, class T>
    void get_enum(const char* key, T& out, Parse parse) {
        std::string s;
        get(key, s);
        if (j_.contains(key)) {
            try {
                out = parse(s);
            } catch (const std::invalid_argument& e) {
                throw ConfigError("config: " + child(key) + ": " + e.what());
            }
        }
    }

    Reader object(const char* key) {
        seen_.insert(key);
        static const json empty = json::object();
        const auto it = j_.find(key);
        return Reader(it == j_.end() ? empty : *it, child(key));
    }

    void done() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.contains(k)) throw ConfigError("config: unknown key " + child(k));
    }

private:
    template <class T>
    struct is_optional : std::false_type {};
    template <class T>
    struct is_optional<std::optional<T>> : std::true_type {};

    // nlohmann converts between numbers and bools silently; config values
    // must have the declared kind.
    template <class T>
    void check_kind(const json& v, const char* key) const {
        bool ok = true;
        if constexpr (std::is_same_v<T, bool>)
            ok = v.is_boolean();
        else if constexpr (std::is_integral_v<T>)
            ok = v.is_number_unsigned() || (v.is_number_integer() && v.template get<long long>() >= 0);
        else if constexpr (std::is_floating_point_v<T>)
            ok = v.is_number();
        else if constexpr (std::is_same_v<T, std::string>)
            ok = v.is_string();
        if (!ok) throw ConfigError("config: wrong type for " + child(key));
    }

    std::string where() const { return path_.empty() ? "top level" : path_; }
    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_search(Reader r, RGConfig& c) {
    r.get("scales", c.scales);
    r.get("expand_steps", c.expand_steps);
    r.get("compress_steps", c.compress_steps);
    r.get("epochs_initial", c.epochs_initial);
    r.get("epochs_expand", c.epochs_expand);
    r.get("epochs_compress", c.epochs_compress);
    r.get("epochs_refine", c.epochs_refine);
    r.get("eta0_cores", c.eta0_cores);
    r.get("s0", c.s0);
    r.get("eta0_struct", c.eta0_struct);
    r.get("s1", c.s1);
    r.get("tau0", c.tau0);
    r.get("t0", c.t0);
    r.get("tau_floor", c.tau_floor);
    r.get("svd_threshold", c.svd_threshold);
    r.get("split_max_rank", c.split_max_rank);
    r.get("tension_percentile", c.tension_percentile);
    r.get("flow_percentile", c.flow_percentile);
    r.get("eps_diag", c.eps_diag);
    r.get("delta_gate", c.delta_gate);
    r.get_enum("init", c.init, parse_init_topology);
    r.get("init_bond", c.init_bond);
    r.get_enum("compression", c.compression, parse_compression_strategy);
    r.get("tabu", c.tabu);
    r.get("restarts", c.restarts);
    r.get("spatial_modes", c.spatial_modes);
    Reader sm = r.object("smoothness");
    sm.get("temporal", c.smoothness.temporal);
    sm.get("spatial", c.smoothness.spatial);
    sm.done();
    Reader k = r.object("couplings");
    auto& cc = c.couplings;
    k.get("alpha", cc.alpha);
    k.get("beta", cc.beta);
    k.get("gamma", cc.gamma);
    k.get("delta", cc.delta);
    k.get("epsilon", cc.epsilon);
    k.get("tnn_mode_weights", cc.tnn_mode_weights);
    k.get("rho_alpha", cc.rho_alpha);
    k.get("rho_beta", cc.rho_beta);
    k.get("rho_gamma", cc.rho_gamma);
    k.get("rho_delta", cc.rho_delta);
    k.get("rho_epsilon", cc.rho_epsilon);
    k.done();
    r.done();
}

}  // namespace

std::string to_string(RingInit i) { return i == RingInit::Svd ? "svd" : "random"; }

RingInit parse_ring_init(const std::string& s) {
    if (s == "svd") return RingInit::Svd;
    if (s == "random") return RingInit::Random;
    throw std::invalid_argument("unknown ring init '" + s + "' (expected svd or random)");
}

json to_json(const RunConfig& c) {
    json edges = json::array();
    for (auto [a, b] : c.synth.edges) edges.push_back({a, b});
    return {{"seed", c.seed},
            {"out", c.out},
            {"workers", c.workers},
            {"dataset", c.dataset},
            {"input", {{"tensor", c.input.tensor}, {"mask", c.input.mask}, {"truth", c.input.truth}}},
            {"synth",
             {{"preset", c.synth.preset},
              {"dims", c.synth.dims},
              {"edges", edges},
              {"bond_min", c.synth.bond_min},
              {"bond_max", c.synth.bond_max},
              {"missing_fraction", c.synth.missing_fraction},
              {"noise_fraction", c.synth.noise_fraction}}},
            {"search", search_json(c.search)},
            {"trals",
             {{"ranks", c.trals.ranks},
              {"max_rank", c.trals.max_rank},
              {"max_iters", c.trals.max_iters},
              {"tol", c.trals.tol},
              {"ridge", c.trals.ridge},
              {"init", to_string(c.trals.init)}}},
            {"reveal",
             {{"specs", c.reveal.specs},
              {"trials", c.reveal.trials},
              {"rank_tol", c.reveal.rank_tol},
              {"noise_fraction", c.reveal.noise_fraction}}},
            {"compare", {{"methods", c.compare.methods}, {"re_bounds", c.compare.re_bounds}}},
            {"eval",
             {{"re_bound", c.eval.re_bound},
              {"max_bond", c.eval.max_bond},
              {"temporal_mode", opt_json(c.eval.temporal_mode)},
              {"peak", c.eval.peak}}}};
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    Reader top(j, "");
    top.get("seed", c.seed);
    top.get("out", c.out);
    top.get("workers", c.workers);
    top.get("dataset", c.dataset);

    Reader in = top.object("input");
    in.get("tensor", c.input.tensor);
    in.get("mask", c.input.mask);
    in.get("truth", c.input.truth);
    in.done();

    Reader sy = top.object("synth");
    sy.get("preset", c.synth.preset);
    sy.get("dims", c.synth.dims);
    std::vector<std::array<NodeId, 2>> edges;
    sy.get("edges", edges);
    if (j.contains("synth") && j["synth"].contains("edges")) {
        c.synth.edges.clear();
        for (auto [a, b] : edges) c.synth.edges.push_back({a, b});
    }
    sy.get("bond_min", c.synth.bond_min);
    sy.get("bond_max", c.synth.bond_max);
    sy.get("missing_fraction", c.synth.missing_fraction);
    sy.get("noise_fraction", c.synth.noise_fraction);
    sy.done();

    read_search(top.object("search"), c.search);

    Reader tr = top.object("trals");
    tr.get("ranks", c.trals.ranks);
    tr.get("max_rank", c.trals.max_rank);
    tr.get("max_iters", c.trals.max_iters);
    tr.get("tol", c.trals.tol);
    tr.get("ridge", c.trals.ridge);
    tr.get_enum("init", c.trals.init, parse_ring_init);
    tr.done();

    Reader rv = top.object("reveal");
    rv.get("specs", c.reveal.specs);
    rv.get("trials", c.reveal.trials);
    rv.get("rank_tol", c.reveal.rank_tol);
    rv.get("noise_fraction", c.reveal.noise_fraction);
    rv.done();

    Reader cm = top.object("compare");
    cm.get("methods", c.compare.methods);
    cm.get("re_bounds", c.compare.re_bounds);
    cm.done();

    Reader ev = top.object("eval");
    ev.get("re_bound", c.eval.re_bound);
    ev.get("max_bond", c.eval.max_bond);
    ev.get("temporal_mode", c.eval.temporal_mode);
    ev.get("peak", c.eval.peak);
    ev.done();

    top.done();
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

}  // namespace rgtn
