#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "safetune/action_grid.hpp"
#include "safetune/cbf.hpp"
#include "safetune/learner.hpp"
#include "safetune/synthetic_oracle.hpp"
#include "safetune/unicycle_sim.hpp"
#include "safetune/utility_model.hpp"

namespace safetune {

using json = nlohmann::json;

// Raised for malformed configuration; the message starts with the JSON path
// of the offending field.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

namespace cfg {

inline std::string join(const std::string& path, const std::string& key)
{
    return path.empty() ? key : path + "." + key;
}

inline std::string index(const std::string& path, std::size_t i)
{
    return path + "[" + std::to_string(i) + "]";
}

inline void fail(const std::string& path, const std::string& what)
{
    throw ConfigError((path.empty() ? std::string("<root>") : path) + ": " + what);
}

inline void expect_object(const json& j, const std::string& path)
{
    if (!j.is_object()) fail(path, "expected an object");
}

inline void allowed_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys)
{
    expect_object(j, path);
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!ok.count(it.key())) fail(join(path, it.key()), "unknown field");
    }
}

inline const json* find(const json& j, const char* key)
{
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

inline const json& require(const json& j, const char* key, const std::string& path)
{
    const json* v = find(j, key);
    if (!v) fail(join(path, key), "missing required field");
    return *v;
}

inline double as_number(const json& v, const std::string& path)
{
    if (!v.is_number()) fail(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path, "expected a finite number");
    return d;
}

inline double number(const json& j, const char* key, const std::string& path, std::optional<double> fallback = {})
{
    const json* v = find(j, key);
    if (!v) {
        if (!fallback) fail(join(path, key), "missing required field");
        return *fallback;
    }
    return as_number(*v, join(path, key));
}

inline std::uint64_t count(const json& j, const char* key, const std::string& path,
                           std::optional<std::uint64_t> fallback = {})
{
    const json* v = find(j, key);
    if (!v) {
        if (!fallback) fail(join(path, key), "missing required field");
        return *fallback;
    }
    if (!v->is_number_integer() || v->get<std::int64_t>() < 0) {
        fail(join(path, key), "expected a non-negative integer");
    }
    return v->get<std::uint64_t>();
}

inline bool boolean(const json& j, const char* key, const std::string& path, bool fallback)
{
    const json* v = find(j, key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(join(path, key), "expected true or false");
    return v->get<bool>();
}

inline std::string string(const json& j, const char* key, const std::string& path,
                          std::optional<std::string> fallback = {})
{
    const json* v = find(j, key);
    if (!v) {
        if (!fallback) fail(join(path, key), "missing required field");
        return *fallback;
    }
    if (!v->is_string()) fail(join(path, key), "expected a string");
    return v->get<std::string>();
}

inline Eigen::Vector2d vec2(const json& v, const std::string& path)
{
    if (!v.is_array() || v.size() != 2) fail(path, "expected [x, y]");
    return {as_number(v[0], index(path, 0)), as_number(v[1], index(path, 1))};
}

template <class Fn>
inline void guard(const std::string& path, Fn&& fn)
{
    try {
        fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
}

}  // namespace cfg

// ---------------------------------------------------------------------------
// Grid, model and learner

inline GridSpec parse_grid(const json& j, const std::string& path)
{
    cfg::allowed_keys(j, path, {"dimensions"});
    const json& dims = cfg::require(j, "dimensions", path);
    const std::string dpath = cfg::join(path, "dimensions");
    if (!dims.is_array() || dims.empty()) cfg::fail(dpath, "expected a non-empty array");
    std::vector<Dimension> out;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        const std::string p = cfg::index(dpath, i);
        cfg::allowed_keys(dims[i], p, {"name", "min", "max", "step"});
        out.push_back({cfg::string(dims[i], "name", p), cfg::number(dims[i], "min", p), cfg::number(dims[i], "max", p),
                       cfg::number(dims[i], "step", p)});
    }
    GridSpec spec;
    cfg::guard(path, [&] { spec = GridSpec(out); });
    return spec;
}

inline json to_json(const GridSpec& g)
{
    json dims = json::array();
    for (const auto& d : g.dims()) dims.push_back({{"name", d.name}, {"min", d.min}, {"max", d.max}, {"step", d.step}});
    return {{"dimensions", dims}};
}

inline void parse_model(const json& j, const std::string& path, LearnerConfig& lc)
{
    cfg::allowed_keys(j, path, {"kernel", "likelihood", "laplace"});
    if (const json* k = cfg::find(j, "kernel")) {
        const std::string p = cfg::join(path, "kernel");
        cfg::allowed_keys(*k, p, {"signal_variance", "lengthscales"});
        lc.kernel.signal_variance = cfg::number(*k, "signal_variance", p, 1.0);
        lc.kernel.lengthscales.clear();
        if (const json* ls = cfg::find(*k, "lengthscales")) {
            const std::string lp = cfg::join(p, "lengthscales");
            if (!ls->is_array()) cfg::fail(lp, "expected an array of numbers");
            for (std::size_t i = 0; i < ls->size(); ++i) {
                lc.kernel.lengthscales.push_back(cfg::as_number((*ls)[i], cfg::index(lp, i)));
            }
        }
    }
    if (const json* l = cfg::find(j, "likelihood")) {
        const std::string p = cfg::join(path, "likelihood");
        cfg::allowed_keys(*l, p, {"c_p", "c_o", "beta"});
        lc.likelihood.c_p = cfg::number(*l, "c_p", p, 0.1);
        lc.likelihood.c_o = cfg::number(*l, "c_o", p, 0.1);
        lc.likelihood.beta = cfg::number(*l, "beta", p, 0.0);
        if (!(lc.likelihood.c_p > 0.0)) cfg::fail(cfg::join(p, "c_p"), "must be positive");
        if (!(lc.likelihood.c_o > 0.0)) cfg::fail(cfg::join(p, "c_o"), "must be positive");
    }
    if (const json* l = cfg::find(j, "laplace")) {
        const std::string p = cfg::join(path, "laplace");
        cfg::allowed_keys(*l, p, {"jitter", "gradient_tolerance", "max_iterations"});
        lc.laplace.jitter = cfg::number(*l, "jitter", p, 1e-8);
        lc.laplace.gradient_tolerance = cfg::number(*l, "gradient_tolerance", p, 1e-8);
        lc.laplace.max_iterations = static_cast<int>(cfg::count(*l, "max_iterations", p, 100));
    }
}

inline void parse_learner(const json& j, const std::string& path, LearnerConfig& lc)
{
    cfg::allowed_keys(j, path, {"actions_per_iteration", "iterations", "roi_lambda", "line_points"});
    lc.actions_per_iteration = cfg::count(j, "actions_per_iteration", path, 3);
    lc.iterations = cfg::count(j, "iterations", path, 30);
    lc.line_points = cfg::count(j, "line_points", path, 25);
    if (const json* l = cfg::find(j, "roi_lambda")) {
        if (l->is_null()) {
            lc.roi_lambda.reset();
        } else {
            lc.roi_lambda = cfg::as_number(*l, cfg::join(path, "roi_lambda"));
        }
    }
}

inline json model_json(const LearnerConfig& lc)
{
    json ls = json::array();
    for (double l : lc.kernel.lengthscales) ls.push_back(l);
    return {{"kernel", {{"signal_variance", lc.kernel.signal_variance}, {"lengthscales", ls}}},
            {"likelihood", {{"c_p", lc.likelihood.c_p}, {"c_o", lc.likelihood.c_o}, {"beta", lc.likelihood.beta}}},
            {"laplace",
             {{"jitter", lc.laplace.jitter},
              {"gradient_tolerance", lc.laplace.gradient_tolerance},
              {"max_iterations", lc.laplace.max_iterations}}}};
}

inline json learner_json(const LearnerConfig& lc)
{
    return {{"actions_per_iteration", lc.actions_per_iteration},
            {"iterations", lc.iterations},
            {"roi_lambda", lc.roi_lambda ? json(*lc.roi_lambda) : json(nullptr)},
            {"line_points", lc.line_points}};
}

// ---------------------------------------------------------------------------
// Scenario and simulation

inline Environment parse_scenario(const json& j, const std::string& path)
{
    cfg::allowed_keys(j, path,
                      {"name", "description", "start", "goal", "obstacles", "zeta", "measurement_shift",
                       "measurement_bound"});
    Environment env;
    const json& st = cfg::require(j, "start", path);
    const std::string sp = cfg::join(path, "start");
    cfg::allowed_keys(st, sp, {"x", "y", "psi"});
    env.start = {cfg::number(st, "x", sp), cfg::number(st, "y", sp), cfg::number(st, "psi", sp, 0.0)};
    env.goal = cfg::vec2(cfg::require(j, "goal", path), cfg::join(path, "goal"));
    env.zeta = cfg::number(j, "zeta", path, 0.2);
    if (!(env.zeta > 0.0)) cfg::fail(cfg::join(path, "zeta"), "must be positive");
    if (const json* obs = cfg::find(j, "obstacles")) {
        const std::string op = cfg::join(path, "obstacles");
        if (!obs->is_array()) cfg::fail(op, "expected an array");
        for (std::size_t i = 0; i < obs->size(); ++i) {
            const std::string p = cfg::index(op, i);
            cfg::allowed_keys((*obs)[i], p, {"center", "radius"});
            Obstacle o{cfg::vec2(cfg::require((*obs)[i], "center", p), cfg::join(p, "center")),
                       cfg::number((*obs)[i], "radius", p)};
            if (!(o.radius > 0.0)) cfg::fail(cfg::join(p, "radius"), "must be positive");
            env.obstacles.push_back(o);
        }
    }
    if (const json* m = cfg::find(j, "measurement_shift")) {
        env.measurement_shift = cfg::vec2(*m, cfg::join(path, "measurement_shift"));
    }
    env.measurement_bound = cfg::number(j, "measurement_bound", path, env.measurement_shift.norm());
    if (env.measurement_bound + 1e-12 < env.measurement_shift.norm()) {
        cfg::fail(cfg::join(path, "measurement_bound"), "smaller than the measurement shift");
    }
    for (std::size_t i = 0; i < env.obstacles.size(); ++i) {
        if (barrier(env.start, env.obstacles[i], env.zeta) <= 0.0) {
            cfg::fail(cfg::index(cfg::join(path, "obstacles"), i), "start pose is not outside this obstacle");
        }
    }
    return env;
}

inline json to_json(const Environment& env)
{
    json obs = json::array();
    for (const auto& o : env.obstacles) obs.push_back({{"center", {o.center.x(), o.center.y()}}, {"radius", o.radius}});
    return {{"start", {{"x", env.start.x}, {"y", env.start.y}, {"psi", env.start.psi}}},
            {"goal", {env.goal.x(), env.goal.y()}},
            {"obstacles", obs},
            {"zeta", env.zeta},
            {"measurement_shift", {env.measurement_shift.x(), env.measurement_shift.y()}},
            {"measurement_bound", env.measurement_bound}};
}

inline DisturbanceKind parse_disturbance_kind(const std::string& s, const std::string& path)
{
    if (s == "none") return DisturbanceKind::none;
    if (s == "worst_case") return DisturbanceKind::worst_case;
    if (s == "bounded_noise") return DisturbanceKind::bounded_noise;
    cfg::fail(path, "expected one of none, worst_case, bounded_noise");
    return DisturbanceKind::none;
}

inline std::string to_string(DisturbanceKind k)
{
    switch (k) {
    case DisturbanceKind::worst_case:
        return "worst_case";
    case DisturbanceKind::bounded_noise:
        return "bounded_noise";
    default:
        return "none";
    }
}

inline SimConfig parse_simulation(const json& j, const std::string& path)
{
    cfg::allowed_keys(j, path,
                      {"control_period", "dt", "horizon", "goal_tolerance", "disturbance", "gains", "saturate",
                       "continuous_feedback"});
    SimConfig sc;
    sc.control_period = cfg::number(j, "control_period", path, 0.05);
    sc.dt = cfg::number(j, "dt", path, 0.001);
    sc.horizon = cfg::number(j, "horizon", path, 30.0);
    sc.goal_tolerance = cfg::number(j, "goal_tolerance", path, 0.1);
    sc.continuous_feedback = cfg::boolean(j, "continuous_feedback", path, false);
    if (!cfg::boolean(j, "saturate", path, true)) sc.saturation.reset();
    if (const json* d = cfg::find(j, "disturbance")) {
        const std::string p = cfg::join(path, "disturbance");
        cfg::allowed_keys(*d, p, {"kind", "bound"});
        sc.disturbance.kind = parse_disturbance_kind(cfg::string(*d, "kind", p, "none"), cfg::join(p, "kind"));
        sc.disturbance.bound = cfg::number(*d, "bound", p, 0.0);
    }
    if (const json* g = cfg::find(j, "gains")) {
        const std::string p = cfg::join(path, "gains");
        cfg::allowed_keys(*g, p, {"k_v", "k_omega", "c"});
        sc.gains.k_v = cfg::number(*g, "k_v", p, 0.5);
        sc.gains.k_omega = cfg::number(*g, "k_omega", p, 1.0);
        sc.gains.c = cfg::number(*g, "c", p, 0.1);
    }
    cfg::guard(path, [&] { sc.validate(); });
    return sc;
}

inline json to_json(const SimConfig& sc)
{
    return {{"control_period", sc.control_period},
            {"dt", sc.dt},
            {"horizon", sc.horizon},
            {"goal_tolerance", sc.goal_tolerance},
            {"disturbance", {{"kind", to_string(sc.disturbance.kind)}, {"bound", sc.disturbance.bound}}},
            {"gains", {{"k_v", sc.gains.k_v}, {"k_omega", sc.gains.k_omega}, {"c", sc.gains.c}}},
            {"saturate", sc.saturation.has_value()},
            {"continuous_feedback", sc.continuous_feedback}};
}

// ---------------------------------------------------------------------------
// Campaign

// Weights of the automated rollout rater. A rollout's score is its progress
// toward the goal plus a speed bonus when it arrives, minus penalties for
// barrier violation and filter infeasibility.
struct ScorerConfig {
    double violation_weight = 10.0;
    double infeasible_penalty = 0.5;
};

struct FeedbackConfig {
    bool auto_label_on_skip = false;
    ScorerConfig scorer;
};

struct CampaignConfig {
    std::string name = "campaign";
    std::uint64_t seed = 0;
    GridSpec grid = GridSpec::robustness_default();
    LearnerConfig learner;
    Environment environment;
    SimConfig simulation;
    FeedbackConfig feedback;
};

inline json read_json_file(const std::filesystem::path& p)
{
    std::ifstream in(p);
    if (!in) throw ConfigError(p.string() + ": cannot open file");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(p.string() + ": " + e.what());
    }
}

// `base_dir` resolves a scenario given as a relative file path.
inline CampaignConfig parse_campaign(const json& j, const std::filesystem::path& base_dir = {})
{
    cfg::allowed_keys(j, "", {"name", "seed", "grid", "learner", "model", "scenario", "simulation", "feedback"});
    CampaignConfig c;
    c.name = cfg::string(j, "name", "", "campaign");
    c.seed = cfg::count(j, "seed", "", 0);
    if (const json* g = cfg::find(j, "grid")) c.grid = parse_grid(*g, "grid");
    if (const json* l = cfg::find(j, "learner")) parse_learner(*l, "learner", c.learner);
    if (const json* m = cfg::find(j, "model")) parse_model(*m, "model", c.learner);
    const json& sc = cfg::require(j, "scenario", "");
    if (sc.is_string()) {
        std::filesystem::path p = sc.get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        json loaded;
        try {
            loaded = read_json_file(p);
        } catch (const ConfigError& e) {
            cfg::fail("scenario", e.what());
        }
        c.environment = parse_scenario(loaded, "scenario");
    } else {
        c.environment = parse_scenario(sc, "scenario");
    }
    if (const json* s = cfg::find(j, "simulation")) c.simulation = parse_simulation(*s, "simulation");
    if (const json* f = cfg::find(j, "feedback")) {
        cfg::allowed_keys(*f, "feedback", {"auto_label_on_skip", "scorer"});
        c.feedback.auto_label_on_skip = cfg::boolean(*f, "auto_label_on_skip", "feedback", false);
        if (const json* s = cfg::find(*f, "scorer")) {
            cfg::allowed_keys(*s, "feedback.scorer", {"violation_weight", "infeasible_penalty"});
            c.feedback.scorer.violation_weight = cfg::number(*s, "violation_weight", "feedback.scorer", 10.0);
            c.feedback.scorer.infeasible_penalty = cfg::number(*s, "infeasible_penalty", "feedback.scorer", 0.5);
        }
    }
    c.learner.seed = c.seed;
    ActionGrid grid(c.grid);
    cfg::guard("learner", [&] { c.learner.validate(grid); });
    return c;
}

inline json to_json(const CampaignConfig& c)
{
    return {{"name", c.name},
            {"seed", c.seed},
            {"grid", to_json(c.grid)},
            {"learner", learner_json(c.learner)},
            {"model", model_json(c.learner)},
            {"scenario", to_json(c.environment)},
            {"simulation", to_json(c.simulation)},
            {"feedback",
             {{"auto_label_on_skip", c.feedback.auto_label_on_skip},
              {"scorer",
               {{"violation_weight", c.feedback.scorer.violation_weight},
                {"infeasible_penalty", c.feedback.scorer.infeasible_penalty}}}}}};
}

inline CampaignConfig load_campaign(const std::filesystem::path& file)
{
    return parse_campaign(read_json_file(file), file.parent_path());
}

struct SyntheticStudy {
    std::string name = "synthetic";
    SyntheticCampaignConfig config;
    std::vector<std::optional<double>> lambdas{-0.5, std::nullopt};
};

inline SyntheticStudy parse_synthetic(const json& j)
{
    cfg::allowed_keys(j, "", {"name", "seed", "runs", "grid", "learner", "model", "oracle", "lambdas"});
    SyntheticStudy study;
    study.name = cfg::string(j, "name", "", "synthetic");
    SyntheticCampaignConfig& c = study.config;
    c.seed = cfg::count(j, "seed", "", 0);
    c.runs = cfg::count(j, "runs", "", 50);
    c.grid = parse_grid(cfg::require(j, "grid", ""), "grid");
    if (const json* l = cfg::find(j, "learner")) parse_learner(*l, "learner", c.learner);
    if (const json* m = cfg::find(j, "model")) parse_model(*m, "model", c.learner);
    c.oracle = c.learner.likelihood;
    if (const json* o = cfg::find(j, "oracle")) {
        cfg::allowed_keys(*o, "oracle", {"c_p", "c_o", "beta"});
        c.oracle.c_p = cfg::number(*o, "c_p", "oracle", c.oracle.c_p);
        c.oracle.c_o = cfg::number(*o, "c_o", "oracle", c.oracle.c_o);
        c.oracle.beta = cfg::number(*o, "beta", "oracle", c.oracle.beta);
    }
    if (c.runs < 1) cfg::fail("runs", "must be at least 1");
    ActionGrid grid(c.grid);
    if (grid.size() > TruthSampler::max_points) cfg::fail("grid", "too many points for an exact prior draw");
    cfg::guard("learner", [&] { c.learner.validate(grid); });
    if (const json* l = cfg::find(j, "lambdas")) {
        if (!l->is_array() || l->empty()) cfg::fail("lambdas", "expected a non-empty array");
        study.lambdas.clear();
        for (std::size_t i = 0; i < l->size(); ++i) {
            const json& v = (*l)[i];
            if (v.is_null()) {
                study.lambdas.emplace_back(std::nullopt);
            } else {
                study.lambdas.emplace_back(cfg::as_number(v, cfg::index("lambdas", i)));
            }
        }
    }
    return study;
}

inline SyntheticStudy load_synthetic(const std::filesystem::path& file)
{
    return parse_synthetic(read_json_file(file));
}

// Parses "-0.5,0,plain" into lambdas; "plain", "none" and "inf" mean no ROI.
inline std::vector<std::optional<double>> parse_lambda_list(const std::string& s)
{
    std::vector<std::optional<double>> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok == "plain" || tok == "none") {
            out.emplace_back(std::nullopt);
            continue;
        }
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != tok.size()) throw ConfigError("lambdas: cannot parse '" + tok + "'");
        if (std::isnan(v) || v == -std::numeric_limits<double>::infinity()) {
            throw ConfigError("lambdas: '" + tok + "' is not a usable confidence");
        }
        // +inf never restricts the region of interest, which is plain LineCoSpar.
        if (std::isinf(v)) {
            out.emplace_back(std::nullopt);
        } else {
            out.emplace_back(v);
        }
    }
    if (out.empty()) throw ConfigError("lambdas: empty list");
    return out;
}

inline std::string lambda_label(const std::optional<double>& l) { return l ? json(*l).dump() : "plain"; }

// One row per (lambda, iteration).
inline std::string campaign_csv(const std::vector<CampaignStats>& stats)
{
    std::string out = "lambda,iteration,error_mean,error_stderr,unsafe_mean,unsafe_stderr\n";
    for (const auto& st : stats) {
        for (std::size_t t = 0; t < st.error_mean.size(); ++t) {
            out += lambda_label(st.lambda) + "," + std::to_string(t + 1) + "," + json(st.error_mean[t]).dump() + "," +
                   json(st.error_stderr[t]).dump() + "," + json(st.unsafe_mean[t]).dump() + "," +
                   json(st.unsafe_stderr[t]).dump() + "\n";
        }
    }
    return out;
}

inline json campaign_json(const std::vector<CampaignStats>& stats)
{
    json series = json::array();
    for (const auto& st : stats) {
        series.push_back({{"lambda", st.lambda ? json(*st.lambda) : json(nullptr)},
                          {"label", lambda_label(st.lambda)},
                          {"prediction_error", {{"mean", st.error_mean}, {"stderr", st.error_stderr}}},
                          {"cumulative_unsafe", {{"mean", st.unsafe_mean}, {"stderr", st.unsafe_stderr}}},
                          {"seeds", st.seeds}});
    }
    return {{"series", series}};
}

}  // namespace safetune
