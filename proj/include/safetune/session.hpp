#pragma once

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <regex>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "safetune/action_grid.hpp"
#include "safetune/config.hpp"
#include "safetune/learner.hpp"
#include "safetune/rollouts.hpp"
#include "safetune/storage.hpp"
#include "safetune/utility_model.hpp"

namespace safetune {

enum class ServiceErrorKind { invalid, not_found, conflict, stale_version, internal };

struct ServiceError : std::runtime_error {
    ServiceError(ServiceErrorKind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
    ServiceErrorKind kind;
};

inline int http_status(ServiceErrorKind k)
{
    switch (k) {
    case ServiceErrorKind::invalid:
        return 400;
    case ServiceErrorKind::not_found:
        return 404;
    case ServiceErrorKind::conflict:
    case ServiceErrorKind::stale_version:
        return 409;
    default:
        return 500;
    }
}

inline const char* error_code(ServiceErrorKind k)
{
    switch (k) {
    case ServiceErrorKind::invalid:
        return "invalid";
    case ServiceErrorKind::not_found:
        return "not_found";
    case ServiceErrorKind::conflict:
        return "conflict";
    case ServiceErrorKind::stale_version:
        return "stale_version";
    default:
        return "internal";
    }
}

// Verdicts: "first", "second" or "skip" for preference queries; "safe",
// "unsafe" or "skip" for ordinal queries.
struct FeedbackSubmission {
    std::string query_id;
    std::string verdict;
    std::string rater = "anonymous";
    std::string source = "human";
    std::optional<std::uint64_t> expected_version;
};

struct SubmitResult {
    std::uint64_t version = 0;
    bool advanced = false;
    std::size_t iteration = 0;  // completed iterations after this call
    bool finished = false;
};

inline std::string utc_timestamp()
{
    using namespace std::chrono;
    const auto now = system_clock::now();
    const std::time_t t = system_clock::to_time_t(now);
    const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[48];
    std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
    return out;
}

inline bool valid_session_id(const std::string& id)
{
    static const std::regex re("[A-Za-z0-9_-]{1,64}");
    return std::regex_match(id, re);
}

inline const char* to_string(QueryKind k) { return k == QueryKind::preference ? "preference" : "ordinal"; }

inline const char* to_string(Category c) { return c == Category::safe ? "safe" : "unsafe"; }

// One tuning campaign with a human (or automated) rater in the loop.
//
// On disk, under the session directory:
//   config.json      normalized campaign configuration
//   dataset.jsonl    one line per answered query, appended and synced
//   skips.jsonl      one line per skipped query
//   checkpoint.json  learner state after the last completed iteration plus
//                    the pending proposal, replaced atomically
//   rollouts/        one JSON payload per simulated action
//
// Feedback lines are written before the learner advances. If the process dies
// in between, reopening the session replays the journals and performs the
// advance.
class Session {
public:
    static std::shared_ptr<Session> create(const std::filesystem::path& dir, std::string id, CampaignConfig cfg)
    {
        if (!valid_session_id(id)) throw ServiceError(ServiceErrorKind::invalid, "invalid session id");
        if (std::filesystem::exists(dir)) {
            throw ServiceError(ServiceErrorKind::conflict, "session " + id + " already exists");
        }
        std::filesystem::create_directories(dir / "rollouts");
        auto s = std::shared_ptr<Session>(new Session(dir, std::move(id), std::move(cfg)));
        io::write_atomic(dir / "config.json", to_json(s->cfg_).dump(2) + "\n");
        std::lock_guard lock(s->mu_);
        s->start_iteration_locked();
        s->write_checkpoint_locked();
        return s;
    }

    static std::shared_ptr<Session> open(const std::filesystem::path& dir)
    {
        const std::string id = dir.filename().string();
        if (!std::filesystem::exists(dir / "checkpoint.json")) {
            throw ServiceError(ServiceErrorKind::not_found, "session " + id + " not found");
        }
        const CampaignConfig cfg = parse_campaign(json::parse(io::read_file(dir / "config.json")));
        auto s = std::shared_ptr<Session>(new Session(dir, id, cfg));
        std::lock_guard lock(s->mu_);
        s->recover_locked();
        return s;
    }

    const std::string& id() const { return id_; }
    const CampaignConfig& config() const { return cfg_; }
    const ActionGrid& grid() const { return grid_; }

    std::uint64_t version() const
    {
        std::lock_guard lock(mu_);
        return version_locked();
    }

    bool finished() const
    {
        std::lock_guard lock(mu_);
        return !pending_.has_value();
    }

    LearnerState state() const
    {
        std::lock_guard lock(mu_);
        return state_;
    }

    // Unresolved queries of the current iteration.
    json queries() const
    {
        std::lock_guard lock(mu_);
        json q = json::array();
        if (pending_) {
            for (std::size_t k = 0; k < pending_->queries.size(); ++k) {
                if (resolved_.count(query_ids_[k])) continue;
                q.push_back(query_json_locked(k));
            }
        }
        return {{"iteration", pending_ ? pending_->iteration : state_.iteration},
                {"version", version_locked()},
                {"finished", !pending_.has_value()},
                {"queries", q}};
    }

    json rollout(const std::string& rid) const
    {
        std::lock_guard lock(mu_);
        for (const auto& [action, payload] : rollouts_) {
            if (rollout_id(action) == rid) return payload;
        }
        throw ServiceError(ServiceErrorKind::not_found, "rollout " + rid + " not found");
    }

    std::vector<json> rollouts() const
    {
        std::lock_guard lock(mu_);
        std::vector<json> out;
        for (const auto& [action, payload] : rollouts_) out.push_back(payload);
        return out;
    }

    // Verdict the automated rater would give; used by headless runs and for
    // auto-labelling skipped queries.
    std::string automatic_verdict(const std::string& query_id) const
    {
        std::lock_guard lock(mu_);
        return automatic_verdict_locked(find_query_locked(query_id));
    }

    SubmitResult submit(const FeedbackSubmission& f)
    {
        std::lock_guard lock(mu_);
        if (f.expected_version && *f.expected_version != version_locked()) {
            throw ServiceError(ServiceErrorKind::stale_version,
                               "stale version " + std::to_string(*f.expected_version) + ", current is " +
                                   std::to_string(version_locked()));
        }
        if (!pending_) throw ServiceError(ServiceErrorKind::conflict, "campaign is finished");
        const std::size_t k = find_query_locked(f.query_id);
        if (resolved_.count(f.query_id)) {
            throw ServiceError(ServiceErrorKind::conflict, "query " + f.query_id + " was already answered");
        }
        const Query& q = pending_->queries[k];
        const bool skip = f.verdict == "skip";
        const bool ok = skip || (q.kind == QueryKind::preference ? (f.verdict == "first" || f.verdict == "second")
                                                                 : (f.verdict == "safe" || f.verdict == "unsafe"));
        if (!ok) {
            throw ServiceError(ServiceErrorKind::invalid,
                               "verdict '" + f.verdict + "' is not valid for a " + to_string(q.kind) + " query");
        }

        json rec = {{"query_id", f.query_id}, {"iteration", pending_->iteration}, {"rater", f.rater},
                    {"timestamp", utc_timestamp()}};
        FeedbackDataset contribution;
        std::filesystem::path journal = dir_ / "dataset.jsonl";
        if (skip && !cfg_.feedback.auto_label_on_skip) {
            journal = dir_ / "skips.jsonl";
            rec["type"] = to_string(q.kind);
            rec["source"] = f.source;
        } else {
            const std::string verdict = skip ? automatic_verdict_locked(k) : f.verdict;
            rec["source"] = skip ? std::string("oracle") : f.source;
            if (skip) rec["auto_label"] = true;
            contribution = feedback_from(q, verdict);
            add_record_fields(rec, contribution);
        }
        io::append_line(journal, rec.dump());
        if (journal.filename() == "skips.jsonl") {
            ++skip_count_;
        } else {
            ++record_count_;
        }
        resolved_.insert(f.query_id);
        current_.append(contribution);
        fault_point("after_append");

        SubmitResult r;
        if (resolved_.size() == pending_->queries.size()) {
            advance_locked();
            r.advanced = true;
        }
        r.version = version_locked();
        r.iteration = state_.iteration;
        r.finished = !pending_.has_value();
        return r;
    }

    json report() const
    {
        std::lock_guard lock(mu_);
        json best = nullptr;
        if (state_.best) {
            best = {{"index", *state_.best},
                    {"values", action_values(*state_.best)},
                    {"rollout_id", rollout_id(*state_.best)},
                    {"summary", rollouts_.at(*state_.best).at("summary")}};
        }
        return {{"name", cfg_.name},
                {"seed", cfg_.seed},
                {"iteration", state_.iteration},
                {"iterations", cfg_.learner.iterations},
                {"finished", !pending_.has_value()},
                {"version", version_locked()},
                {"best", best},
                {"visited", state_.visited.size()},
                {"feedback",
                 {{"preferences", state_.dataset.preferences.size()},
                  {"labels", state_.dataset.labels.size()},
                  {"skipped", skip_count_}}},
                {"nonconverged_fits", state_.nonconverged_fits},
                {"history", history_}};
    }

    // Feedback journal entries in the order they were recorded.
    json dataset_records() const
    {
        std::lock_guard lock(mu_);
        json out = json::array();
        for (const auto& line : io::read_journal(dir_ / "dataset.jsonl")) out.push_back(json::parse(line));
        return out;
    }

private:
    Session(std::filesystem::path dir, std::string id, CampaignConfig cfg)
        : dir_(std::move(dir)),
          id_(std::move(id)),
          cfg_(std::move(cfg)),
          grid_(cfg_.grid),
          learner_(cfg_.learner, grid_)
    {
    }

    std::uint64_t version_locked() const { return record_count_ + skip_count_ + state_.iteration; }

    json action_values(std::size_t a) const
    {
        const Action act = grid_.action(a);
        json v = json::object();
        for (std::size_t d = 0; d < grid_.rank(); ++d) v[grid_.spec().dims()[d].name] = act.values[d];
        return v;
    }

    json query_json_locked(std::size_t k) const
    {
        const Query& q = pending_->queries[k];
        json actions = json::array();
        json rids = json::array();
        actions.push_back(q.first);
        rids.push_back(rollout_id(q.first));
        if (q.kind == QueryKind::preference) {
            actions.push_back(q.second);
            rids.push_back(rollout_id(q.second));
        }
        json payloads = json::array();
        for (const auto& a : actions) payloads.push_back(rollouts_.at(a.get<std::size_t>()));
        return {{"id", query_ids_[k]},
                {"kind", to_string(q.kind)},
                {"actions", actions},
                {"rollout_ids", rids},
                {"rollouts", payloads}};
    }

    std::size_t find_query_locked(const std::string& id) const
    {
        if (pending_) {
            for (std::size_t k = 0; k < query_ids_.size(); ++k) {
                if (query_ids_[k] == id) return k;
            }
        }
        // Ids of completed iterations have the form "<iteration>-<k>".
        const auto dash = id.find('-');
        if (dash != std::string::npos && dash > 0) {
            try {
                const std::size_t it = std::stoul(id.substr(0, dash));
                const std::size_t k = std::stoul(id.substr(dash + 1));
                if (it >= 1 && it <= state_.iteration && it <= history_.size() &&
                    k < history_[it - 1].at("queries").get<std::size_t>()) {
                    throw ServiceError(ServiceErrorKind::conflict, "query " + id + " was already answered");
                }
            } catch (const std::logic_error&) {
            }
        }
        throw ServiceError(ServiceErrorKind::not_found, "query " + id + " not found");
    }

    double score_of(std::size_t action) const { return rollouts_.at(action).at("summary").at("score").get<double>(); }

    std::string automatic_verdict_locked(std::size_t k) const
    {
        const Query& q = pending_->queries[k];
        if (q.kind == QueryKind::preference) return score_of(q.first) >= score_of(q.second) ? "first" : "second";
        return rollouts_.at(q.first).at("summary").at("suggested_label").get<std::string>();
    }

    static FeedbackDataset feedback_from(const Query& q, const std::string& verdict)
    {
        FeedbackDataset d;
        if (q.kind == QueryKind::preference) {
            if (verdict == "first") {
                d.preferences.push_back({q.first, q.second});
            } else {
                d.preferences.push_back({q.second, q.first});
            }
        } else {
            d.labels.push_back({q.first, verdict == "safe" ? Category::safe : Category::unsafe});
        }
        return d;
    }

    static void add_record_fields(json& rec, const FeedbackDataset& d)
    {
        if (!d.preferences.empty()) {
            rec["type"] = "preference";
            rec["preferred"] = d.preferences.front().preferred;
            rec["other"] = d.preferences.front().other;
        } else {
            rec["type"] = "ordinal";
            rec["action"] = d.labels.front().action;
            rec["category"] = to_string(d.labels.front().category);
        }
    }

    static FeedbackDataset parse_record(const json& rec)
    {
        FeedbackDataset d;
        const std::string type = rec.at("type").get<std::string>();
        if (type == "preference") {
            d.preferences.push_back({rec.at("preferred").get<std::size_t>(), rec.at("other").get<std::size_t>()});
        } else if (type == "ordinal") {
            const std::string c = rec.at("category").get<std::string>();
            if (c != "safe" && c != "unsafe") throw StorageError("bad category in dataset journal");
            d.labels.push_back({rec.at("action").get<std::size_t>(), c == "safe" ? Category::safe : Category::unsafe});
        } else {
            throw StorageError("bad record type in dataset journal");
        }
        return d;
    }

    void ensure_rollout_locked(std::size_t action)
    {
        if (rollouts_.count(action)) return;
        const auto path = dir_ / "rollouts" / (rollout_id(action) + ".json");
        if (std::filesystem::exists(path)) {
            try {
                rollouts_[action] = json::parse(io::read_file(path));
                return;
            } catch (const json::exception&) {
                // Regenerated below; rollouts are a pure function of the action.
            }
        }
        json payload = rollout_payload(cfg_, grid_, action, run_action(cfg_, grid_, action));
        io::write_atomic(path, payload.dump() + "\n");
        rollouts_[action] = std::move(payload);
    }

    void set_pending_locked(Proposal p)
    {
        for (auto a : p.deployed) ensure_rollout_locked(a);
        query_ids_.clear();
        for (std::size_t k = 0; k < p.queries.size(); ++k) {
            query_ids_.push_back(std::to_string(p.iteration) + "-" + std::to_string(k));
        }
        pending_ = std::move(p);
        resolved_.clear();
        current_ = {};
    }

    void start_iteration_locked()
    {
        if (learner_.finished(state_)) {
            pending_.reset();
            query_ids_.clear();
            resolved_.clear();
            current_ = {};
            return;
        }
        set_pending_locked(learner_.propose(state_));
    }

    json iteration_summary_locked(const Proposal& p) const
    {
        json deployed = json::array();
        for (auto a : p.deployed) {
            const json& s = rollouts_.at(a).at("summary");
            deployed.push_back({{"index", a},
                                {"rollout_id", rollout_id(a)},
                                {"score", s.at("score")},
                                {"min_h", s.at("min_h")},
                                {"reached_goal", s.at("reached_goal")},
                                {"suggested_label", s.at("suggested_label")}});
        }
        std::size_t unsafe = history_.empty() ? 0 : history_.back().at("cumulative_unsafe").get<std::size_t>();
        for (auto a : p.deployed) {
            if (rollouts_.at(a).at("summary").at("suggested_label") == "unsafe") ++unsafe;
        }
        return {{"iteration", p.iteration},
                {"queries", p.queries.size()},
                {"deployed", deployed},
                {"roi_fallback", p.roi_fallback},
                {"roi_size", p.roi.size()},
                {"best", *state_.best},
                {"best_values", action_values(*state_.best)},
                {"cumulative_unsafe", unsafe}};
    }

    void advance_locked()
    {
        const Proposal p = *pending_;
        state_ = learner_.commit(state_, p, current_);
        ensure_rollout_locked(*state_.best);
        history_.push_back(iteration_summary_locked(p));
        start_iteration_locked();
        write_checkpoint_locked();
    }

    void write_checkpoint_locked()
    {
        json pending = nullptr;
        if (pending_) {
            json qs = json::array();
            for (std::size_t k = 0; k < pending_->queries.size(); ++k) {
                const Query& q = pending_->queries[k];
                qs.push_back({{"id", query_ids_[k]}, {"kind", to_string(q.kind)}, {"first", q.first}, {"second", q.second}});
            }
            pending = {{"iteration", pending_->iteration},
                       {"deployed", pending_->deployed},
                       {"draws", pending_->draws},
                       {"roi", pending_->roi},
                       {"roi_fallback", pending_->roi_fallback},
                       {"previous_best", pending_->previous_best ? json(*pending_->previous_best) : json(nullptr)},
                       {"queries", qs}};
        }
        std::vector<double> mean(state_.posterior.mean().data(),
                                 state_.posterior.mean().data() + state_.posterior.mean().size());
        json cp = {{"format", 1},
                   {"iteration", state_.iteration},
                   {"visited", state_.visited},
                   {"deployed_history", state_.deployed_history},
                   {"best", state_.best ? json(*state_.best) : json(nullptr)},
                   {"posterior_mean", mean},
                   {"nonconverged_fits", state_.nonconverged_fits},
                   {"history", history_},
                   {"pending", pending}};
        io::write_atomic(dir_ / "checkpoint.json", cp.dump() + "\n");
        fault_point("after_checkpoint");
    }

    void recover_locked()
    {
        const json cp = json::parse(io::read_file(dir_ / "checkpoint.json"));
        const std::size_t iteration = cp.at("iteration").get<std::size_t>();

        FeedbackDataset committed;
        FeedbackDataset current;
        std::set<std::string> resolved;
        const std::size_t pending_iteration = iteration + 1;
        auto take = [&](const json& rec, bool is_skip) {
            const std::size_t it = rec.at("iteration").get<std::size_t>();
            const std::string qid = rec.at("query_id").get<std::string>();
            if (it > pending_iteration) throw StorageError("journal is ahead of the checkpoint");
            if (it == pending_iteration) {
                if (!resolved.insert(qid).second) throw StorageError("query " + qid + " appears twice in the journals");
                if (!is_skip) current.append(parse_record(rec));
            } else if (!is_skip) {
                committed.append(parse_record(rec));
            }
        };
        for (const auto& line : io::read_journal(dir_ / "dataset.jsonl")) {
            take(json::parse(line), false);
            ++record_count_;
        }
        for (const auto& line : io::read_journal(dir_ / "skips.jsonl")) {
            take(json::parse(line), true);
            ++skip_count_;
        }

        state_ = learner_.restore(iteration, cp.at("visited").get<std::vector<std::size_t>>(), committed,
                                  cp.at("deployed_history").get<std::vector<std::vector<std::size_t>>>());
        state_.nonconverged_fits = cp.at("nonconverged_fits").get<std::size_t>();
        const auto mean = cp.at("posterior_mean").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(mean.size()) != state_.posterior.mean().size()) {
            throw StorageError("checkpoint posterior does not match the journal");
        }
        for (std::size_t k = 0; k < mean.size(); ++k) {
            if (std::abs(mean[k] - state_.posterior.mean()[static_cast<Eigen::Index>(k)]) > 1e-6) {
                throw StorageError("checkpoint posterior does not match the journal");
            }
        }
        history_ = cp.at("history").get<std::vector<json>>();
        for (auto a : state_.visited) ensure_rollout_locked(a);

        const json& pj = cp.at("pending");
        if (pj.is_null()) {
            if (!resolved.empty()) throw StorageError("journal has feedback for a finished campaign");
            return;
        }
        Proposal p;
        p.iteration = pj.at("iteration").get<std::size_t>();
        if (p.iteration != pending_iteration) throw StorageError("checkpoint pending iteration is inconsistent");
        p.deployed = pj.at("deployed").get<std::vector<std::size_t>>();
        p.draws = pj.at("draws").get<std::vector<std::size_t>>();
        p.roi = pj.at("roi").get<std::vector<std::size_t>>();
        p.roi_fallback = pj.at("roi_fallback").get<bool>();
        if (!pj.at("previous_best").is_null()) p.previous_best = pj.at("previous_best").get<std::size_t>();
        for (const auto& q : pj.at("queries")) {
            p.queries.push_back({q.at("kind") == "preference" ? QueryKind::preference : QueryKind::ordinal,
                                 q.at("first").get<std::size_t>(), q.at("second").get<std::size_t>()});
        }
        set_pending_locked(std::move(p));
        for (const auto& qid : resolved) {
            if (std::find(query_ids_.begin(), query_ids_.end(), qid) == query_ids_.end()) {
                throw StorageError("journal references unknown query " + qid);
            }
        }
        resolved_ = std::move(resolved);
        current_ = std::move(current);
        if (resolved_.size() == pending_->queries.size()) advance_locked();
    }

    std::filesystem::path dir_;
    std::string id_;
    CampaignConfig cfg_;
    ActionGrid grid_;
    Learner learner_;

    mutable std::mutex mu_;
    LearnerState state_;
    std::optional<Proposal> pending_;
    std::vector<std::string> query_ids_;
    std::set<std::string> resolved_;
    FeedbackDataset current_;
    std::vector<json> history_;
    std::map<std::size_t, json> rollouts_;
    std::uint64_t record_count_ = 0;
    std::uint64_t skip_count_ = 0;
};

// Directory of sessions, opened lazily so that a restarted service resumes
// where the previous process stopped.
class SessionService {
public:
    explicit SessionService(std::filesystem::path root, std::filesystem::path config_base = {})
        : root_(std::move(root)), config_base_(std::move(config_base))
    {
        std::filesystem::create_directories(root_ / "sessions");
    }

    // SAFETUNE_DATA_DIR, or ./safetune-data.
    static std::filesystem::path default_root()
    {
        if (const char* env = std::getenv("SAFETUNE_DATA_DIR"); env && *env) return env;
        return "safetune-data";
    }

    const std::filesystem::path& root() const { return root_; }

    std::shared_ptr<Session> create(const json& config, std::optional<std::string> id = {})
    {
        CampaignConfig cfg;
        try {
            cfg = parse_campaign(config, config_base_);
        } catch (const ConfigError& e) {
            throw ServiceError(ServiceErrorKind::invalid, e.what());
        }
        return create(std::move(cfg), std::move(id));
    }

    std::shared_ptr<Session> create(CampaignConfig cfg, std::optional<std::string> id = {})
    {
        std::lock_guard lock(mu_);
        std::string sid = id ? *id : fresh_id_locked();
        if (!valid_session_id(sid)) throw ServiceError(ServiceErrorKind::invalid, "invalid session id");
        if (sessions_.count(sid) || std::filesystem::exists(root_ / "sessions" / sid)) {
            throw ServiceError(ServiceErrorKind::conflict, "session " + sid + " already exists");
        }
        auto s = Session::create(root_ / "sessions" / sid, sid, std::move(cfg));
        sessions_[sid] = s;
        return s;
    }

    std::shared_ptr<Session> get(const std::string& id)
    {
        if (!valid_session_id(id)) throw ServiceError(ServiceErrorKind::not_found, "session " + id + " not found");
        std::lock_guard lock(mu_);
        if (auto it = sessions_.find(id); it != sessions_.end()) return it->second;
        auto s = Session::open(root_ / "sessions" / id);
        sessions_[id] = s;
        return s;
    }

    std::vector<std::string> list() const
    {
        std::vector<std::string> ids;
        for (const auto& e : std::filesystem::directory_iterator(root_ / "sessions")) {
            if (e.is_directory()) ids.push_back(e.path().filename().string());
        }
        std::sort(ids.begin(), ids.end());
        return ids;
    }

private:
    std::string fresh_id_locked()
    {
        std::random_device rd;
        for (;;) {
            const std::uint64_t v = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
            char buf[17];
            std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
            std::string id(buf);
            if (!sessions_.count(id) && !std::filesystem::exists(root_ / "sessions" / id)) return id;
        }
    }

    std::filesystem::path root_;
    std::filesystem::path config_base_;
    std::mutex mu_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace safetune
