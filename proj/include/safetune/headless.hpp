#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "safetune/config.hpp"
#include "safetune/session.hpp"

namespace safetune {

// 64-bit FNV-1a, rendered as 16 hex digits.
inline std::string fnv1a_hex(std::string_view data)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// The report holds no ids or timestamps, so equal seeds give equal hashes.
inline std::string report_hash(const json& report) { return fnv1a_hex(report.dump()); }

struct HeadlessResult {
    std::string session_id;
    std::filesystem::path session_dir;
    json report;
    std::string hash;
};

// Runs a whole campaign through the session machinery with the automated
// rollout rater answering every query. All artifacts land in the session
// directory under `root`.
inline HeadlessResult run_headless(const CampaignConfig& cfg, const std::filesystem::path& root,
                                   std::optional<std::string> id = std::nullopt)
{
    SessionService svc(root);
    auto s = svc.create(cfg, std::move(id));
    while (!s->finished()) {
        const json q = s->queries();
        for (const auto& item : q.at("queries")) {
            FeedbackSubmission f;
            f.query_id = item.at("id").get<std::string>();
            f.verdict = s->automatic_verdict(f.query_id);
            f.rater = "rollout-scorer";
            f.source = "oracle";
            s->submit(f);
        }
    }
    HeadlessResult out;
    out.session_id = s->id();
    out.session_dir = root / "sessions" / s->id();
    out.report = s->report();
    out.hash = report_hash(out.report);
    return out;
}

}  // namespace safetune
