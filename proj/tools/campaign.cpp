#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "safetune/safetune.hpp"

namespace fs = std::filesystem;
using namespace safetune;

namespace {

ApiServer* g_server = nullptr;

void on_signal(int)
{
    if (g_server) g_server->stop();
}

void write_output(const std::string& text, const std::string& path)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << text;
}

int cmd_run(const std::string& config_path, bool oracle, int port, const std::string& host,
            std::optional<std::uint64_t> seed, const fs::path& data_dir, const std::string& id)
{
    CampaignConfig cfg = load_campaign(config_path);
    if (seed) {
        cfg.seed = *seed;
        cfg.learner.seed = *seed;
    }
    std::optional<std::string> sid;
    if (!id.empty()) sid = id;

    if (oracle) {
        const HeadlessResult r = run_headless(cfg, data_dir, sid);
        io::write_atomic(r.session_dir / "report.json", r.report.dump(2) + "\n");
        const json& best = r.report.at("best");
        std::cout << "session " << r.session_id << "\n"
                  << "directory " << r.session_dir.string() << "\n"
                  << "iterations " << r.report.at("iteration") << "\n"
                  << "best " << best.at("values").dump() << "\n"
                  << "best_rollout " << best.at("summary").dump() << "\n"
                  << "unsafe_deployments " << r.report.at("history").back().at("cumulative_unsafe") << "\n"
                  << "report_hash " << r.hash << "\n";
        return 0;
    }

    SessionService svc(data_dir);
    auto s = svc.create(cfg, sid);
    ApiServer server(svc);
    const int bound = server.bind(host, port);
    if (bound < 0) {
        std::cerr << "cannot bind " << host << ":" << port << "\n";
        return 1;
    }
    std::cout << "session " << s->id() << "\n"
              << "listening http://" << host << ":" << bound << "\n"
              << std::flush;
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.listen();
    g_server = nullptr;
    return 0;
}

int cmd_serve(int port, const std::string& host, const fs::path& data_dir)
{
    SessionService svc(data_dir);
    ApiServer server(svc);
    const int bound = server.bind(host, port);
    if (bound < 0) {
        std::cerr << "cannot bind " << host << ":" << port << "\n";
        return 1;
    }
    std::cout << "listening http://" << host << ":" << bound << "\n" << std::flush;
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.listen();
    g_server = nullptr;
    return 0;
}

int cmd_export(const std::string& session, const std::string& format, const std::string& output,
               const fs::path& data_dir)
{
    SessionService svc(data_dir);
    auto s = svc.get(session);
    const auto rollouts = s->rollouts();
    if (format == "csv") {
        std::string text;
        bool first = true;
        for (const auto& p : rollouts) {
            text += rollout_csv(p, first, true);
            first = false;
        }
        write_output(text, output);
    } else {
        json doc = {{"session", s->id()},
                    {"config", to_json(s->config())},
                    {"report", s->report()},
                    {"dataset", s->dataset_records()},
                    {"rollouts", rollouts}};
        write_output(doc.dump(2) + "\n", output);
    }
    return 0;
}

int cmd_fig2(const std::string& config_path, const std::string& lambdas, std::optional<std::size_t> runs,
             std::optional<std::uint64_t> seed, const std::string& csv_path, const std::string& json_path)
{
    SyntheticStudy study = load_synthetic(config_path);
    if (!lambdas.empty()) study.lambdas = parse_lambda_list(lambdas);
    if (runs) study.config.runs = *runs;
    if (seed) study.config.seed = *seed;
    const auto stats = run_campaign(study.config, study.lambdas);

    std::printf("%-8s %10s %10s %10s %10s\n", "lambda", "error", "stderr", "unsafe", "stderr");
    for (const auto& st : stats) {
        std::printf("%-8s %10.4f %10.4f %10.4f %10.4f\n", lambda_label(st.lambda).c_str(), st.error_mean.back(),
                    st.error_stderr.back(), st.unsafe_mean.back(), st.unsafe_stderr.back());
    }
    if (!csv_path.empty()) write_output(campaign_csv(stats), csv_path);
    if (!json_path.empty()) write_output(campaign_json(stats).dump(2) + "\n", json_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Preference-based tuning of robust safety filters"};
    app.require_subcommand(1);
    std::string data_dir = SessionService::default_root().string();
    app.add_option("--data-dir", data_dir, "Session storage (default: $SAFETUNE_DATA_DIR or ./safetune-data)");

    auto* run = app.add_subcommand("run", "Start a campaign from a config file");
    std::string config_path;
    bool oracle = false;
    bool serve = false;
    int port = 8080;
    std::string host = "127.0.0.1";
    std::optional<std::uint64_t> seed;
    std::string id;
    run->add_option("--config", config_path, "Campaign config JSON")->required()->check(CLI::ExistingFile);
    auto* o_oracle = run->add_flag("--oracle", oracle, "Answer every query with the automated rollout rater");
    auto* o_serve = run->add_flag("--serve", serve, "Serve the session over HTTP for a human rater");
    o_oracle->excludes(o_serve);
    run->add_option("--port", port, "HTTP port (0 picks a free one)");
    run->add_option("--host", host, "HTTP bind address");
    run->add_option("--seed", seed, "Override the config seed");
    run->add_option("--id", id, "Session id (default: random)");

    auto* srv = app.add_subcommand("serve", "Serve all stored sessions over HTTP");
    srv->add_option("--port", port, "HTTP port");
    srv->add_option("--host", host, "HTTP bind address");

    auto* exp = app.add_subcommand("export", "Export a stored session");
    std::string session;
    std::string format = "json";
    std::string output;
    exp->add_option("--session", session, "Session id")->required();
    exp->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    exp->add_option("--output,-o", output, "Output file (default: stdout)");

    auto* fig2 = app.add_subcommand("fig2", "Synthetic safety study: ROI learner against plain line search");
    std::string fig2_config = std::string(SAFETUNE_SOURCE_DIR) + "/configs/fig2.json";
    std::string lambdas;
    std::optional<std::size_t> runs;
    std::string csv_path;
    std::string json_path;
    fig2->add_option("--config", fig2_config, "Synthetic study config JSON")->check(CLI::ExistingFile);
    fig2->add_option("--lambdas", lambdas, "Comma list of ROI confidences; 'plain' or 'inf' for no ROI");
    fig2->add_option("--runs", runs, "Runs per lambda");
    fig2->add_option("--seed", seed, "Override the config seed");
    fig2->add_option("--csv", csv_path, "Write per-iteration curves as CSV");
    fig2->add_option("--json", json_path, "Write per-iteration curves as JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            if (!oracle && !serve) {
                std::cerr << "run: choose --oracle or --serve\n";
                return 2;
            }
            return cmd_run(config_path, oracle, port, host, seed, data_dir, id);
        }
        if (*srv) return cmd_serve(port, host, data_dir);
        if (*exp) return cmd_export(session, format, output, data_dir);
        if (*fig2) return cmd_fig2(fig2_config, lambdas, runs, seed, csv_path, json_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ServiceError& e) {
        std::cerr << error_code(e.kind) << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
