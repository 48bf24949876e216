#include "safetune/config.hpp"

#include <gtest/gtest.h>

namespace safetune {
namespace {

const std::string source_dir = SAFETUNE_SOURCE_DIR;

json minimal()
{
    return {{"scenario",
             {{"start", {{"x", 0.0}, {"y", 0.0}}}, {"goal", {3.0, 0.0}}, {"obstacles", json::array()}}}};
}

// Message of the ConfigError thrown by `fn`, or "" when none is thrown.
template <class Fn>
std::string error_of(Fn&& fn)
{
    try {
        fn();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

TEST(CampaignConfig, MinimalUsesDefaults)
{
    const CampaignConfig c = parse_campaign(minimal());
    EXPECT_EQ(c.grid.dims().size(), 4u);
    EXPECT_EQ(c.learner.actions_per_iteration, 3u);
    EXPECT_EQ(c.learner.iterations, 30u);
    ASSERT_TRUE(c.learner.roi_lambda);
    EXPECT_EQ(*c.learner.roi_lambda, -0.5);
    EXPECT_EQ(c.simulation.control_period, 0.05);
    EXPECT_EQ(c.simulation.dt, 0.001);
    EXPECT_FALSE(c.feedback.auto_label_on_skip);
}

TEST(CampaignConfig, ErrorsNameTheField)
{
    json j = minimal();
    j["learner"] = {{"roi_lambda", "high"}};
    EXPECT_EQ(error_of([&] { parse_campaign(j); }), "learner.roi_lambda: expected a number");

    j = minimal();
    j["scenario"]["obstacles"] = {{{"center", {1.0}}, {"radius", 0.5}}};
    EXPECT_EQ(error_of([&] { parse_campaign(j); }), "scenario.obstacles[0].center: expected [x, y]");

    j = minimal();
    j["grid"] = {{"dimensions", {{{"name", "alpha"}, {"min", 1}, {"max", 0}, {"step", 1}}}}};
    EXPECT_EQ(error_of([&] { parse_campaign(j); }).rfind("grid: ", 0), 0u);

    j = minimal();
    j["seed"] = -3;
    EXPECT_EQ(error_of([&] { parse_campaign(j); }), "seed: expected a non-negative integer");

    j = minimal();
    j["scenario"].erase("goal");
    EXPECT_EQ(error_of([&] { parse_campaign(j); }), "scenario.goal: missing required field");

    j = minimal();
    j["simulation"] = {{"dt", 0.0003}};
    EXPECT_EQ(error_of([&] { parse_campaign(j); }).rfind("simulation: ", 0), 0u);

    j = minimal();
    j["simulation"] = {{"disturbance", {{"kind", "gusty"}}}};
    EXPECT_EQ(error_of([&] { parse_campaign(j); }).rfind("simulation.disturbance.kind: ", 0), 0u);

    j = minimal();
    j["learner"] = {{"actions_per_iteration", 0}};
    EXPECT_EQ(error_of([&] { parse_campaign(j); }).rfind("learner: ", 0), 0u);
}

TEST(CampaignConfig, UnknownFieldsAreRejected)
{
    json j = minimal();
    j["lerner"] = json::object();
    EXPECT_EQ(error_of([&] { parse_campaign(j); }), "lerner: unknown field");
    j = minimal();
    j["model"] = {{"kernel", {{"lengthscale", 2.0}}}};
    EXPECT_EQ(error_of([&] { parse_campaign(j); }), "model.kernel.lengthscale: unknown field");
}

TEST(CampaignConfig, StartInsideAnObstacleIsRejected)
{
    json j = minimal();
    j["scenario"]["obstacles"] = {{{"center", {0.2, 0.0}}, {"radius", 0.5}}};
    EXPECT_EQ(error_of([&] { parse_campaign(j); }).rfind("scenario.obstacles[0]: ", 0), 0u);
}

TEST(CampaignConfig, ShiftLargerThanBoundIsRejected)
{
    json j = minimal();
    j["scenario"]["measurement_shift"] = {0.0, -0.2};
    j["scenario"]["measurement_bound"] = 0.1;
    EXPECT_EQ(error_of([&] { parse_campaign(j); }).rfind("scenario.measurement_bound: ", 0), 0u);
    j["scenario"].erase("measurement_bound");
    EXPECT_NEAR(parse_campaign(j).environment.measurement_bound, 0.2, 1e-15);
}

TEST(CampaignConfig, RoundTripsThroughJson)
{
    json j = minimal();
    j["name"] = "rt";
    j["seed"] = 91;
    j["learner"] = {{"roi_lambda", nullptr}, {"iterations", 4}};
    j["model"] = {{"kernel", {{"lengthscales", {1.0, 0.5, 0.2, 0.1}}}}};
    j["simulation"] = {{"disturbance", {{"kind", "bounded_noise"}, {"bound", 0.1}}}, {"saturate", false}};
    j["feedback"] = {{"auto_label_on_skip", true}};
    const CampaignConfig a = parse_campaign(j);
    EXPECT_FALSE(a.learner.roi_lambda);
    EXPECT_EQ(a.learner.seed, 91u);
    EXPECT_FALSE(a.simulation.saturation);
    const json once = to_json(a);
    const json twice = to_json(parse_campaign(once));
    EXPECT_EQ(once, twice);
}

TEST(CampaignConfig, ScenarioFileIsResolvedAgainstTheConfigDirectory)
{
    const CampaignConfig c = load_campaign(source_dir + "/configs/minimal.json");
    EXPECT_EQ(c.environment.obstacles.size(), 2u);
    EXPECT_NEAR(c.environment.measurement_shift.y(), -0.1, 1e-15);
    const CampaignConfig f = load_campaign(source_dir + "/configs/fig3.json");
    EXPECT_EQ(f.learner.iterations, 30u);
    EXPECT_EQ(f.learner.actions_per_iteration, 3u);

    json j = minimal();
    j["scenario"] = "does/not/exist.json";
    EXPECT_EQ(error_of([&] { parse_campaign(j, source_dir); }).rfind("scenario: ", 0), 0u);
}

TEST(SyntheticConfig, LoadsShippedStudy)
{
    const SyntheticStudy s = load_synthetic(source_dir + "/configs/fig2.json");
    EXPECT_EQ(s.config.runs, 50u);
    ASSERT_EQ(s.lambdas.size(), 2u);
    EXPECT_EQ(*s.lambdas[0], -0.5);
    EXPECT_FALSE(s.lambdas[1]);
    EXPECT_LE(ActionGrid(s.config.grid).size(), 2000u);
}

TEST(SyntheticConfig, Validation)
{
    const json grid = {{"dimensions", {{{"name", "x"}, {"min", 0}, {"max", 9}, {"step", 1}}}}};
    EXPECT_EQ(error_of([&] { parse_synthetic({{"grid", grid}, {"runs", 0}}); }), "runs: must be at least 1");
    EXPECT_EQ(error_of([&] { parse_synthetic({{"grid", grid}, {"lambdas", {-0.5, "x"}}}); }),
              "lambdas[1]: expected a number");
    EXPECT_EQ(error_of([&] { parse_synthetic({{"runs", 2}}); }), "grid: missing required field");
}

TEST(LambdaList, Parsing)
{
    const auto l = parse_lambda_list("-0.5,0,plain,inf,none,1e-2");
    ASSERT_EQ(l.size(), 6u);
    EXPECT_EQ(*l[0], -0.5);
    EXPECT_EQ(*l[1], 0.0);
    EXPECT_FALSE(l[2]);
    EXPECT_FALSE(l[3]);
    EXPECT_FALSE(l[4]);
    EXPECT_EQ(*l[5], 0.01);
    EXPECT_THROW(parse_lambda_list(""), ConfigError);
    EXPECT_THROW(parse_lambda_list("0.5x"), ConfigError);
    EXPECT_THROW(parse_lambda_list("nan"), ConfigError);
    EXPECT_THROW(parse_lambda_list("-inf"), ConfigError);
    EXPECT_EQ(lambda_label(std::nullopt), "plain");
    EXPECT_EQ(lambda_label(-0.5), "-0.5");
}

TEST(CampaignCsv, HeaderAndRows)
{
    CampaignStats st;
    st.lambda = -0.5;
    st.error_mean = {1.0, 0.5};
    st.error_stderr = {0.1, 0.05};
    st.unsafe_mean = {0.0, 1.5};
    st.unsafe_stderr = {0.0, 0.25};
    EXPECT_EQ(campaign_csv({st}),
              "lambda,iteration,error_mean,error_stderr,unsafe_mean,unsafe_stderr\n"
              "-0.5,1,1.0,0.1,0.0,0.0\n"
              "-0.5,2,0.5,0.05,1.5,0.25\n");
}

}  // namespace
}  // namespace safetune
