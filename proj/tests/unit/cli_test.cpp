#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "koalition/cli.hpp"
#include "support.hpp"

using namespace koalition;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "koalition");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& content) {
  const auto dir = std::filesystem::temp_directory_path() / "koalition_cli_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / name).string();
  ktest::write_text(path, content);
  return path;
}

const std::string kPolls = ktest::data_path("polls.csv");
const std::string kConfig = ktest::data_path("config.ini");

Json error_json(const Outcome& o) {
  EXPECT_EQ(std::count(o.err.begin(), o.err.end(), '\n'), 1) << o.err;
  return Json::parse(o.err);
}

}  // namespace

TEST(Cli, NowcastIsDeterministicJson) {
  const std::vector<std::string> args{"nowcast", "--polls", kPolls, "--config", kConfig,
                                      "--as-of", "2021-09-01", "--seed", "42", "--draws", "2000"};
  const auto a = run_cli(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_TRUE(a.err.empty());
  const auto b = run_cli(args);
  EXPECT_EQ(a.out, b.out);
  const auto j = Json::parse(a.out);
  EXPECT_EQ(j["as_of"], "2021-09-01");
  EXPECT_EQ(j["seed"], 42);
  EXPECT_EQ(j["draws"], 2000);
  EXPECT_EQ(j["window_days"], 14);
  EXPECT_TRUE(j["coalitions"].contains("ampel"));
  EXPECT_TRUE(j["diagnostics"].contains("hung_fraction"));
  EXPECT_FALSE(j["diagnostics"]["polls_used"].empty());
}

TEST(Cli, ThreadCountDoesNotChangeOutput) {
  std::vector<std::string> args{"nowcast", "--polls", kPolls, "--config", kConfig,
                                "--seed", "42", "--draws", "9000"};
  auto one = args;
  one.insert(one.end(), {"--threads", "1"});
  auto four = args;
  four.insert(four.end(), {"--threads", "4"});
  EXPECT_EQ(run_cli(one).out, run_cli(four).out);
}

TEST(Cli, DefaultAsOfIsNewestPoll) {
  const auto r = run_cli({"nowcast", "--polls", kPolls, "--config", kConfig, "--draws", "1000"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["as_of"], ktest::fixture_polls().back().publish_date.str());
}

TEST(Cli, ForecastAddsHorizonFields) {
  const auto r = run_cli({"forecast", "--polls", kPolls, "--config", kConfig, "--as-of",
                          "2021-08-27", "--election-date", "2021-09-26", "--draws", "1000"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["horizon_days"], 30);
  EXPECT_EQ(j["election_date"], "2021-09-26");
  EXPECT_EQ(j["shrink_factor"], round6(1.0 / 1.5));
  EXPECT_EQ(j["tau"], 60.0);
}

TEST(Cli, ForecastBeforeAsOfIsADataError) {
  const auto r = run_cli({"forecast", "--polls", kPolls, "--config", kConfig, "--as-of",
                          "2021-08-27", "--election-date", "2021-08-01", "--draws", "1000"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(error_json(r)["error"], "past-election");
}

TEST(Cli, ParliamentsList) {
  const auto r = run_cli({"parliaments", "--polls", kPolls, "--config", kConfig, "--k", "4",
                          "--coalition", "groko"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  ASSERT_EQ(j["parliaments"].size(), 4u);
  int total = 0;
  for (const auto& [id, seats] : j["parliaments"][0]["seats"].items()) total += seats.get<int>();
  EXPECT_EQ(total, 598);
  EXPECT_EQ(j["parliaments"][0]["coalition"], "groko");
}

TEST(Cli, PlotEveryFigureToFile) {
  for (const std::string fig : {"classic", "poe-bars", "density", "parliaments", "ridgeline",
                                "poe-timeline", "fan", "forecast-ridgeline"}) {
    const auto out = temp_file(fig + ".svg", "");
    const auto r = run_cli({"plot", "--figure", fig, "--polls", kPolls, "--config", kConfig,
                            "--as-of", "2021-08-27", "--election-date", "2021-09-26", "--draws",
                            "1000", "--out", out, "--max-ridges", "4"});
    ASSERT_EQ(r.code, 0) << fig << ": " << r.err;
    EXPECT_TRUE(r.out.empty());
    const auto xml = ktest::read_text(out);
    EXPECT_TRUE(ktest::well_formed_xml(xml)) << fig;
    EXPECT_NE(xml.find("as_of=2021-08-27"), std::string::npos) << fig;
  }
}

TEST(Cli, FanWithoutElectionDateFails) {
  const auto r = run_cli({"plot", "--figure", "fan", "--polls", kPolls, "--config", kConfig});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(error_json(r)["error"], "missing-election-date");
}

TEST(Cli, UsageErrorsExitOne) {
  const auto missing = run_cli({"nowcast", "--config", kConfig});
  EXPECT_EQ(missing.code, 1);
  const auto j = error_json(missing);
  EXPECT_EQ(j["error"], "usage");
  EXPECT_NE(j["message"].get<std::string>().find("--polls"), std::string::npos);
  EXPECT_NE(j["usage"].get<std::string>().find("nowcast"), std::string::npos);
  EXPECT_EQ(run_cli({}).code, 1);
  EXPECT_EQ(run_cli({"explode"}).code, 1);
  EXPECT_EQ(run_cli({"plot", "--figure", "pie", "--polls", kPolls, "--config", kConfig}).code, 1);
  EXPECT_EQ(run_cli({"nowcast", "--polls", kPolls, "--config", kConfig, "--draws", "many"}).code, 1);
}

TEST(Cli, HelpExitsZero) {
  const auto r = run_cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("nowcast"), std::string::npos);
}

TEST(Cli, DataErrorsExitTwoWithFileAndLine) {
  const auto bad = temp_file("bad.csv", "pollster,date,n,CDU,SPD\nA,2021-01-01,1000,30,20\n"
                                        "B,2021-02-30,1000,30,20\n");
  const auto r = run_cli({"nowcast", "--polls", bad, "--config", kConfig});
  EXPECT_EQ(r.code, 2);
  const auto j = error_json(r);
  EXPECT_EQ(j["error"], "bad-date");
  EXPECT_EQ(j["file"], bad);
  EXPECT_EQ(j["line"], 3);

  const auto missing = run_cli({"nowcast", "--polls", "/nonexistent/polls.csv", "--config", kConfig});
  EXPECT_EQ(missing.code, 2);

  const auto early = run_cli({"nowcast", "--polls", kPolls, "--config", kConfig, "--as-of",
                              "2020-01-01"});
  EXPECT_EQ(early.code, 2);
  EXPECT_EQ(error_json(early)["error"], "no-polls");

  const auto few = run_cli({"nowcast", "--polls", kPolls, "--config", kConfig, "--draws", "10"});
  EXPECT_EQ(few.code, 2);
  EXPECT_EQ(error_json(few)["error"], "insufficient-draws");
}

TEST(Cli, ConfigErrorsExitThree) {
  const auto cfg = temp_file("bad.ini", ktest::read_text(kConfig) + "broken = SPD, PIRATEN\n");
  const auto r = run_cli({"nowcast", "--polls", kPolls, "--config", cfg});
  EXPECT_EQ(r.code, 3);
  const auto j = error_json(r);
  EXPECT_EQ(j["error"], "unknown-party");
  EXPECT_NE(j["message"].get<std::string>().find("broken"), std::string::npos);
  EXPECT_EQ(j["file"], cfg);

  const auto unknown = run_cli({"nowcast", "--polls", kPolls, "--config", kConfig, "--coalition",
                                "schwampel"});
  EXPECT_EQ(unknown.code, 3);
  EXPECT_NE(error_json(unknown)["message"].get<std::string>().find("schwampel"), std::string::npos);

  EXPECT_EQ(run_cli({"nowcast", "--polls", kPolls, "--config", "/nonexistent.ini"}).code, 3);
}
