#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace pudq;

namespace {

const std::string kBin = PUDQ_PGO_BIN;
const std::string kFaultBin = PUDQ_PGO_FAULT_BIN;

struct CliRun {
  int status = -1;
  std::string output;
};

CliRun run(const std::string& bin, const std::string& args) {
  const fs::path log = fs::temp_directory_path() / ("pudq_cli_" + std::to_string(::getpid()) + ".log");
  const int raw = std::system((bin + " " + args + " > " + log.string() + " 2>&1").c_str());
  CliRun r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  fs::remove(log);
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

ProductPoint read_estimate(const fs::path& p) {
  const nlohmann::json j = read_json(p);
  std::vector<Pudq> xs;
  for (const auto& v : j.at("vertices")) xs.emplace_back(v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>());
  return stack(xs);
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("pudq_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SynthIsDeterministic) {
  ASSERT_EQ(run(kBin, "synth --n 120 --seed 9 --out " + path("a")).status, 0);
  ASSERT_EQ(run(kBin, "synth --n 120 --seed 9 --out " + path("b")).status, 0);
  EXPECT_EQ(slurp(path("a/graph.json")), slurp(path("b/graph.json")));
  const LoadedGraph g = load_graph(path("a/graph.json"), GraphFormat::extended_json);
  EXPECT_EQ(g.graph.num_vertices(), 120);
  EXPECT_TRUE(g.ground_truth.has_value());
  const nlohmann::json m = read_json(path("a/manifest.json"));
  EXPECT_EQ(m["seed"], 9);
  EXPECT_EQ(m["exit_status"], 0);
  EXPECT_EQ(m["versions"]["schema"], kSchemaVersion);
}

TEST_F(Cli, SynthRecordsDrawnSeed) {
  ASSERT_EQ(run(kBin, "synth --n 30 --out " + path("a")).status, 0);
  const nlohmann::json m = read_json(path("a/manifest.json"));
  EXPECT_TRUE(m["seed_drawn"].get<bool>());
  const std::string seed = std::to_string(m["seed"].get<std::uint64_t>());
  ASSERT_EQ(run(kBin, "synth --n 30 --seed " + seed + " --out " + path("b")).status, 0);
  EXPECT_EQ(slurp(path("a/graph.json")), slurp(path("b/graph.json")));
}

TEST_F(Cli, SynthWritesLoadableG2o) {
  ASSERT_EQ(run(kBin, "synth --n 40 --seed 2 --g2o --out " + path("a")).status, 0);
  const LoadedGraph j = load_graph(path("a/graph.json"), GraphFormat::extended_json);
  const LoadedGraph g = load_graph(path("a/graph.g2o"), GraphFormat::g2o_se2);
  ASSERT_EQ(g.graph.num_edges(), j.graph.num_edges());
  for (int k = 0; k < j.graph.num_edges(); ++k)
    EXPECT_TRUE(same_pose(g.graph.edges[static_cast<std::size_t>(k)].z, j.graph.edges[static_cast<std::size_t>(k)].z, 1e-12));
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run(kBin, "synth --n 1 --out " + path("a")).status, 2);
  EXPECT_EQ(run(kBin, "").status, 2);
  EXPECT_EQ(run(kBin, "solve").status, 2);
  EXPECT_EQ(run(kBin, "frobnicate").status, 2);
  EXPECT_EQ(run(kBin, "solve --graph " + path("missing.json")).status, 2);
}

TEST_F(Cli, MalformedInputExitsOne) {
  std::ofstream(path("bad.g2o")) << "VERTEX_SE2 0 0 0 0\nVERTEX_SE2 1 nope 0 0\n";
  const CliRun r = run(kBin, "solve --graph " + path("bad.g2o") + " --out " + path("o"));
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find("line 2"), std::string::npos);
}

TEST_F(Cli, NoiselessGroundTruthNeedsNoIterations) {
  const PoseGraph g = pudq::testing::noiseless_graph(25, 4);
  save_graph(g, path("g.json"), GraphFormat::extended_json, &g.vertices);
  for (const std::string init : {"ground_truth", "graph"}) {
    const std::string out = path("o_" + init);
    ASSERT_EQ(run(kBin, "solve --quiet --graph " + path("g.json") + " --init " + init + " --out " + out).status, 0);
    const nlohmann::json m = read_json(out + "/manifest.json");
    EXPECT_EQ(m["metrics"]["iterations"], 0);
    EXPECT_EQ(m["metrics"]["status"], "converged");
    EXPECT_EQ(m["config"]["init"], init);
  }
}

TEST_F(Cli, InitDispatchAndMonotoneTrace) {
  ASSERT_EQ(run(kBin, "synth --n 150 --seed 5 --out " + path("s")).status, 0);
  const LoadedGraph g = load_graph(path("s/graph.json"), GraphFormat::extended_json);
  const std::vector<std::pair<std::string, double>> inits = {
      {"odometry", cost(g.graph, init_odometry(g.graph))},
      {"chordal", cost(g.graph, init_chordal(g.graph))},
  };
  for (const auto& [init, initial] : inits) {
    const std::string out = path("o_" + init);
    ASSERT_EQ(run(kBin, "solve --quiet --graph " + path("s/graph.json") + " --init " + init + " --out " + out).status, 0);
    const nlohmann::json m = read_json(out + "/manifest.json");
    EXPECT_NEAR(m["metrics"]["initial_cost"].get<double>(), initial, 1e-9 * initial);
    const auto rows = read_csv(out + "/trace.csv");
    ASSERT_GE(rows.size(), 2u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"k", "cost", "grad_norm", "delta", "rho", "accepted"}));
    double prev = std::stod(rows[1][1]);
    for (std::size_t r = 2; r < rows.size(); ++r) {
      const double c = std::stod(rows[r][1]);
      EXPECT_LE(c, prev);
      prev = c;
    }
    EXPECT_NEAR(cost(g.graph, read_estimate(out + "/estimate.json")), m["metrics"]["final_cost"].get<double>(), 1e-9 * initial);
  }
  ASSERT_EQ(run(kBin, "solve --quiet --graph " + path("s/graph.json") + " --init file --init-file " + path("o_chordal/estimate.json") +
                          " --out " + path("o_file")).status,
            0);
  EXPECT_LE(read_json(path("o_file/manifest.json"))["metrics"]["iterations"].get<int>(), 1);
}

TEST_F(Cli, IterationCapExitsThree) {
  ASSERT_EQ(run(kBin, "synth --n 100 --seed 6 --out " + path("s")).status, 0);
  const CliRun r = run(kBin, "solve --quiet --graph " + path("s/graph.json") + " --init odometry --max-iters 1 --out " + path("o"));
  EXPECT_EQ(r.status, 3);
  EXPECT_EQ(read_json(path("o/manifest.json"))["metrics"]["status"], "max_iterations");
}

TEST_F(Cli, EvalOfIdenticalInputs) {
  ASSERT_EQ(run(kBin, "synth --n 80 --seed 7 --out " + path("s")).status, 0);
  const LoadedGraph g = load_graph(path("s/graph.json"), GraphFormat::extended_json);
  PoseGraph truth = g.graph;
  truth.vertices = *g.ground_truth;
  save_graph(truth, path("truth.json"), GraphFormat::extended_json);
  ASSERT_EQ(run(kBin, "eval --graph " + path("s/graph.json") + " --estimate " + path("truth.json") + " --baseline " + path("truth.json") +
                          " --out " + path("e")).status,
            0);
  const auto summary = read_csv(path("e/rpe_summary.csv"));
  ASSERT_EQ(summary.size(), 4u);
  EXPECT_EQ(summary[0], (std::vector<std::string>{"label", "rpe_l", "rpe_e"}));
  for (std::size_t r = 1; r < 4; ++r) {
    EXPECT_EQ(std::stod(summary[r][1]), 0.0);
    EXPECT_EQ(std::stod(summary[r][2]), 0.0);
  }
  const auto edges = read_csv(path("e/rpe_edges.csv"));
  EXPECT_EQ(edges.size(), static_cast<std::size_t>(g.graph.num_edges()) + 1);
}

TEST_F(Cli, EvalMatchesLibrary) {
  ASSERT_EQ(run(kBin, "synth --n 80 --seed 8 --out " + path("s")).status, 0);
  ASSERT_EQ(run(kBin, "solve --quiet --graph " + path("s/graph.json") + " --out " + path("o")).status, 0);
  ASSERT_EQ(run(kBin, "eval --graph " + path("s/graph.json") + " --estimate " + path("o/estimate.json") + " --out " + path("e")).status, 0);
  const LoadedGraph g = load_graph(path("s/graph.json"), GraphFormat::extended_json);
  const RpeReport want = rpe_report(read_estimate(path("o/estimate.json")), stack(*g.ground_truth), g.graph.edges);
  const auto summary = read_csv(path("e/rpe_summary.csv"));
  EXPECT_EQ(std::stod(summary[1][1]), want.rpe_l);
  EXPECT_EQ(std::stod(summary[1][2]), want.rpe_e);
}

TEST_F(Cli, CheckPassesByDefault) {
  const CliRun r = run(kBin, "check");
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.output.find("FAIL"), std::string::npos);
}

TEST_F(Cli, CheckBoundsTable) {
  const CliRun r = run(kBin, "check --bounds");
  EXPECT_EQ(r.status, 0);
  for (const char* name : {"L_g", "beta", "bound_L_g", "bound_beta"}) EXPECT_NE(r.output.find(name), std::string::npos) << name;
}

TEST_F(Cli, InjectedFaultIsNamed) {
  for (const std::string entry : {"A11", "B23"}) {
    const CliRun r = run(kFaultBin, "check --inject-fault " + entry);
    EXPECT_EQ(r.status, 4) << entry;
    EXPECT_NE(r.output.find("entry " + entry), std::string::npos) << r.output;
  }
  EXPECT_EQ(run(kFaultBin, "check").status, 0);
  EXPECT_NE(run(kBin, "check --inject-fault A11").status, 0);
}
