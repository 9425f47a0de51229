#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <json.hpp>

#include "support.hpp"

using namespace modtune;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("modtune_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(const std::string& args) const {
    const std::string cmd = std::string(MODTUNE_CLI) + " " + args + " >" + path("stdout.txt") + " 2>" +
                            path("stderr.txt");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string slurp(const std::string& name) const {
    std::ifstream in(path(name), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  nlohmann::json json_file(const std::string& name) const { return nlohmann::json::parse(slurp(name)); }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name), std::ios::binary) << text;
  }

  fs::path dir_;
};

// Q recomputed from the emitted CSV and the input edge list.
double recompute(const std::string& edges_path, const std::string& csv_path) {
  Graph g = read_edge_list_file(edges_path);
  std::ifstream in(csv_path);
  return modularity(g, read_partition_csv(in, g));
}

}  // namespace

TEST_F(Cli, DetectPathBothModes) {
  const std::string in = data_path("path9.txt");
  ASSERT_EQ(run("detect --input " + in + " --no-final-tune --out " + path("p.csv") + " --summary " + path("s.json")), 0);
  auto s = json_file("s.json");
  EXPECT_EQ(s["modularity"].get<double>(), 0.3984375);
  EXPECT_NEAR(recompute(in, path("p.csv")), s["modularity"].get<double>(), 1e-9);

  ASSERT_EQ(run("detect --input " + in + " --final-tune --out " + path("p.csv") + " --summary " + path("s.json")), 0);
  s = json_file("s.json");
  EXPECT_EQ(s["modularity"].get<double>(), 0.4140625);
  EXPECT_EQ(s["community_count"].get<int>(), 3);
  EXPECT_EQ(s["community_sizes"].size(), 3u);
  EXPECT_EQ(s["config"]["final_tuning"].get<bool>(), true);
  EXPECT_NEAR(recompute(in, path("p.csv")), 0.4140625, 1e-9);
}

TEST_F(Cli, DetectKarateRestarts) {
  const std::string in = data_path("karate.txt");
  ASSERT_EQ(run("detect --input " + in + " --restarts 100 --final-tune --threads 2 --out " + path("p.csv") +
                " --summary " + path("s.json")),
            0);
  auto s = json_file("s.json");
  const double q = s["modularity"].get<double>();
  EXPECT_NEAR(q, 0.420, 0.0005);
  EXPECT_NEAR(recompute(in, path("p.csv")), q, 1e-9);
}

TEST_F(Cli, DetectPartitionDeterministic) {
  const std::string in = data_path("karate.txt");
  const std::string flags = " --restarts 5 --seed 12 --summary " + path("s.json");
  ASSERT_EQ(run("detect --input " + in + flags + " --threads 1 --out " + path("a.csv")), 0);
  ASSERT_EQ(run("detect --input " + in + flags + " --threads 3 --out " + path("b.csv")), 0);
  EXPECT_EQ(slurp("a.csv"), slurp("b.csv"));
}

TEST_F(Cli, DetectDuplicateWarning) {
  write("dup.txt", "1 2\n2 1\n2 3\n3 1\n");
  ASSERT_EQ(run("detect --input " + path("dup.txt") + " --out " + path("p.csv") + " --summary " + path("s.json")), 0);
  auto s = json_file("s.json");
  EXPECT_EQ(s["duplicate_edges"].get<int>(), 1);
  EXPECT_EQ(s["warnings"].size(), 1u);
}

TEST_F(Cli, DetectParseErrorNamesLine) {
  write("bad.txt", "1 2\n2 3\n4\n");
  EXPECT_EQ(run("detect --input " + path("bad.txt") + " --out " + path("p.csv") + " --summary " + path("s.json")), 2);
  EXPECT_NE(slurp("stderr.txt").find("line 3"), std::string::npos);
  write("loop.txt", "1 2\n2 2\n");
  EXPECT_EQ(run("detect --input " + path("loop.txt") + " --out " + path("p.csv") + " --summary " + path("s.json")), 2);
  EXPECT_EQ(run("detect --input " + path("missing.txt")), 2);
}

TEST_F(Cli, InvalidFlags) {
  const std::string in = data_path("path9.txt");
  EXPECT_EQ(run("detect --input " + in + " --q 1 --out " + path("p.csv") + " --summary " + path("s.json")), 3);
  EXPECT_EQ(run("detect --input " + in + " --q two"), 3);
  EXPECT_EQ(run("detect --bogus"), 3);
  EXPECT_EQ(run("detect"), 3);
  EXPECT_EQ(run(""), 3);
  EXPECT_EQ(run("ensemble --count 0 --nodes 10 --avg-degree 2"), 3);
}

TEST_F(Cli, EnsembleTinyNetwork) {
  ASSERT_EQ(run("ensemble --count 1 --nodes 2 --avg-degree 1 --hist-out " + path("h.csv") + " --qdist-out " +
                path("q.csv") + " --summary " + path("e.json")),
            0);
  EXPECT_EQ(slurp("h.csv"), "size,count\n2,1\n");
  EXPECT_EQ(slurp("q.csv"), "network_index,modularity\n0,0\n");
  auto s = json_file("e.json");
  EXPECT_EQ(s["sample_count"].get<int>(), 1);
  EXPECT_FALSE(s["stddev_defined"].get<bool>());
}

TEST_F(Cli, EnsembleByteIdentical) {
  auto flags = [&](const std::string& tag, int threads) {
    return "ensemble --count 6 --nodes 100 --avg-degree 4 --seed 3 --threads " + std::to_string(threads) +
           " --hist-out " + path("h" + tag) + " --qdist-out " + path("q" + tag) + " --summary " + path("s" + tag);
  };
  ASSERT_EQ(run(flags("1", 1)), 0);
  ASSERT_EQ(run(flags("2", 1)), 0);
  ASSERT_EQ(run(flags("3", 3)), 0);
  for (const char* f : {"h", "q"}) {
    EXPECT_EQ(slurp(std::string(f) + "1"), slurp(std::string(f) + "2"));
    EXPECT_EQ(slurp(std::string(f) + "1"), slurp(std::string(f) + "3"));
  }
  // Summaries differ only in the output paths they echo.
  auto a = json_file("s1"), c = json_file("s3");
  for (auto* j : {&a, &c}) {
    j->erase("histogram_csv");
    j->erase("qdist_csv");
  }
  EXPECT_EQ(a, c);
}

TEST_F(Cli, EnsembleMeanInRange) {
  ASSERT_EQ(run("ensemble --count 100 --nodes 400 --avg-degree 4 --no-final-tune --hist-out " + path("h.csv") +
                " --qdist-out " + path("q.csv") + " --summary " + path("e.json")),
            0);
  const double mean = json_file("e.json")["mean_q"].get<double>();
  EXPECT_GE(mean, 0.50);
  EXPECT_LE(mean, 0.53);
}

TEST_F(Cli, EnsembleGenerationFailure) {
  EXPECT_EQ(run("ensemble --count 1 --nodes 300 --avg-degree 0.5 --hist-out " + path("h.csv") + " --qdist-out " +
                path("q.csv") + " --summary " + path("e.json")),
            4);
}

TEST_F(Cli, CompareReportsImprovement) {
  ASSERT_EQ(run("compare --count 10 --nodes 200 --avg-degree 4 --summary " + path("c.json")), 0);
  auto s = json_file("c.json");
  EXPECT_GE(s["mean_paired_improvement"].get<double>(), 0.0);
  EXPECT_EQ(s["no_final_tuning"]["sample_count"].get<int>(), 10);
}

TEST_F(Cli, OracleRuns) {
  ASSERT_EQ(run("oracle --input " + data_path("path9.txt") + " --out " + path("o.csv") + " --summary " + path("o.json")), 0);
  EXPECT_EQ(json_file("o.json")["best_q"].get<double>(), 0.4140625);
  EXPECT_NEAR(recompute(data_path("path9.txt"), path("o.csv")), 0.4140625, 1e-12);
  EXPECT_EQ(run("oracle --input " + data_path("karate.txt") + " --out " + path("o.csv")), 5);
  EXPECT_NE(slurp("stderr.txt").find("Bell"), std::string::npos);
}
