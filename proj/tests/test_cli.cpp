#include <doctest.h>

#include <filesystem>
#include <sstream>

#include <unistd.h>

#include "sybilreg/cli.hpp"
#include "sybilreg/io.hpp"

using namespace sybilreg;
namespace fs = std::filesystem;
using io::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("sybilreg_cli_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& contents = "") const {
    const auto p = (path / name).string();
    if (!contents.empty()) io::write_file(p, contents);
    return p;
  }
  static inline int counter = 0;
};

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

const char* kLine = "id,y,x\nr0,1,0\nr1,3,1\nr2,5,2\n";
const char* kSamplePath = "referrer,referee\nW1,W2\nW2,W3\nW3,W4\nW3,W5\nW5,W6\nW5,W7\nW6,W8\n";
const char* kWallets = "id,y,x\nW1,1,0.5\nW2,2,1.5\nW3,2,0.1\nW4,4,2\nW5,1,1\nW6,0,3\nW7,3,2\nW8,2,2\nW9,1,1\n";

}  // namespace

TEST_CASE("weights: block json for a single pair") {
  TempDir t;
  const auto spec = t.file("s.json", R"({"n": 3, "networks": [{"members": [0, 1], "pi": 0.5}]})");
  const auto r = cli({"weights", "--spec", spec, "--format", "block-json"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["networks"][0]["d"].get<double>() == doctest::Approx(1.3333333333).epsilon(1e-10));
  CHECK(j["networks"][0]["o"].get<double>() == doctest::Approx(-0.6666666667).epsilon(1e-10));
  CHECK(j["networks"][0]["network_id"] == 0);
  CHECK(j["manifest"]["subcommand"] == "weights");
  CHECK(j["manifest"]["timestamp"].is_null());
}

TEST_CASE("weights: dense csv identity and size refusal") {
  TempDir t;
  const auto spec = t.file("s.json", R"({"n": 3, "networks": []})");
  const auto out = t.file("w.csv");
  REQUIRE(cli({"weights", "--spec", spec, "--format", "dense-csv", "--out", out}).code == 0);
  const auto rows = io::parse_csv(io::read_file(out));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"1", "0", "0"});
  CHECK(rows[2] == std::vector<std::string>{"0", "0", "1"});
  CHECK(io::read_file(out).rfind("# manifest: ", 0) == 0);

  const auto huge = t.file("h.json", R"({"n": 10000, "networks": []})");
  CHECK(cli({"weights", "--spec", huge, "--format", "dense-csv"}).code == 3);
  CHECK(cli({"weights", "--spec", huge, "--format", "block-json"}).code == 0);
}

TEST_CASE("weights: block json and dense csv agree") {
  TempDir t;
  const auto spec = t.file("s.json",
                           R"({"n": 9, "networks": [{"members": [0, 3, 5], "pi": 0.37},
                                                    {"members": [1, 2, 7, 8], "pi": 0.91}]})");
  const json blocks = json::parse(cli({"weights", "--spec", spec}).out);
  for (const char* method : {"closed-form", "general"}) {
    const auto rows = io::parse_csv(cli({"weights", "--spec", spec, "--format", "dense-csv", "--method", method}).out);
    REQUIRE(rows.size() == 9);
    for (std::size_t i = 0; i < 9; ++i) {
      for (std::size_t j = 0; j < 9; ++j) {
        double expect = i == j ? 1.0 : 0.0;
        for (const auto& b : blocks["networks"]) {
          const auto m = b["members"].get<std::vector<std::size_t>>();
          const bool in_i = std::find(m.begin(), m.end(), i) != m.end();
          const bool in_j = std::find(m.begin(), m.end(), j) != m.end();
          if (in_i && in_j) expect = i == j ? b["d"].get<double>() : b["o"].get<double>();
        }
        CHECK(std::abs(std::stod(rows[i][j]) - expect) < 1e-10);
      }
    }
  }
}

TEST_CASE("weights: validation and estimation failures map to exit codes") {
  TempDir t;
  const auto overlap = t.file("o.json", R"({"n": 3, "networks": [{"members": [0, 1], "pi": 0.5},
                                                                 {"members": [1, 2], "pi": 0.5}]})");
  const auto r = cli({"weights", "--spec", overlap});
  CHECK(r.code == 2);
  CHECK(r.err.find("OverlappingNetworks") != std::string::npos);
  CHECK(cli({"weights", "--spec", t.file("bad.json", "{not json")}).code == 2);
  CHECK(cli({"weights", "--spec", t.file("missing.json")}).code == 2);
  const auto sure = t.file("g.json", R"({"n": 3, "networks": [{"members": [0, 1], "pi": 1.0}]})");
  CHECK(cli({"weights", "--spec", sure}).code == 4);
  CHECK(cli({"weights"}).code == 2);
  CHECK(cli({}).code == 2);
}

TEST_CASE("fit: perfect line under weighted and inclusion") {
  TempDir t;
  const auto data = t.file("d.csv", kLine);
  const auto w = cli({"fit", "--data", data, "--estimator", "weighted"});
  REQUIRE(w.code == 0);
  const json jw = json::parse(w.out);
  CHECK(jw["beta"][0].get<double>() == doctest::Approx(1.0));
  CHECK(jw["beta"][1].get<double>() == doctest::Approx(2.0));
  CHECK(jw["sigma2_hat"].get<double>() < 1e-20);
  CHECK(jw["columns"] == json::array({"(intercept)", "x"}));
  CHECK(jw["manifest"]["config"]["estimator"] == "weighted");

  const auto empty = t.file("s.json", R"({"n": 3, "networks": []})");
  const json ji = json::parse(cli({"fit", "--data", data, "--spec", empty, "--estimator", "inclusion"}).out);
  CHECK(ji["beta"] == jw["beta"]);
}

TEST_CASE("fit: string members resolve through dataset ids") {
  TempDir t;
  const auto data = t.file("d.csv", "id,y,x\na,1,0\nb,2,1\nc,2,2\nd,4,3\ne,5,5\n");
  const auto spec = t.file("s.json", R"({"n": 5, "networks": [{"members": ["b", "a"], "pi": 0.4}]})");
  const auto idx = t.file("i.json", R"({"n": 5, "networks": [{"members": [0, 1], "pi": 0.4}]})");
  const auto a = cli({"fit", "--data", data, "--spec", spec});
  const auto b = cli({"fit", "--data", data, "--spec", idx});
  REQUIRE(a.code == 0);
  CHECK(json::parse(a.out)["beta"] == json::parse(b.out)["beta"]);

  const auto unknown = t.file("u.json", R"({"n": 5, "networks": [{"members": ["a", "zz"], "pi": 0.4}]})");
  const auto bad = cli({"fit", "--data", data, "--spec", unknown});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("'zz'") != std::string::npos);

  const auto mixed = t.file("m.json", R"({"n": 5, "networks": [{"members": ["a", 1], "pi": 0.4}]})");
  CHECK(cli({"fit", "--data", data, "--spec", mixed}).code == 2);
  const auto wrong_n = t.file("n.json", R"({"n": 4, "networks": []})");
  CHECK(cli({"fit", "--data", data, "--spec", wrong_n}).code == 2);
}

TEST_CASE("fit: estimation failure exits with 4") {
  TempDir t;
  const auto data = t.file("d.csv", kLine);
  const auto spec = t.file("s.json", R"({"n": 3, "networks": [{"members": [0, 1], "pi": 0.5}]})");
  CHECK(cli({"fit", "--data", data, "--spec", spec, "--estimator", "exclusion"}).code == 4);
  CHECK(cli({"fit", "--data", data, "--estimator", "nonsense"}).code == 2);
}

TEST_CASE("fit: sampled estimators are reproducible and no-intercept works") {
  TempDir t;
  std::string csv = "y,x\n";
  for (int i = 0; i < 30; ++i) csv += std::to_string(i % 7 + 0.5 * i) + "," + std::to_string(i) + "\n";
  const auto data = t.file("d.csv", csv);
  const auto spec = t.file("s.json", R"({"n": 30, "networks": [{"members": [0,1,2,3,4,5], "pi": 0.6}]})");
  const std::vector<std::string> args{"fit", "--data", data, "--spec", spec, "--estimator",
                                      "network-sampled", "--seed", "7", "--resamples", "30"};
  const auto a = cli(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == cli(args).out);
  CHECK(json::parse(a.out)["metadata"]["heuristic_covariance"] == true);
  const json no_int = json::parse(cli({"fit", "--data", data, "--no-intercept"}).out);
  CHECK(no_int["beta"].size() == 1);
}

TEST_CASE("simulate: csv table, null mc_se and determinism") {
  TempDir t;
  const auto cfg = t.file("c.json", R"({"n_obs": 150, "n_reps": 15, "resamples": 10,
                                        "networks": [{"size": 20, "pi": 0.7}, {"size": 30, "pi": 0.2}]})");
  const auto out1 = t.file("r1.json"), csv1 = t.file("r1.csv");
  const auto out2 = t.file("r2.json"), csv2 = t.file("r2.csv");
  REQUIRE(cli({"simulate", "--config", cfg, "--seed", "42", "--out", out1, "--csv", csv1}).code == 0);
  REQUIRE(cli({"simulate", "--config", cfg, "--seed", "42", "--out", out2, "--csv", csv2}).code == 0);
  CHECK(io::read_file(out1) == io::read_file(out2));
  CHECK(io::read_file(csv1) == io::read_file(csv2));
  const auto rows = io::parse_csv(io::read_file(csv1));
  REQUIRE(rows.size() == 7);
  CHECK(rows[0] == std::vector<std::string>{"estimator", "mse", "mc_se"});
  const json report = json::parse(io::read_file(out1));
  CHECK(report["seed"] == 42);
  CHECK(report["manifest"]["seed"] == 42);
  CHECK(report["estimators"].size() == 6);

  const auto single = cli({"simulate", "--config", cfg, "--reps", "1", "--csv", csv1});
  REQUIRE(single.code == 0);
  CHECK(io::read_file(csv1).find(",null") != std::string::npos);

  CHECK(cli({"simulate", "--config", t.file("bad.json", R"({"n_reps": 0})")}).code == 2);
  CHECK(cli({"simulate", "--config", t.file("typo.json", R"({"n_rep": 5})")}).code == 2);
}

TEST_CASE("simulate: default layout yields six rows") {
  TempDir t;
  const auto csv = t.file("t.csv");
  REQUIRE(cli({"simulate", "--seed", "42", "--reps", "5", "--resamples", "5", "--out", t.file("r.json"),
               "--csv", csv}).code == 0);
  CHECK(io::parse_csv(io::read_file(csv)).size() == 7);
}

TEST_CASE("derive-networks on the sample referral path") {
  TempDir t;
  const auto refs = t.file("ref.csv", kSamplePath);
  const auto data = t.file("d.csv", kWallets);
  const json none = json::parse(cli({"derive-networks", "--referrals", refs, "--data", data}).out);
  CHECK(none["networks"].empty());
  CHECK(none["diagnostics"]["trees_found"] == 1);

  const auto out = t.file("tree.json");
  REQUIRE(cli({"derive-networks", "--referrals", refs, "--data", data, "--min-tree-size", "5",
               "--pi", "0.5", "--out", out}).code == 0);
  const json one = json::parse(io::read_file(out));
  REQUIRE(one["networks"].size() == 1);
  CHECK(one["networks"][0]["members"].size() == 8);
  CHECK(one["networks"][0]["pi"] == 0.5);
  CHECK(one["n"] == 9);

  // The derived spec feeds straight back into fit.
  CHECK(cli({"fit", "--data", data, "--spec", out}).code == 0);

  const auto transfers = t.file("tx.csv", "from,to,count\nW1,W2,12\nW4,W9,40\nW5,W6,9\n");
  const auto tx_out = t.file("tx.json");
  REQUIRE(cli({"derive-networks", "--referrals", refs, "--data", data, "--transfers", transfers,
               "--out", out, "--transfers-out", tx_out}).code == 0);
  const json tx = json::parse(io::read_file(tx_out));
  REQUIRE(tx["networks"].size() == 1);
  CHECK(tx["networks"][0]["members"] == json::array({"W1", "W2"}));
  CHECK(tx["heuristic"] == "repeated-transfers");

  const auto cyclic = t.file("cyc.csv", "referrer,referee\nA,B\nB,A\n");
  CHECK(cli({"derive-networks", "--referrals", cyclic, "--data", data}).code == 2);
}

TEST_CASE("timestamp flag is recorded in the manifest") {
  TempDir t;
  const auto data = t.file("d.csv", kLine);
  const json j = json::parse(cli({"--timestamp", "2024-01-01T00:00:00Z", "fit", "--data", data}).out);
  CHECK(j["manifest"]["timestamp"] == "2024-01-01T00:00:00Z");
  CHECK(j["manifest"]["version"] == io::kToolVersion);
}
