#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gpclt/cli.hpp"
#include "gpclt/errors.hpp"

using namespace gpclt;
using namespace gpclt::cli;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "gpclt_test_cli";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("coeffs") {
  const auto r = run({"coeffs", "--f", "abspow:1", "--max", "16"});
  REQUIRE(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["coeffs"][0].get<double>() == doctest::Approx(0.7978845608).epsilon(1e-10));
  CHECK(j["coeffs"].size() == 17);
  CHECK(j["k0"].get<int>() == 1);
}

TEST_CASE("kernel row") {
  const auto r = run({"kernel", "--sigma", "pow:1", "--a", "0", "--b", "1", "--k", "2", "--h", "0.1"});
  REQUIRE(r.code == kExitOk);
  std::istringstream in(r.out);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "k,h,J,S,J_err,S_err");
  int k = 0;
  double h = 0, J = 0;
  REQUIRE(std::sscanf(row.c_str(), "%d,%lf,%lf", &k, &h, &J) == 3);
  CHECK(k == 2);
  CHECK(h == 0.1);
  CHECK(J == doctest::Approx(0.065).epsilon(1e-10));
}

TEST_CASE("clt negative control under both expectations") {
  const std::vector<std::string> base{"clt", "--f", "poly:0,1", "--sigma", "pow:2", "--a", "0", "--b", "1",
                                      "--h", "0.015625", "--paths", "1000", "--seed", "7"};
  auto normal = base;
  normal.insert(normal.end(), {"--expect", "normal"});
  const auto r5 = run(normal);
  CHECK(r5.code == kExitVerification);
  const auto j = nlohmann::json::parse(r5.out);
  CHECK(j["ks"]["p_value"].get<double>() < 1e-6);
  CHECK(j["verdict"] == "fail");
  CHECK(r5.err.rfind("error: verification: ", 0) == 0);

  auto nonnormal = base;
  nonnormal.insert(nonnormal.end(), {"--expect", "nonnormal"});
  const auto r0 = run(nonnormal);
  CHECK(r0.code == kExitOk);
  CHECK(nlohmann::json::parse(r0.out)["verdict"] == "pass");

  auto explore = base;
  explore.push_back("--explore");
  const auto re = run(explore);
  CHECK(re.code == kExitOk);
  CHECK_FALSE(nlohmann::json::parse(re.out).contains("verdict"));
}

TEST_CASE("config round-trip") {
  ExperimentConfig c;
  c.sigma = "explog:0.5";
  c.f = "abspow:1.5";
  c.a = 0.25;
  c.b = 0.75;
  c.h = 1.0 / 3.0;
  c.h_grid = {0.5, 0.125, 1e-7};
  c.k = {1, 2, 5};
  c.n_paths = 123;
  c.n_per_h = 4;
  c.seed = 18446744073709551615ULL;
  c.tol = 1e-11;
  c.max = 20;
  c.j_max = 6;
  c.k0 = 2;
  c.with_sup = false;
  c.expect = "normal";
  c.explore = true;
  c.out = "o.json";
  c.z_out = "z.csv";
  c.hist_out = "h.csv";
  CHECK(config_from_json(to_json(c)) == c);
  CHECK(config_from_json(to_json(ExperimentConfig{})) == ExperimentConfig{});
  CHECK_THROWS_AS(config_from_json("{\"sigmaa\": \"pow:1\"}"), ParseError);
  CHECK_THROWS_AS(config_from_json("[1, 2"), ParseError);
  CHECK(config_from_json("{\"h_grid\": \"dyadic:2:4\"}").h_grid == std::vector<double>{0.25, 0.125, 0.0625});
}

TEST_CASE("h grid parsing") {
  CHECK(parse_h_grid("dyadic:6:8") == std::vector<double>{1.0 / 64, 1.0 / 128, 1.0 / 256});
  CHECK(parse_h_grid("0.5,0.25") == std::vector<double>{0.5, 0.25});
  CHECK_THROWS_AS(parse_h_grid("dyadic:8:6"), ParseError);
  CHECK_THROWS_AS(parse_h_grid("0.5,x"), ParseError);
}

TEST_CASE("config file and flags give identical output") {
  const auto cfg = scratch("study.json");
  {
    std::ofstream f(cfg);
    f << R"({"f": "poly:0,1", "sigma": "pow:1.5", "a": 0, "b": 1, "h_grid": "dyadic:6:9"})";
  }
  const auto a = run({"study", "--config", cfg.string()});
  const auto b = run({"study", "--f", "poly:0,1", "--sigma", "pow:1.5", "--a", "0", "--b", "1",
                      "--h-grid", "dyadic:6:9"});
  REQUIRE(a.code == kExitOk);
  CHECK(a.out == b.out);
  // Flags override file values.
  const auto c = run({"study", "--config", cfg.string(), "--sigma", "pow:1"});
  const auto d = run({"study", "--f", "poly:0,1", "--sigma", "pow:1", "--h-grid", "dyadic:6:9"});
  CHECK(c.out == d.out);
  CHECK(c.out != a.out);
}

TEST_CASE("seeded outputs are byte-identical across runs and thread counts") {
  const std::vector<std::string> clt{"clt", "--f", "abspow:1", "--sigma", "pow:0.8", "--h", "0.03125",
                                     "--paths", "300", "--seed", "5"};
  std::vector<std::string> outputs;
  for (const char* threads : {"1", "1", "2", "5"}) {
    auto args = clt;
    const auto z = scratch(std::string("z") + threads + ".csv");
    const auto hist = scratch(std::string("hist") + threads + ".csv");
    args.insert(args.end(), {"--threads", threads, "--z-out", z.string(), "--hist-out", hist.string()});
    const auto r = run(args);
    REQUIRE(r.code == kExitOk);
    outputs.push_back(r.out + slurp(z) + slurp(hist));
  }
  for (const auto& o : outputs) CHECK(o == outputs.front());
  CHECK(outputs.front().find("path_id,z\n") != std::string::npos);
  CHECK(outputs.front().find("bin_left,bin_right,count,normal_density\n") != std::string::npos);

  const std::vector<std::string> sim{"simulate", "--sigma", "pow:1.2", "--h", "0.0625", "--n-per-h", "2",
                                     "--paths", "3", "--seed", "9"};
  auto s1 = sim, s4 = sim;
  s1.insert(s1.end(), {"--threads", "1"});
  s4.insert(s4.end(), {"--threads", "4"});
  const auto r1 = run(s1);
  CHECK(r1.code == kExitOk);
  CHECK(r1.out.rfind("path_id,step,increment\n", 0) == 0);
  CHECK(r1.out == run(s4).out);
}

TEST_CASE("other subcommands produce their documents") {
  const auto v = run({"variance", "--f", "poly:0,1", "--sigma", "pow:1", "--h", "0.1"});
  REQUIRE(v.code == kExitOk);
  CHECK(nlohmann::json::parse(v.out)["exact"].get<double>() == doctest::Approx(0.13).epsilon(1e-9));

  const auto as = run({"asymptotics", "--f", "poly:0,1", "--sigma", "pow:1.5", "--k", "2"});
  REQUIRE(as.code == kExitOk);
  CHECK(as.out.find("CriticalLog") != std::string::npos);

  const auto c = run({"conditions", "--sigma", "pow:2", "--h-grid", "dyadic:6:10", "--k0", "1"});
  REQUIRE(c.code == kExitOk);
  const auto j = nlohmann::json::parse(c.out);
  for (const char* key : {"bounded_ratio", "smallo_trend", "st_sup_trend", "st_ratio_trend",
                          "ccl_ratio_trend", "verdicts"}) {
    CHECK(j.contains(key));
  }

  const auto out = scratch("coeffs.json");
  const auto w = run({"coeffs", "--f", "herm:2", "--max", "3", "--out", out.string()});
  CHECK(w.code == kExitOk);
  CHECK(w.out.empty());
  CHECK(nlohmann::json::parse(slurp(out))["k0"] == 1);
}

TEST_CASE("error reporting and exit codes") {
  const auto none = run({});
  CHECK(none.code == kExitUsage);
  CHECK(none.err.rfind("error: usage: ", 0) == 0);

  const auto unknown = run({"kernel", "--bogus", "1"});
  CHECK(unknown.code == kExitUsage);
  CHECK(unknown.err.rfind("error: usage: ", 0) == 0);
  CHECK(std::count(unknown.err.begin(), unknown.err.end(), '\n') == 1);

  const auto bad_spec = run({"kernel", "--sigma", "pow:3", "--k", "1", "--h", "0.1"});
  CHECK(bad_spec.code == kExitUsage);
  CHECK(bad_spec.err.rfind("error: parse: ", 0) == 0);

  const auto window = run({"kernel", "--sigma", "explog:0.5", "--a", "0", "--b", "1", "--k", "1", "--h", "0.01"});
  CHECK(window.code == kExitDomain);
  CHECK(window.err.rfind("error: domain: ", 0) == 0);

  const auto constant = run({"coeffs", "--f", "one"});
  CHECK(constant.code == kExitDomain);

  const auto few = run({"clt", "--f", "poly:0,1", "--sigma", "pow:1", "--h", "0.0625", "--paths", "50"});
  CHECK(few.code == kExitDomain);

  const auto unsupported = run({"asymptotics", "--f", "herm:4", "--sigma", "pow:2"});
  CHECK(unsupported.code == kExitDomain);
  CHECK(unsupported.err.rfind("error: ", 0) == 0);
}
