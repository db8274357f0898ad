#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "boxcouple/serialize.hpp"

using boxcouple::io::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

/// Runs the CLI inside a scratch directory and captures stdout.
class Cli {
 public:
  Cli() : dir_(fs::temp_directory_path() / ("boxcouple_cli_test_" + std::to_string(::getpid()))) {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Cli() { fs::remove_all(dir_); }

  Result run(const std::string& args) const {
    auto out = dir_ / "stdout.txt";
    auto cmd = "cd '" + dir_.string() + "' && '" + std::string(BOXCOUPLE_CLI) + "' " + args + " > '" + out.string() +
               "' 2> /dev/null";
    int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read(out);
    return r;
  }

  json run_json(const std::string& args) const {
    auto r = run(args);
    REQUIRE_MESSAGE(r.code == 0, args);
    return json::parse(r.out);
  }

  std::string read(const fs::path& p) const {
    std::ifstream in(p.is_absolute() ? p : dir_ / p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  void write(const std::string& name, const json& j) const { boxcouple::io::write_file(dir_ / name, j); }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
};

std::string config(const std::string& name) { return std::string(BOXCOUPLE_SOURCE_DIR) + "/configs/" + name + ".json"; }

}  // namespace

TEST_CASE("version and usage errors") {
  Cli cli;
  auto v = cli.run("--version");
  CHECK(v.code == 0);
  CHECK(v.out.rfind("boxcouple 0.1.0 (", 0) == 0);
  CHECK(cli.run("").code == 2);
  CHECK(cli.run("chain build --depth 3").code == 2);
  CHECK(cli.run("--format xml chain build --family cyclic:2 --depth 2").code == 2);
}

TEST_CASE("chain build writes the quotient orders") {
  Cli cli;
  CHECK(cli.run("chain build --family cyclic:2 --depth 3 -o chain.json").code == 0);
  auto chain = json::parse(cli.read("chain.json"));
  std::vector<int> orders;
  for (const auto& q : chain["quotients"]) orders.push_back(q["order"]);
  CHECK(orders == std::vector<int>{2, 4, 8});
  auto dot = cli.run("--format dot chain build --family cyclic:2 --depth 2");
  CHECK(dot.code == 0);
  CHECK(dot.out.find("graph") != std::string::npos);
}

TEST_CASE("maps enumerate, net, act and verify") {
  Cli cli;
  REQUIRE(cli.run("chain build --family cyclic:2 --depth 3 -o g.json").code == 0);
  REQUIRE(cli.run("maps enumerate --domain g.json:2 --codomain g.json:2 --controls affine:1,0/affine:1,0/0 --basepointed "
                  "-o maps.json")
              .code == 0);
  auto maps = json::parse(cli.read("maps.json"));
  REQUIRE(maps["members"].size() == 2);
  CHECK(maps["members"][0] == json::array({0, 1, 2, 3}));
  CHECK(maps["members"][1] == json::array({0, 2, 1, 3}));

  auto net = cli.run_json("maps net --space maps.json --radius 1");
  CHECK(net["certificate"]["net_size"] == 2);
  CHECK(net["certificate"]["net_property"] == true);

  auto act = cli.run_json("maps act --space maps.json --word t --member 1");
  CHECK(act["member"] == 1);

  auto ok = cli.run_json("maps verify --domain g.json:2 --codomain g.json:2 --controls affine:1,0/affine:1,0/0 --table 0,1,2,3");
  CHECK(ok["passed"] == true);
  auto bad = cli.run_json("maps verify --domain g.json:2 --codomain g.json:2 --controls affine:1,0/affine:1,0/0 --table 0,1,1,3");
  CHECK(bad["passed"] == false);
  CHECK(cli.run("maps verify --domain g.json:2 --codomain g.json:2 --controls affine:1,0/affine:1,0/0 --table 0,1").code == 2);
  CHECK(cli.run("maps verify --domain g.json:9 --codomain g.json:2 --controls affine:1,0/affine:1,0/0 --table 0").code == 2);
}

TEST_CASE("limit run prints the survival table") {
  Cli cli;
  REQUIRE(cli.run("chain build --family cyclic:2 --depth 5 -o g.json").code == 0);
  std::string files;
  for (int n = 1; n <= 5; ++n) {
    auto name = "m" + std::to_string(n) + ".json";
    REQUIRE(cli.run("maps enumerate --domain g.json:" + std::to_string(n) + " --codomain g.json:" + std::to_string(n) +
                    " --controls affine:1,0/affine:1,0/0 --basepointed -o " + name)
                .code == 0);
    files += " " + name;
  }
  auto j = cli.run_json("limit run --radius 3" + files);
  CHECK(j["verification"]["passed"] == true);
  CHECK(j["partial_map"]["entries"].size() == 7);
  auto csv = cli.run("--format csv limit run --radius 3" + files);
  CHECK(csv.out.rfind("radius,surviving_levels\n0,\"1,2,3,4,5\"", 0) == 0);
  CHECK(cli.run("limit run --radius 40" + files).code == 4);
}

TEST_CASE("gh bounds on identical files") {
  Cli cli;
  cli.write("a.json", {{"labels", {"x", "y", "z"}}, {"matrix", {{0, 1, 2}, {1, 0, 1}, {2, 1, 0}}}});
  cli.write("b.json", {{"labels", {"x", "y", "z"}}, {"matrix", {{0, 1, 2}, {1, 0, 1}, {2, 1, 0}}}});
  auto r = cli.run("gh bounds a.json b.json");
  CHECK(r.code == 0);
  CHECK(json::parse(r.out) == json::parse(R"({"lower":0,"upper":0,"exact":true})"));
  cli.write("p.json", {{"labels", {"o"}}, {"matrix", {{0}}}});
  auto half = cli.run_json("gh bounds p.json a.json");
  CHECK(half["upper"] == 1);
  auto ev = cli.run_json("gh evidence a.json p.json --target a.json");
  CHECK(ev["items"][0]["epsilon"] == 0);
  cli.write("broken.json", {{"labels", {"x", "y"}}, {"matrix", {{0, 1}, {2, 0}}}});
  CHECK(cli.run("gh bounds broken.json a.json").code == 2);
}

TEST_CASE("measure commands") {
  Cli cli;
  REQUIRE(cli.run("chain build --family cyclic:2 --depth 3 -o g.json").code == 0);
  REQUIRE(cli.run("measure uniform --space g.json:3 -o u.json").code == 0);
  auto u = json::parse(cli.read("u.json"));
  CHECK(u["weights"].size() == 8);
  auto defect = cli.run_json("measure defect --measure u.json --action g.json:3 --length 2");
  CHECK(defect["max_prokhorov"] == 0);
  auto csv = cli.run("--format csv measure defect --measure u.json --action g.json:3 --length 1");
  CHECK(csv.out.rfind("word,tv,prokhorov\n", 0) == 0);
  REQUIRE(cli.run("measure push --measure u.json --codomain g.json:2 --table 0,1,2,3,0,1,2,3 -o p.json").code == 0);
  REQUIRE(cli.run("measure uniform --space g.json:2 -o u2.json").code == 0);
  auto d = cli.run_json("measure prokhorov p.json u2.json");
  CHECK(d["prokhorov"]["value"].get<double>() >= 0);
  CHECK(cli.run("measure prokhorov u.json u2.json").code == 2);
}

TEST_CASE("couple commands") {
  Cli cli;
  REQUIRE(cli.run("chain build --family cyclic:2 --depth 3 -o g.json").code == 0);
  auto d = cli.run_json("couple defect --x g.json:3 --y g.json:3 --table 0,1,2,3,4,5,6,7 --length 2");
  CHECK(d["max_defect"] == 0);
  // Element order of Z/8 is 0, 1, 7, 2, 6, 3, 5, 4: the net {0, 2, -2} covers at radius 2.
  auto e = cli.run_json("couple extend --x g.json:3 --y g.json:3 --net 0,3,4 --f-net 0,3,4 --net-radius 2 --epsilon 2");
  CHECK(e["within_bound"] == true);
  CHECK(cli.run("couple extend --x g.json:3 --y g.json:3 --net 0,3,4 --f-net 0,3,4 --net-radius 1 --epsilon 1").code == 2);
  auto c = cli.run_json("couple check --x g.json:3 --y g.json:3 --table 0,1,2,3,4,5,6,7 --word t --subset 0,1 --xi 0");
  CHECK(c["status"] == "pass");
  auto s = cli.run_json("--seed 5 couple check --suite net --count 50");
  CHECK(s["instances"] == 50);
  CHECK(s["violations"] == 0);
}

TEST_CASE("pipeline run and error json") {
  Cli cli;
  auto a = cli.run("--threads 1 pipeline run --config '" + config("doubling_cyclic") + "' --run-dir run");
  CHECK(a.code == 0);
  CHECK(a.out == cli.read("run/report.json"));
  CHECK(fs::exists(cli.dir() / "run" / "manifest.json"));
  auto t = cli.run("--error-json pipeline run --config '" + config("sl2_vs_cyclic") + "' -o r.json");
  CHECK(t.code == 4);
  auto err = json::parse(t.out);
  CHECK(err["error"]["kind"] == "infeasible");
  CHECK(json::parse(cli.read("r.json"))["truncated"] == true);
  cli.write("bad.json", {{"G", "cyclic:2"}});
  auto b = cli.run("--error-json pipeline run --config bad.json");
  CHECK(b.code == 2);
  CHECK(json::parse(b.out)["error"]["kind"] == "validation");
  CHECK(cli.run("--budget 3 pipeline run --config '" + config("doubling_cyclic") + "'").code != 1);
}
