#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Workdir {
 public:
  Workdir() {
    dir_ = fs::temp_directory_path() / ("cftv_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Workdir() { fs::remove_all(dir_); }
  fs::path operator/(const std::string& name) const { return dir_ / name; }

  Result run(const std::string& args) const {
    fs::path out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    std::string cmd = std::string(CFTV_BIN) + " " + args + " > " + out.string() + " 2> " + err.string();
    int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

 private:
  fs::path dir_;
};

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("mincut of HMI.sl_late contains the sampling-time deviation") {
    Workdir w;
    REQUIRE(w.run("export-case-study " + q(w / "cs")).code == 0);
    auto r = w.run("mincut " + q(w / "cs" / "coasting.cft.json") + " --top HMI.sl_late --scope all");
    REQUIRE(r.code == 0);
    json doc = json::parse(r.out);
    bool found = false;
    for (const auto& c : doc.at("cuts"))
      if (c == json::array({"camera.samptime_deviation"})) found = true;
    CHECK(found);
    auto text = w.run("mincut " + q(w / "cs" / "coasting.cft.json") + " --top HMI.sl_late --scope all --format text");
    CHECK(text.code == 0);
    CHECK(text.out.find("camera.samptime_deviation") != std::string::npos);
  }

  TEST_CASE("validating an empty model prints nothing") {
    Workdir w;
    std::ofstream(w / "empty.cft.json") << R"({"components":[],"connections":[]})";
    auto r = w.run("validate " + q(w / "empty.cft.json"));
    CHECK(r.code == 0);
    CHECK(r.out.empty());
    CHECK(r.err.empty());
  }

  TEST_CASE("input errors exit with 2 and a JSON diagnostic") {
    Workdir w;
    auto missing = w.run("validate " + q(w / "nope.cft.json"));
    CHECK(missing.code == 2);
    REQUIRE_FALSE(missing.err.empty());
    json diag = json::parse(missing.err.substr(0, missing.err.find('\n')));
    CHECK(diag.contains("kind"));
    CHECK(diag.contains("message"));

    std::ofstream(w / "bad.cft.json") << "{ not json";
    CHECK(w.run("validate " + q(w / "bad.cft.json")).code == 2);
    CHECK(w.run("frobnicate").code == 2);
    REQUIRE(w.run("export-case-study " + q(w / "cs")).code == 0);
    CHECK(w.run("mincut " + q(w / "cs" / "coasting.cft.json") + " --top camera.nothing").code == 2);
  }

  TEST_CASE("a model with structural errors exits with 2") {
    Workdir w;
    std::ofstream(w / "dangling.cft.json")
        << R"({"components":[{"id":"a","inports":[],"outports":["o"],"cft":{}}],)"
        << R"("connections":[{"from":"a.o","to":"b.i"}]})";
    auto r = w.run("validate " + q(w / "dangling.cft.json"));
    CHECK(r.code == 2);
    CHECK_FALSE(r.err.empty());
  }

  TEST_CASE("seeded extra path: gentests feeds verify, which reports it") {
    Workdir w;
    REQUIRE(w.run("export-fixture extra_path " + q(w / "fx")).code == 0);
    auto gen = w.run("gentests " + q(w / "fx" / "extra_path.cft.json") + " --scope all --bind " +
                     q(w / "fx" / "extra_path.bind.json") + " --btm-dir " + q(w / "fx" / "btm") + " --cross -o " +
                     q(w / "suite.tests.json"));
    REQUIRE(gen.code == 0);
    auto ver = w.run("verify " + q(w / "fx" / "extra_path.sim.json") + " " + q(w / "suite.tests.json") + " -o " +
                     q(w / "report.json"));
    CHECK(ver.code == 1);
    std::string report = slurp(w / "report.json");
    CHECK(report.find("UnmodeledPath") != std::string::npos);
    auto text = w.run("report " + q(w / "report.json") + " --format text");
    CHECK(text.code == 0);
    CHECK(text.out.find("c.b1") != std::string::npos);
  }

  TEST_CASE("faithful fixture verifies cleanly") {
    Workdir w;
    REQUIRE(w.run("export-fixture chain " + q(w / "fx")).code == 0);
    REQUIRE(w.run("gentests " + q(w / "fx" / "chain.cft.json") + " --scope all --bind " +
                  q(w / "fx" / "chain.bind.json") + " --btm-dir " + q(w / "fx" / "btm") + " -o " +
                  q(w / "suite.tests.json"))
                .code == 0);
    CHECK(w.run("verify " + q(w / "fx" / "chain.sim.json") + " " + q(w / "suite.tests.json") + " -o " +
                q(w / "report.json"))
              .code == 0);
  }

  TEST_CASE("rerunning commands yields identical files") {
    Workdir w;
    REQUIRE(w.run("export-fixture fan_out " + q(w / "fx")).code == 0);
    std::string gen = "gentests " + q(w / "fx" / "fan_out.cft.json") + " --scope all --bind " +
                      q(w / "fx" / "fan_out.bind.json") + " --btm-dir " + q(w / "fx" / "btm") + " --cross -o ";
    REQUIRE(w.run(gen + q(w / "s1.json")).code == 0);
    REQUIRE(w.run(gen + q(w / "s2.json")).code == 0);
    CHECK(slurp(w / "s1.json") == slurp(w / "s2.json"));
    std::string ver = "verify " + q(w / "fx" / "fan_out.sim.json") + " " + q(w / "s1.json") + " -o ";
    w.run(ver + q(w / "r1.json"));
    w.run(ver + q(w / "r2.json") + " --jobs 2");
    CHECK(slurp(w / "r1.json") == slurp(w / "r2.json"));
    auto t1 = w.run("simulate " + q(w / "fx" / "fan_out.sim.json"));
    auto t2 = w.run("simulate " + q(w / "fx" / "fan_out.sim.json"));
    CHECK(t1.code == 0);
    CHECK(t1.out == t2.out);
    CHECK_FALSE(t1.out.empty());
  }
}
