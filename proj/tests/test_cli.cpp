#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;

struct Run {
  int code = -1;
  std::string out;
};

Run fjq(const std::string& args, bool merge_stderr = false) {
  std::string cmd = std::string(FJQ_BINARY) + " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

fs::path scratch(const std::string& name, const std::string& text) {
  fs::path dir = fs::temp_directory_path() / "fjq-cli-test";
  fs::create_directories(dir);
  fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("analyze emits a JSON report with stable keys") {
  Run r = fjq("analyze --model abelian-exotic-config --gauge temporal --format json");
  REQUIRE(r.code == 0);
  auto j = nlohmann::ordered_json::parse(r.out);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"model", "method", "levels", "brackets", "gauge_transformations", "dof", "notes"});
  CHECK(j["model"] == "abelian-exotic-config");
  CHECK(j["dof"] == 0);
  CHECK(j["levels"][0]["dimension"] == nlohmann::json::array({18, 18}));
  CHECK(j["levels"].back()["dimension"] == nlohmann::json::array({24, 24}));
  bool found = false;
  for (const auto& b : j["brackets"])
    if (b["lhs"] == "e(1,1)" && b["rhs"] == "phi(1)") found = b["kernel"] == "D(1)";
  CHECK(found);
}

TEST_CASE("JSON reports are byte-identical across runs") {
  for (const std::string args : {"--model abelian-exotic-config --gauge coulomb", "--model abelian-exotic-phase --gauge transverse",
                                 "--model abelian-exotic-dirac --gauge temporal-coulomb", "--model nonabelian-exotic --gauge temporal"}) {
    INFO(args);
    Run a = fjq("analyze --format json " + args), b = fjq("analyze --format json " + args);
    CHECK(a.code == 0);
    CHECK(!a.out.empty());
    CHECK(a.out == b.out);
  }
}

TEST_CASE("text output and --out") {
  Run r = fjq("analyze --model abelian-exotic-dirac");
  CHECK(r.code == 0);
  CHECK(r.out.find("rank 12") != std::string::npos);
  fs::path out = fs::temp_directory_path() / "fjq-cli-out.json";
  fs::remove(out);
  CHECK(fjq("analyze --model abelian-exotic-config --format json --out " + out.string()).code == 0);
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == fjq("analyze --model abelian-exotic-config --format json").out);
  fs::remove(out);
}

TEST_CASE("exit codes") {
  CHECK(fjq("analyze --model nonabelian-exotic --gauge temporal --no-ansatz").code == 2);
  CHECK(fjq("analyze --model hybrid-palatini-exotic").code == 1);
  CHECK(fjq("analyze --model no-such-model").code == 1);
  CHECK(fjq("analyze --model abelian-exotic-config --gauge nowhere").code != 0);

  std::string text = "[model]\nname = bad\n\n[variables]\nq\n\n[potential]\nq*B\n";
  Run bad = fjq("analyze --model " + scratch("bad.fjmodel", text).string(), true);
  CHECK(bad.code == 4);
  CHECK(bad.out.find("8:3: undeclared symbol B") != std::string::npos);
}

TEST_CASE("an incomplete gauge exits with 3") {
  Run base = fjq("analyze --model abelian-exotic-config --gauge none");
  REQUIRE(base.code == 0);
  std::ifstream in(std::string(FJQ_SOURCE_DIR) + "/models/abelian-exotic-config.fjmodel");
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str() + "\n[gauges.half]\nphi(I) = e(I,0)\n";
  CHECK(fjq("analyze --model " + scratch("half.fjmodel", text).string() + " --gauge half").code == 3);
}

TEST_CASE("list-models") {
  Run r = fjq("list-models --format json");
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j.size() == 5);
  std::set<std::string> names;
  for (const auto& m : j) names.insert(m["name"].get<std::string>());
  CHECK(names.count("abelian-exotic-dirac"));
  CHECK(names.count("hybrid-palatini-exotic"));
}

TEST_CASE("compare and verify-inverse") {
  CHECK(fjq("compare --model abelian-exotic-config --gauge temporal --against-model abelian-exotic-dirac --map strong-second-class")
            .code == 0);
  CHECK(fjq("compare --model abelian-exotic-phase --gauge transverse --against-model abelian-exotic-dirac --against-gauge "
            "temporal-coulomb")
            .code == 0);
  Run mm = fjq("compare --model nonabelian-exotic --gauge temporal --map momentum-map --format json");
  CHECK(mm.code == 0);
  CHECK(nlohmann::json::parse(mm.out)["equivalent"] == true);
  // configuration-space Coulomb brackets differ from the fully gauge-fixed Dirac ones
  CHECK(fjq("compare --model abelian-exotic-config --gauge coulomb --against-model abelian-exotic-dirac --against-gauge "
            "temporal-coulomb --map strong-second-class")
            .code == 1);

  Run v = fjq("verify-inverse --model abelian-exotic-config --gauge temporal");
  CHECK(v.code == 0);
  CHECK(v.out.find("0 nonzero residual cells") != std::string::npos);
  CHECK(fjq("verify-inverse --model nonabelian-exotic --gauge temporal").code == 0);
}
