#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

using json = nlohmann::ordered_json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI through the shell; stderr is dropped unless `merge`.
Run cli(const std::string& args, bool merge = false, const std::string& env = "") {
  const std::string cmd = env + " " + EQUIMAP_CLI_PATH + " " + args + (merge ? " 2>&1" : " 2>/dev/null");
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

const std::string kQuadratic =
    R"~(--kind A --m "u^2" --h 0 --eps 0.5 --phi "u - (x + y^2 + 2*t)" --bracket "-3:1")~";

}  // namespace

TEST_CASE("generate: the printed equation and its cross-check", "[cli]") {
  auto r = cli(R"(generate --kind A --m "u^2" --h "0" --eps 1)");
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["spec"]["kind"] == "A");
  CHECK(j["cross_check"]["points"] == 1000);
  CHECK(j["cross_check"]["max_mismatch"].get<double>() <= 1e-9);
  CHECK(j["pde"]["E"] == "(1+2*ub*ub_x)^2");

  // pretty text on stderr, with its banner
  auto pretty = cli(R"(generate --kind A --m "u^2" --h "0" --eps 1 --out /dev/null)", true);
  CHECK(pretty.out.find("not for parsing") != std::string::npos);
}

TEST_CASE("generate: identity map gives the heat equation", "[cli]") {
  auto r = cli(R"(generate --kind A --m "0" --h "0" --eps 1)");
  REQUIRE(r.code == 0);
  json p = json::parse(r.out)["pde"];
  CHECK(p["A"] == "1");
  CHECK(p["B"] == "0");
  CHECK(p["C"] == "1");
  CHECK(p["D"] == "0");
  CHECK(p["E"] == "1");
}

TEST_CASE("generate: first-order fluxes and the kind D source", "[cli]") {
  auto c = cli(R"(generate --kind C --m "u*x" --eps 0.2 --f u --g u)");
  REQUIRE(c.code == 0);
  json jc = json::parse(c.out);
  CHECK(jc["pde"]["A"] == "0");
  CHECK(jc["pde"]["E"] == "1");
  CHECK_FALSE(jc.contains("cross_check"));

  auto d = cli(R"(generate --kind D --m "x*y*t" --M "x^2*y/2" --eps 0.3)");
  REQUIRE(d.code == 0);
  json jd = json::parse(d.out);
  CHECK(jd["source"] == "0.3*(xb*yb)");
  CHECK(jd["spec"]["M"] == "x^2*y/2");

  // M must satisfy M_x = m_t
  CHECK(cli(R"(generate --kind D --m "x*y*t" --M "x*y" --eps 0.3)").code == 2);
}

TEST_CASE("generate: spec files", "[cli]") {
  const std::string path = "cli_spec.json";
  std::ofstream(path) << R"~({"kind":"B","m":"u*y + sin(u)","epsilon":0.3})~";
  auto r = cli("generate --spec " + path);
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["cross_check"]["reference"] == "family_B");
  CHECK(j["cross_check"]["max_mismatch"].get<double>() <= 1e-9);
  CHECK(cli("generate --spec does_not_exist.json").code == 2);
}

TEST_CASE("transport: the quadratic example against its closed form", "[cli]") {
  auto r = cli("transport " + kQuadratic +
               R"~( --x "-1:0.2:6" --y "-0.3:0.3:4" --t "0:0.05:3" --reference "1 - sqrt(1 - 2*(x + y^2 + 2*t))")~");
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["values"].size() == 72);
  CHECK(j["failures"] == 0);
  CHECK(j["reference"]["max_abs_error"].get<double>() <= 1e-10);
  CHECK(j["residual"]["max_abs_residual"].get<double>() <= 1e-8);
  // values ordered by point index, x fastest
  CHECK(j["values"][1]["x"].get<double>() > j["values"][0]["x"].get<double>());
}

TEST_CASE("transport: solver failures are reported per point", "[cli]") {
  auto r = cli("transport " + kQuadratic + R"( --x "0.6:0.6:1" --y "0:0:1" --t "0:0:1")");
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["failures"] == 1);
  CHECK(j["values"][0]["error"].get<std::string>().rfind("no_bracket", 0) == 0);
}

TEST_CASE("transport: zero parameter reproduces phi", "[cli]") {
  auto r = cli(R"~(transport --kind B --m "u*y" --eps 0 --phi "u - exp(-t)*sin(x)" --reference "exp(-t)*sin(x)")~");
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["reference"]["max_abs_error"].get<double>() <= 1e-14);
}

TEST_CASE("transport: sinusoidal solution under the power-law map", "[cli]") {
  auto r = cli(R"~(transport --kind A --m "u^2" --h "u^3" --eps 0.1 --phi "u - sin(x)*sin(y)*exp(-2*t)")~"
               R"( --x "0:3.14159:5" --y "0:3.14159:5" --t "0:0.5:4" --bracket "-1.5:1.5")");
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["failures"] == 0);
  CHECK(j["residual"]["failures"].empty());
  CHECK(j["residual"]["max_abs_residual"].get<double>() <= 1e-8);
}

TEST_CASE("verify: pass, negative control and degenerate region", "[cli]") {
  const std::string box = R"( --x "-1:0.2" --y "-0.3:0.3" --t "0:0.05")";
  auto ok = cli("verify " + kQuadratic + box + " --n 50");
  REQUIRE(ok.code == 0);
  json j = json::parse(ok.out);
  CHECK(j["pass"] == true);
  CHECK(j["report"]["n"] == 50);

  // generated document for a different parameter
  REQUIRE(cli(R"(generate --kind A --m "u^2" --h 0 --eps 1 --out cli_eq.json)").code == 0);
  auto bad = cli("verify " + kQuadratic + box + " --pde cli_eq.json");
  CHECK(bad.code == 1);
  json jb = json::parse(bad.out);
  CHECK(jb["pass"] == false);
  CHECK(jb["report"]["max_abs_residual"].get<double>() > 1.0);

  // no real root anywhere in the box
  auto none = cli("verify " + kQuadratic + R"( --x "0.6:0.9" --y "0:0.1" --t "0:0.1" --n 10)");
  CHECK(none.code == 3);
}

TEST_CASE("verify: admissibility filter keeps away from the fold", "[cli]") {
  auto r = cli("verify " + kQuadratic + R"( --x "-1:0.5" --y "-0.5:0.5" --t "0:0.1" --min-slope 0.3 --n 40)");
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["report"]["failures"].empty());
}

TEST_CASE("invariants: 13-row report", "[cli]") {
  auto r = cli(R"~(invariants --m "sin(u)" --n 50)~");
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  REQUIRE(j["invariants"].size() == 13);
  for (const auto& row : j["invariants"]) CHECK(row["max_scaled"].get<double>() <= 1e-8);
  CHECK(j["pass"] == true);
}

TEST_CASE("reports are reproducible and the seed can come from the environment", "[cli]") {
  const std::string args = "verify " + kQuadratic + R"( --x "-1:0.2" --y "-0.3:0.3" --t "0:0.05" --n 30)";
  auto a = cli(args + " --seed 7");
  auto b = cli(args + " --seed 7");
  auto c = cli(args + " --seed 8");
  CHECK(a.out == b.out);
  CHECK(a.out != c.out);
  auto e = cli(args + " --seed 8", false, "EQUIMAP_SEED=7");
  CHECK(e.out == a.out);
  CHECK(cli(args, false, "EQUIMAP_SEED=seven").code == 2);

  auto i1 = cli("invariants --m u^2 --seed 3");
  auto i2 = cli("invariants --m u^2 --seed 3");
  CHECK(i1.out == i2.out);
}

TEST_CASE("usage errors exit 2 with a machine-readable reason", "[cli]") {
  auto k = cli("generate --kind Q --m u --eps 1", true);
  CHECK(k.code == 2);
  json e = json::parse(k.out);
  CHECK(e["error"] == "construction_error");

  CHECK(cli("generate --no-such-flag").code == 2);
  CHECK(cli("").code == 2);
  CHECK(cli("transport --kind A --m u --eps 1").code == 2);  // --phi missing
  CHECK(cli(R"(generate --kind A --m "u^" --eps 1)").code == 2);
  CHECK(cli(R"(generate --kind A --m "u*x" --eps 1)").code == 2);
  CHECK(cli("transport " + kQuadratic + R"( --x "0:1")").code == 2);
  CHECK(cli("transport " + kQuadratic + R"( --x "0:1:2.5")").code == 2);
  CHECK(cli(R"(transport --kind A --m u --eps 1 --phi "u-x" --bracket "0:1" --seed-u 2)").code == 2);
  CHECK(cli("--help").code == 0);
}

TEST_CASE("selftest passes", "[cli]") {
  auto r = cli("selftest");
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("PASS criterion 10") != std::string::npos);
}
