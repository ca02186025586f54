#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef EVCOORD_CLI_PATH
#define EVCOORD_CLI_PATH "evcoord"
#endif
#ifndef EVCOORD_DATA_DIR
#define EVCOORD_DATA_DIR "data"
#endif

namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
  const std::string cmd = std::string(EVCOORD_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("generate emits byte-identical scenarios for one seed") {
  const fs::path a = fresh_dir("evcoord_cli_gen_a");
  const fs::path b = fresh_dir("evcoord_cli_gen_b");
  REQUIRE(run("generate --seed 7 --jitter --data-dir " + std::string(EVCOORD_DATA_DIR) +
              " --out-dir " + a.string()) == 0);
  REQUIRE(run("generate --seed 7 --jitter --data-dir " + std::string(EVCOORD_DATA_DIR) +
              " --out-dir " + b.string()) == 0);
  for (const char* f : {"fleet.csv", "stations.csv", "pv.csv", "prices.csv", "config.toml"})
    CHECK(slurp(a / f) == slurp(b / f));
}

TEST_CASE("full pipeline on a small jittered scenario") {
  const fs::path scn = fresh_dir("evcoord_cli_scn");
  REQUIRE(run("generate --seed 9 --data-dir " + std::string(EVCOORD_DATA_DIR) + " --out-dir " +
              scn.string()) == 0);
  const std::string cfg = (scn / "config.toml").string();

  SUBCASE("coordinate twice gives byte-identical artifacts") {
    const fs::path o1 = fresh_dir("evcoord_cli_run1");
    const fs::path o2 = fresh_dir("evcoord_cli_run2");
    REQUIRE(run("coordinate --config " + cfg + " --out-dir " + o1.string()) == 0);
    REQUIRE(run("coordinate --config " + cfg + " --out-dir " + o2.string()) == 0);
    for (const char* f : {"trace.csv", "settlement.csv", "prices.csv", "decisions.csv",
                          "state_bus.csv", "summary.json"})
      CHECK(slurp(o1 / f) == slurp(o2 / f));

    SUBCASE("audit accepts the saved state") {
      const fs::path ao = fresh_dir("evcoord_cli_audit");
      CHECK(run("audit --config " + cfg + " --state-prefix " + (o1 / "state").string() +
                " --out-dir " + ao.string()) == 0);
      CHECK(fs::exists(ao / "audit.csv"));
    }
  }

  SUBCASE("flex writes envelopes and a width summary") {
    const fs::path fo = fresh_dir("evcoord_cli_flex");
    REQUIRE(run("flex --config " + cfg + " --out-dir " + fo.string()) == 0);
    CHECK(slurp(fo / "envelopes.csv").rfind("station,t,lower_kw,upper_kw", 0) == 0);
  }

  SUBCASE("disaggregate follows an in-region trajectory") {
    // Build a midpoint trajectory for CS2 from the envelope file.
    const fs::path fo = fresh_dir("evcoord_cli_flex2");
    REQUIRE(run("flex --config " + cfg + " --out-dir " + fo.string()) == 0);
    std::ifstream env(fo / "envelopes.csv");
    std::string line;
    std::getline(env, line);  // header
    const fs::path traj = fo / "traj.csv";
    {
      std::ofstream out(traj);
      out << "t,p_kw\n";
      while (std::getline(env, line)) {
        std::stringstream ss(line);
        std::string station, t, lo, up;
        std::getline(ss, station, ',');
        std::getline(ss, t, ',');
        std::getline(ss, lo, ',');
        std::getline(ss, up, ',');
        if (station == "CS2") out << t << "," << 0.5 * (std::stod(lo) + std::stod(up)) << "\n";
      }
    }
    const fs::path dord = fresh_dir("evcoord_cli_disagg");
    CHECK(run("disaggregate --config " + cfg + " --station CS2 --trajectory " + traj.string() +
              " --out-dir " + dord.string()) == 0);
    CHECK(fs::exists(dord / "dispatch_CS2.csv"));
    CHECK(fs::exists(dord / "violations_CS2.csv"));
  }
}

TEST_CASE("error surfaces") {
  CHECK(run("coordinate --config /nonexistent.toml --out-dir /tmp/evcoord_none") == 4);
  CHECK(run("no-such-command") == 2);
  CHECK(run("disaggregate --config x.toml") == 2);  // missing required options
}

TEST_CASE("hitting the iteration cap reports the dedicated exit code") {
  const fs::path scn = fresh_dir("evcoord_cli_cap");
  REQUIRE(run("generate --seed 5 --data-dir " + std::string(EVCOORD_DATA_DIR) + " --out-dir " +
              scn.string()) == 0);
  const fs::path out = fresh_dir("evcoord_cli_cap_out");
  CHECK(run("coordinate --config " + (scn / "config.toml").string() + " --max-iter 2 --out-dir " +
            out.string()) == 3);
  CHECK(fs::exists(out / "trace.csv"));  // partial trace still written
}

}  // TEST_SUITE
