#include "rkde/experiments.hpp"

#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace rkde;

namespace {

int
run(const std::string& args)
{
  const std::string cmd = std::string(RKDE_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path
scratch(const std::string& name)
{
  const auto dir = fs::temp_directory_path() / ("rkde_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string
slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Normal values with every `every`-th cell replaced by "NA".
fs::path
write_input(const fs::path& dir, std::size_t n, std::size_t every)
{
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  std::ofstream out(dir / "in.csv");
  out << "id,value,flag\n";
  for (std::size_t i = 0; i < n; ++i) {
    const bool miss = every && i % every == 0;
    out << i << ',';
    if (miss)
      out << "NA";
    else
      out << z(rng);
    out << ',' << (miss ? 0 : 1) << '\n';
  }
  return dir / "in.csv";
}

} // namespace

TEST_CASE("exit codes")
{
  const auto dir = scratch("codes");
  CHECK(run("--help") == 0);
  CHECK(run("reproduce --table 9") == 2);
  CHECK(run("reproduce --table 1 --replications 0") == 2);
  CHECK(run("bench --n 50") == 2);
  CHECK(run("estimate --input " + (dir / "absent.csv").string() + " --column value") == 3);

  std::ofstream(dir / "bad.csv") << "a,b\n1,2\n3\n";
  CHECK(run("estimate --input " + (dir / "bad.csv").string() + " --column a") == 3);

  std::ofstream zero(dir / "zero.csv");
  zero << "value,flag\n";
  for (int i = 0; i < 20; ++i)
    zero << i << ",0\n";
  zero.close();
  CHECK(run("estimate --input " + (dir / "zero.csv").string() + " --column value --flag-column flag") == 3);

  std::ofstream flat(dir / "flat.csv");
  flat << "value\n";
  for (int i = 0; i < 20; ++i)
    flat << "1.5\n";
  flat.close();
  CHECK(run("estimate --input " + (dir / "flat.csv").string() + " --column value --out-dir " +
            (dir / "o").string()) == 4);
}

TEST_CASE("estimate on complete data reports pi_hat = 1")
{
  const auto dir = scratch("complete");
  const auto input = write_input(dir, 200, 0);
  REQUIRE(run("estimate --input " + input.string() + " --column value --grid 50 --out-dir " + dir.string()) == 0);
  const auto meta = nlohmann::json::parse(slurp(dir / "estimate.json"));
  CHECK(meta["pi_hat"] == 1.0);
  CHECK(meta["observed_fraction"] == 1.0);
  const auto csv = slurp(dir / "density.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 51);
  CHECK(csv.rfind("manifest,x,recursive,batch\n", 0) == 0);
}

TEST_CASE("estimate with sentinel and flag columns")
{
  const auto dir = scratch("sentinel");
  const auto input = write_input(dir, 300, 3);
  REQUIRE(run("estimate --input " + input.string() + " --column value --sentinel NA --out-dir " + dir.string()) == 0);
  const auto a = nlohmann::json::parse(slurp(dir / "estimate.json"));
  CHECK(a["observed_fraction"].get<double>() == doctest::Approx(200.0 / 300.0));
  CHECK(a["pi_hat"].get<double>() == doctest::Approx(200.0 / 300.0));

  REQUIRE(run("estimate --input " + input.string() + " --column value --flag-column flag --out-dir " +
              (dir / "f").string()) == 0);
  const auto b = nlohmann::json::parse(slurp(dir / "f" / "estimate.json"));
  CHECK(b["observed"] == 200);
}

TEST_CASE("reproduce writes deterministic outputs with a manifest")
{
  const auto dir = scratch("reproduce");
  const std::string common = "reproduce --table 1 --n 100 --missing 30 --replications 4 --grid 50 ";
  REQUIRE(run(common + "--threads 1 --out-dir " + (dir / "a").string()) == 0);
  REQUIRE(run(common + "--threads 3 --out-dir " + (dir / "b").string()) == 0);
  CHECK(slurp(dir / "a" / "table1.csv") == slurp(dir / "b" / "table1.csv"));
  CHECK(slurp(dir / "a" / "table1.json") == slurp(dir / "b" / "table1.json"));
  CHECK(fs::exists(dir / "a" / "table1_timing.csv"));

  const auto doc = nlohmann::json::parse(slurp(dir / "a" / "table1.json"));
  const std::string hash = doc["manifest"]["hash"];
  const auto csv = slurp(dir / "a" / "table1.csv");
  // Header plus 3 estimators.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(csv.find(hash) != std::string::npos);
}

TEST_CASE("config file with flag override")
{
  const auto dir = scratch("config");
  std::ofstream(dir / "run.toml") << "[reproduce]\ntable = 2\nn = [100]\nmissing = [0]\nreplications = 2\ngrid = 20\n";
  REQUIRE(run("--config " + (dir / "run.toml").string() + " reproduce --replications 3 --out-dir " + dir.string()) == 0);
  const auto doc = nlohmann::json::parse(slurp(dir / "table2.json"));
  for (const auto& cell : doc["cells"])
    CHECK(cell["replications"] == 3);
}

TEST_CASE("table layouts")
{
  const auto t1 = table_designs(1);
  CHECK(t1.size() == 36);
  std::set<std::string> est;
  std::set<std::size_t> ns;
  std::set<double> miss;
  for (const auto& d : t1) {
    est.insert(d.estimator.label);
    ns.insert(d.n);
    miss.insert(d.missing.rate);
    CHECK(d.replications == 500);
    CHECK(d.grid_points == 500);
  }
  CHECK(est == std::set<std::string>{ "nonrecursive", "recursive1", "recursive2" });
  CHECK(ns == std::set<std::size_t>{ 100, 200, 500 });
  CHECK(miss == std::set<double>{ 0.0, 0.3, 0.5, 0.7 });

  CHECK(table_designs(4).size() == 81);

  const auto t5 = table_designs(5);
  std::set<std::string> dists;
  std::set<std::string> est5;
  for (const auto& d : t5) {
    CHECK(d.local);
    CHECK_FALSE(d.x0.empty());
    dists.insert(d.distribution.name());
    est5.insert(d.estimator.label);
  }
  CHECK(dists.size() == 5);
  CHECK(est5 == std::set<std::string>{ "nonrecursive", "recursive1" });

  TableOverrides o;
  o.replications = 50;
  for (const auto& d : table_designs(1, o))
    CHECK(d.replications == 50);
  CHECK_THROWS(table_designs(6));
}
