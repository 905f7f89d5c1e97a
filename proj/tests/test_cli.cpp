#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <doctest.h>
#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct RunResult {
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

// runs the CLI with the given arguments, captures exit code and streams
RunResult run_cli(const std::string& args, const std::string& tag,
                  const std::string& env = "") {
  const fs::path dir = fs::path("cli_runs") / tag;
  fs::create_directories(dir);
  const std::string cmd = env + (env.empty() ? "" : " ") + DYADIC_CLI_PATH + " " + args +
                          " > " + (dir / "stdout.txt").string() + " 2> " +
                          (dir / "stderr.txt").string();
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(dir / "stdout.txt");
  r.err = slurp(dir / "stderr.txt");
  return r;
}

std::string fixture(const std::string& name) {
  return (fs::path(DYADIC_FIXTURE_DIR) / name).string();
}

std::string out_dir(const std::string& tag) { return (fs::path("cli_out") / tag).string(); }

}  // namespace

TEST_CASE("tops lists quadrants and reruns byte-identically") {
  const std::string base = "tops --grid " + fixture("grid_std2d.json");
  const RunResult r1 = run_cli(base + " --out " + out_dir("tops_a"), "tops_a");
  CHECK(r1.code == 0);
  CHECK(r1.out.find("tiling clean") != std::string::npos);
  const RunResult r2 = run_cli(base + " --out " + out_dir("tops_b"), "tops_b");
  CHECK(r2.code == 0);

  const std::string a = slurp(fs::path(out_dir("tops_a")) / "tops.json");
  const std::string b = slurp(fs::path(out_dir("tops_b")) / "tops.json");
  REQUIRE_FALSE(a.empty());
  CHECK(a == b);

  const auto j = nlohmann::ordered_json::parse(a);
  CHECK(j["schema"] == 1);
  CHECK(j["tops"].size() == 4);
  CHECK(j["tiling"]["violations"] == 0);
}

TEST_CASE("expand writes a reloadable tree and a scale series") {
  const std::string base = "expand --grid " + fixture("grid_std1d.json") + " --measure " +
                           fixture("measure_lebesgue1d.json") + " --function " +
                           fixture("function_half1d.json") + " --kappa 1 --window -2:0";
  const RunResult r1 = run_cli(base + " --out " + out_dir("exp_a"), "exp_a");
  CHECK(r1.code == 0);

  const std::string tree_a = slurp(fs::path(out_dir("exp_a")) / "tree.json");
  REQUIRE_FALSE(tree_a.empty());
  const RunResult r2 = run_cli(base + " --out " + out_dir("exp_b"), "exp_b");
  CHECK(r2.code == 0);
  CHECK(slurp(fs::path(out_dir("exp_b")) / "tree.json") == tree_a);

  const auto rep = nlohmann::ordered_json::parse(slurp(fs::path(out_dir("exp_a")) / "expand.json"));
  CHECK(rep["round_trip_error"].get<double>() == 0.0);
  CHECK(rep["parseval_gap"].get<double>() <= 1e-12);

  const std::string csv = slurp(fs::path(out_dir("exp_a")) / "coefficients.csv");
  CHECK(csv.rfind("scale,magnitude", 0) == 0);

  // the emitted tree parses as a document with the declared schema
  const auto tj = nlohmann::ordered_json::parse(tree_a);
  CHECK(tj["schema"] == 1);
  CHECK(tj["window"]["m_min"] == -2);
  CHECK(tj["window"]["m_max"] == 0);
}

TEST_CASE("thread count env var leaves the artifacts bitwise unchanged") {
  const std::string base = "expand --grid " + fixture("grid_std1d.json") + " --measure " +
                           fixture("measure_lebesgue1d.json") + " --function " +
                           fixture("function_half1d.json") + " --kappa 1 --window -2:0";
  const RunResult serial = run_cli(base + " --out " + out_dir("thr_1"), "thr_1");
  const RunResult threaded =
      run_cli(base + " --out " + out_dir("thr_4"), "thr_4", "DYADIC_THREADS=4");
  CHECK(serial.code == 0);
  CHECK(threaded.code == 0);
  CHECK(slurp(fs::path(out_dir("thr_1")) / "tree.json") ==
        slurp(fs::path(out_dir("thr_4")) / "tree.json"));
}

TEST_CASE("verify passes the invariant suite on Lebesgue") {
  const RunResult r = run_cli("verify --grid " + fixture("grid_std1d.json") + " --measure " +
                                  fixture("measure_lebesgue1d.json") + " --kappa 1 --window -3:1" +
                                  " --out " + out_dir("ver_ok"),
                              "ver_ok");
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS") != std::string::npos);
  CHECK(r.err.find("FAIL") == std::string::npos);
  CHECK(fs::exists(fs::path(out_dir("ver_ok")) / "verify.json"));
  const std::string csv = slurp(fs::path(out_dir("ver_ok")) / "doubling.csv");
  CHECK(csv.rfind("base_index,scale,ratio", 0) == 0);
}

TEST_CASE("an unattainable tolerance exits 1 and names the property") {
  const RunResult r = run_cli("verify --grid " + fixture("grid_std1d.json") + " --measure " +
                                  fixture("measure_lebesgue1d.json") +
                                  " --kappa 2 --window -3:1 --tol 1e-300 --out " +
                                  out_dir("ver_bad"),
                              "ver_bad");
  CHECK(r.code == 1);
  CHECK(r.err.find("FAIL") != std::string::npos);
}

TEST_CASE("window violations exit 2 and name the scale") {
  // the two atoms share every cube down to scale -1, so m_min = 0 cannot separate
  const RunResult r = run_cli("expand --grid " + fixture("grid_std1d.json") + " --measure " +
                                  fixture("measure_atoms1d.json") + " --function " +
                                  fixture("function_one1d.json") + " --kappa 1 --window 0:2" +
                                  " --out " + out_dir("win_bad"),
                              "win_bad");
  CHECK(r.code == 2);
  CHECK(r.err.find("window") != std::string::npos);
  CHECK(r.err.find("scale 0") != std::string::npos);
}

TEST_CASE("malformed documents exit 2 with a schema message") {
  fs::create_directories("cli_runs");
  const fs::path bad = fs::path("cli_runs") / "bad_grid.json";
  std::ofstream(bad) << "{ this is not json";
  const RunResult r = run_cli("tops --grid " + bad.string() + " --out " + out_dir("bad"), "bad");
  CHECK(r.code == 2);
  CHECK(r.err.find("schema") != std::string::npos);

  // reversed window bounds are a usage error as well
  const RunResult w = run_cli("expand --grid " + fixture("grid_std1d.json") + " --measure " +
                                  fixture("measure_lebesgue1d.json") + " --function " +
                                  fixture("function_half1d.json") + " --kappa 1 --window 2:0" +
                                  " --out " + out_dir("win_rev"),
                              "win_rev");
  CHECK(w.code == 2);

  const RunResult u = run_cli("tops --grid " + fixture("grid_std1d.json") + " --no-such-flag",
                              "usage");
  CHECK(u.code == 2);
}

TEST_CASE("bilinear reproduces the worked two-atom value") {
  const RunResult r = run_cli("bilinear --grid " + fixture("grid_std1d.json") + " --measure " +
                                  fixture("measure_atoms1d.json") + " --measure2 " +
                                  fixture("measure_atoms1d_omega.json") + " --function " +
                                  fixture("function_one1d.json") + " --function2 " +
                                  fixture("function_one1d.json") + " --kernel " +
                                  fixture("kernel_hilbert.json") + " --kappa 1 --window -5:0" +
                                  " --out " + out_dir("bi"),
                              "bi");
  CHECK(r.code == 0);
  const auto j = nlohmann::ordered_json::parse(slurp(fs::path(out_dir("bi")) / "bilinear.json"));
  CHECK(j["direct"].get<double>() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(j["four_term"]["total"].get<double>() == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(j["tops_form"]["total"].get<double>() == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(j["tops_form"]["e_summands_f"].get<int>() <= 2);
}

TEST_CASE("basis run on a custom system") {
  const RunResult r = run_cli("basis --grid " + fixture("grid_std1d.json") + " --measure " +
                                  fixture("measure_lebesgue1d.json") + " --system " +
                                  fixture("system_exp1d.json") + " --window -2:0 --out " +
                                  out_dir("basis_exp"),
                              "basis_exp");
  CHECK(r.code == 0);
  CHECK(r.out.find("basis: total dim") != std::string::npos);
  const auto j =
      nlohmann::ordered_json::parse(slurp(fs::path(out_dir("basis_exp")) / "basis.json"));
  CHECK(j["schema"] == 1);
  CHECK(j["cubes"].size() > 0);
}
