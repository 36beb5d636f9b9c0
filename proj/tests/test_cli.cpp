#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return NUMDIFF_CLI_PATH; }

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / "numdiff_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(cli_path()) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

void write_two_tone_config(const fs::path& path, const fs::path& out_dir,
                           const std::string& extra_algorithms = "") {
  std::ofstream out(path);
  out << R"({
  "scenario": "two_tone",
  "signal": {"amplitude_1": 1.0, "freq_1": 20.0, "amplitude_2": 1.0, "freq_2": 30.0,
             "sample_time_s": 0.01, "num_steps": 400},
  "derivative_order": 1,
  "snr_db": [20, 30, 40, 50, 60],
  "seeds": [1, 2, 3],
  "output_dir": ")" << out_dir.string() << R"(",
  "algorithms": [
    {"name": "bd", "type": "bd"},
    {"name": "sg", "type": "sg", "half_window": 2, "poly_degree": 3})" << extra_algorithms
      << R"(
  ]
})";
}

}  // namespace

TEST_CASE("generate writes one clean and one noisy file per (snr, seed)") {
  const auto dir = temp_dir("generate");
  const auto cfg = dir / "config.json";
  write_two_tone_config(cfg, dir / "out");
  REQUIRE(run("generate --config " + cfg.string()) == 0);
  std::size_t files = 0;
  bool clean = false;
  for (const auto& entry : fs::directory_iterator(dir / "out")) {
    ++files;
    if (entry.path().filename() == "clean.csv") clean = true;
  }
  CHECK(clean);
  CHECK(files == 16);  // 5 SNRs x 3 seeds + clean
}

TEST_CASE("compare emits per-run reports, summary tables, and delay floors") {
  const auto dir = temp_dir("compare");
  const auto cfg = dir / "config.json";
  write_two_tone_config(cfg, dir / "out");
  REQUIRE(run("compare --config " + cfg.string() + " --jobs 2") == 0);
  CHECK(fs::exists(dir / "out" / "summary.csv"));
  CHECK(fs::exists(dir / "out" / "summary_median.csv"));
  CHECK(fs::exists(dir / "out" / "summary.json"));
  CHECK(fs::exists(dir / "out" / "rho_bd_snr20_seed1.csv"));
  CHECK(fs::exists(dir / "out" / "rho_sg_snr60_seed3.json"));
  const std::string summary = slurp(dir / "out" / "summary.csv");
  CHECK(summary.find("delay_floor_delta1") != std::string::npos);
  CHECK(summary.find("delay_floor_delta3") != std::string::npos);
  CHECK(summary.find("failed") == std::string::npos);
}

TEST_CASE("byte-identical outputs across repeated runs") {
  const auto dir = temp_dir("determinism");
  const auto cfg_a = dir / "a.json";
  const auto cfg_b = dir / "b.json";
  write_two_tone_config(cfg_a, dir / "out_a");
  write_two_tone_config(cfg_b, dir / "out_b");
  REQUIRE(run("compare --config " + cfg_a.string() + " --jobs 4") == 0);
  REQUIRE(run("compare --config " + cfg_b.string() + " --jobs 1") == 0);
  for (const auto& entry : fs::directory_iterator(dir / "out_a")) {
    const auto twin = dir / "out_b" / entry.path().filename();
    REQUIRE(fs::exists(twin));
    CHECK(slurp(entry.path()) == slurp(twin));
  }
}

TEST_CASE("exact clean ramp through the backward difference has zero error") {
  const auto dir = temp_dir("ramp");
  const auto cfg = dir / "config.json";
  {
    std::ofstream out(cfg);
    out << R"({
  "scenario": "maneuver",
  "signal": {"sample_time_s": 0.01, "duration_s": 5.0,
             "ramp_slope": 2.0, "lateral_shift": 0.0, "steepness": 1.0, "midpoint_s": 2.5},
  "derivative_order": 1,
  "seeds": [1],
  "output_dir": ")" << (dir / "out").string() << R"(",
  "algorithms": [{"name": "bd", "type": "bd"}]
})";
  }
  REQUIRE(run("compare --config " + cfg.string()) == 0);
  // constant truth: the delay floor is zero and BD is exact on ramps
  const auto rows = lines_of(dir / "out" / "summary_median.csv");
  REQUIRE(rows.size() >= 2);
  CHECK(rows[1].find("bd,clean,0") == 0);
}

TEST_CASE("differentiate places estimates at their availability step") {
  const auto dir = temp_dir("differentiate");
  const auto input = dir / "input.csv";
  {
    std::ofstream out(input);
    out << "t,y\n";
    for (int k = 0; k < 20; ++k) {
      out << 0.01 * k << ',' << 0.05 * k << '\n';
    }
  }
  const auto cfg = dir / "config.json";
  write_two_tone_config(cfg, dir / "out");
  const auto result = dir / "bd.csv";
  REQUIRE(run("differentiate --config " + cfg.string() + " --input " + input.string() +
              " --algorithm bd --output-csv " + result.string()) == 0);
  const auto rows = lines_of(result);
  REQUIRE(rows.size() == 21);  // header + one row per input step
  CHECK(rows[0] == "k,t,y,d_hat");
  CHECK(rows[1].substr(rows[1].size() - 1) == ",");  // no estimate yet
  CHECK(rows[2].substr(rows[2].size() - 1) == ",");
  for (std::size_t k = 3; k < rows.size(); ++k) {
    const double d_hat = std::stod(rows[k].substr(rows[k].find_last_of(',') + 1));
    CHECK(d_hat == doctest::Approx(5.0).epsilon(1e-9));
  }

  // the sliding-window fit first emits at row 2l + 1 = 5
  const auto sg_result = dir / "sg.csv";
  REQUIRE(run("differentiate --config " + cfg.string() + " --input " + input.string() +
              " --algorithm sg --output-csv " + sg_result.string()) == 0);
  const auto sg_rows = lines_of(sg_result);
  for (std::size_t k = 1; k <= 5; ++k) {
    CHECK(sg_rows[k].substr(sg_rows[k].size() - 1) == ",");
  }
  CHECK(sg_rows[6].substr(sg_rows[6].find_last_of(',') + 1) != "");
}

TEST_CASE("invalid configs are rejected with every problem listed") {
  const auto dir = temp_dir("invalid");
  const auto cfg = dir / "config.json";
  {
    std::ofstream out(cfg);
    out << R"({
  "scenario": "warp",
  "derivative_order": 5,
  "algorithms": [
    {"name": "x", "type": "sg", "half_window": 0, "poly_degree": 9},
    {"name": "h", "type": "hgo", "order": 2, "alphas": [-2, 1], "epsilon": 0.0}
  ]
})";
  }
  const std::string cmd = std::string(cli_path()) + " compare --config " + cfg.string() +
                          " 2> " + (dir / "stderr.txt").string();
  const int status = WEXITSTATUS(std::system(cmd.c_str()));
  CHECK(status == 1);
  const std::string err = slurp(dir / "stderr.txt");
  CHECK(err.find("scenario") != std::string::npos);
  CHECK(err.find("derivative_order") != std::string::npos);
  CHECK(err.find("algorithms[0].half_window") != std::string::npos);
  CHECK(err.find("algorithms[1].epsilon") != std::string::npos);
}

TEST_CASE("eta sweep of a single point yields a single-row table plus overlays") {
  const auto dir = temp_dir("eta_single");
  const auto cfg = dir / "config.json";
  {
    std::ofstream out(cfg);
    out << R"({
  "scenario": "two_tone",
  "signal": {"num_steps": 300, "sample_time_s": 0.01},
  "derivative_order": 1,
  "snr_db": [20],
  "seeds": [1],
  "output_dir": ")" << (dir / "out").string() << R"(",
  "algorithms": [
    {"name": "ase", "type": "aie", "mode": "ase", "grid_points": 50}
  ],
  "eta_sweep": {"algorithm": "ase", "snr_db": 20, "eta_lower": 1e-4, "eta_upper": 1e-4, "points": 1}
})";
  }
  REQUIRE(run("eta-sweep --config " + cfg.string()) == 0);
  const auto rows = lines_of(dir / "out" / "eta_sweep_median.csv");
  REQUIRE(rows.size() == 5);  // header + 1 grid row + sse + sse_x2 + ase
  CHECK(rows[1].substr(0, 4) == "nse,");
  CHECK(rows[2].substr(0, 4) == "sse,");
  CHECK(rows[3].substr(0, 7) == "sse_x2,");
  CHECK(rows[4].substr(0, 4) == "ase,");
}
