#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "harness/config.hpp"
#include "harness/experiment.hpp"

using namespace conbandit;
using namespace conbandit::harness;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({
  "schema_version": 1,
  "env": {"K": 2, "m": 1, "constraint_base": [[-0.5, 0.4]]},
  "algorithm": {"name": "conomd_fs"},
  "horizons": [100],
  "seeds": [1],
  "output_dir": "out"
})";

std::size_t error_line(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return 0;
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  return s.replace(pos, from.size(), to);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

RunResult row(std::uint64_t seed, double regret) {
  RunResult r;
  r.algorithm = AlgorithmId::expopt;
  r.horizon = 64;
  r.seed = seed;
  r.regret = regret;
  return r;
}

}  // namespace

TEST_CASE("minimal config parses with defaults") {
  const auto cfg = parse_config(kMinimal);
  CHECK(cfg.env.arms == 2);
  CHECK(cfg.env.constraints == 1);
  CHECK(cfg.algorithm.id == AlgorithmId::conomd_fs);
  CHECK(cfg.algorithm.params.delta == 0.1);
  CHECK(cfg.horizons == std::vector<std::size_t>{100});
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1});
  CHECK_FALSE(cfg.sweep);
  CHECK(expand_cells(cfg).size() == 1);
}

TEST_CASE("seed counts expand to 1..n") {
  const auto cfg = parse_config(replace(kMinimal, "\"seeds\": [1]", "\"seeds\": 4"));
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2, 3, 4});
}

TEST_CASE("config errors carry the offending line") {
  CHECK(error_line(replace(kMinimal, "\"K\": 2", "\"K\": 2, \"k\": 3")) == 3);
  CHECK(error_line(replace(kMinimal, "\"horizons\": [100]", "\"horizons\": [100, -5]")) == 5);
  CHECK(error_line(replace(kMinimal, "\"conomd_fs\"", "\"conomd\"")) == 4);
  CHECK(error_line(replace(kMinimal, "\"schema_version\": 1", "\"schema_version\": 2")) == 2);
  CHECK(error_line(replace(kMinimal, "\"output_dir\": \"out\"", "\"output_dir\": \"out\",")) == 8);
  CHECK(error_line(replace(kMinimal, "[[-0.5, 0.4]]", "[[-0.5, 0.4, 0.1]]")) == 3);
  CHECK(error_line(replace(kMinimal, "\"seeds\": [1]", "\"seeds\": [1, 1]")) == 6);
  CHECK(error_line(replace(kMinimal, "\"seeds\": [1]", "\"seeds\": []")) == 6);
}

TEST_CASE("missing required keys are rejected") {
  CHECK_THROWS_AS(parse_config(replace(kMinimal, "\"output_dir\": \"out\"", "\"diagnostics\": false")), ConfigError);
  CHECK_THROWS_AS(parse_config("[]"), ConfigError);
}

TEST_CASE("budgets accept numbers and powers of T") {
  auto cfg = parse_config(replace(kMinimal, "\"constraint_base\"",
                                  "\"corruption\": {\"target\": \"T^0.5\"}, \"constraint_base\""));
  CHECK(cfg.env.corruption.target.resolve(16384) == 128.0);
  CHECK(cfg.env.corruption.target.resolve(1000) == 31.0);
  CHECK(cfg.env.corruption.target.label == "T^0.5");
  cfg = parse_config(replace(kMinimal, "\"constraint_base\"", "\"corruption\": {\"target\": 12.5}, \"constraint_base\""));
  CHECK(cfg.env.corruption.target.resolve(99) == 12.5);
  CHECK(cfg.env.corruption.target.label == "12.5");
  for (const char* bad : {"\"T^2\"", "\"sqrt\"", "\"T^\"", "-1", "\"T^0.5x\""}) {
    CHECK_THROWS_AS(parse_config(replace(kMinimal, "\"constraint_base\"",
                                         std::string("\"corruption\": {\"target\": ") + bad + "}, \"constraint_base\"")),
                    ConfigError);
  }
}

TEST_CASE("T^0.75 floors as expected at 2^14") {
  BudgetSpec b;
  b.exponent = 0.75;
  CHECK(b.resolve(16384) == 1448.0);
  b.exponent = 1.0;
  CHECK(b.resolve(4096) == 4096.0);
}

TEST_CASE("expopt exploration must fit in the horizon") {
  const auto text = replace(replace(kMinimal, "\"conomd_fs\"", "\"expopt\", \"beta\": 0.9"), "\"K\": 2", "\"K\": 5");
  const auto fixed = replace(text, "[[-0.5, 0.4]]", "[[-0.5, 0.4, 0.1, 0.1, 0.1]]");
  CHECK(error_line(fixed) == 4);
  CHECK_NOTHROW(parse_config(replace(fixed, "0.9", "0.3")));
}

TEST_CASE("sweep grids expand and reject empty axes") {
  const auto text = replace(kMinimal, "\"output_dir\": \"out\"",
                            "\"output_dir\": \"out\", \"sweep\": {\"algorithms\": [\"conomd_fs\", \"expopt\"],"
                            " \"C_target\": [0, \"T^0.5\"], \"beta\": [0.3, 0.5]}");
  const auto cfg = parse_config(text);
  CHECK(expand_cells(cfg).size() == 8);
  CHECK_THROWS_AS(parse_config(replace(text, "[0.3, 0.5]", "[]")), ConfigError);
  CHECK_THROWS_AS(parse_config(replace(text, "[\"conomd_fs\", \"expopt\"]", "[]")), ConfigError);
}

TEST_CASE("summary merge overwrites by key and keeps other rows") {
  const auto dir = fs::temp_directory_path() / ("conbandit_merge_" + std::to_string(::getpid()));
  const auto path = dir / "summary.csv";
  fs::remove_all(dir);
  merge_summary(path, {row(2, 1.0), row(1, 2.0)});
  const auto first = slurp(path);
  CHECK(first == std::string(kSummaryHeader) + "\nexpopt,64,1,0,0,0,2,0,0,0\nexpopt,64,2,0,0,0,1,0,0,0\n");
  merge_summary(path, {row(2, 1.0), row(1, 2.0)});
  CHECK(slurp(path) == first);
  merge_summary(path, {row(1, 5.0), row(3, 0.5)});
  CHECK(slurp(path) == std::string(kSummaryHeader) +
                           "\nexpopt,64,1,0,0,0,5,0,0,0\nexpopt,64,2,0,0,0,1,0,0,0\nexpopt,64,3,0,0,0,0.5,0,0,0\n");

  std::ofstream(path) << "not,a,summary\n";
  CHECK_THROWS(merge_summary(path, {row(1, 1.0)}));
  fs::remove_all(dir);
}

TEST_CASE("seed offset comes from the environment") {
  ::unsetenv("CONBANDIT_SEED_OFFSET");
  CHECK(seed_offset_from_env() == 0);
  ::setenv("CONBANDIT_SEED_OFFSET", "1000", 1);
  CHECK(seed_offset_from_env() == 1000);
  ::setenv("CONBANDIT_SEED_OFFSET", "-3", 1);
  CHECK_THROWS_AS(seed_offset_from_env(), ConfigError);
  ::setenv("CONBANDIT_SEED_OFFSET", "99999999999999999999999", 1);
  CHECK_THROWS_AS(seed_offset_from_env(), ConfigError);
  ::unsetenv("CONBANDIT_SEED_OFFSET");
}

TEST_CASE("execute is deterministic and shifts seeds") {
  auto cfg = parse_config(replace(kMinimal, "\"seeds\": [1]", "\"seeds\": 3"));
  RunnerOptions one, many;
  one.jobs = 1;
  many.jobs = 3;
  const auto a = execute(cfg, expand_cells(cfg), one);
  const auto b = execute(cfg, expand_cells(cfg), many);
  REQUIRE(a.front().runs.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(format_summary_row(a.front().runs[k]) == format_summary_row(b.front().runs[k]));
  }
  many.seed_offset = 10;
  const auto c = execute(cfg, expand_cells(cfg), many);
  CHECK(c.front().runs.front().seed == 11);
}

TEST_CASE("fits need three horizons") {
  CellResult cell;
  cell.cell.target.label = "0";
  for (std::size_t T : {64, 128}) {
    RunResult r;
    r.horizon = T;
    r.regret = 1.0;
    r.violation = 1.0;
    cell.runs.push_back(r);
  }
  CHECK(fit_cell(cell).rows.empty());
  RunResult r;
  r.horizon = 256;
  r.regret = -1.0;  // no logarithm
  r.violation = 2.0;
  cell.runs.push_back(r);
  const auto fits = fit_cell(cell);
  REQUIRE(fits.rows.size() == 2);
  CHECK(fits.rows[0] == "conomd_fs,0,regret,nan,nan,nan,0");
  CHECK(fits.rows[1].rfind("conomd_fs,0,violation,", 0) == 0);
}
