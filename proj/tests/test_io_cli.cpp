#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "logcap/runner.hpp"
#include "logcap/wiener.hpp"

using namespace logcap;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "logcap_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("geometry json round trip preserves every primitive") {
  CompactSetSpec spec;
  spec.label = "mixed";
  spec.primitives.push_back(RadialSegment(1.0, 3.0, 0.5));
  spec.primitives.push_back(Arc(2.0, 0.0, kTwoPi));
  spec.primitives.push_back(DiskPatch(LogPolarPoint(4.0, 1.0), 0.3));
  spec.primitives.push_back(AnnulusBand(1.0, 2.0, 0.5, 1.5));
  spec.primitives.push_back(RadialSegment::from_log_length(16.0, -2000.0, 0.0));

  json j = geometry_to_json(spec, 2.0);
  CompactSetSpec back = geometry_from_json(j);
  REQUIRE(back.size() == spec.size());
  CHECK(back.label == "mixed");
  CHECK(geometry_ratio(j) == 2.0);
  const auto& deep = std::get<RadialSegment>(back.primitives[4]);
  CHECK(deep.log_len == -2000.0);
  CHECK(deep.t_hi == 16.0);
  CHECK(deep.is_deep());
  // a second pass through json is identical text
  CHECK(geometry_to_json(back, 2.0).dump() == j.dump());
}

TEST_CASE("bad geometry json is rejected") {
  CHECK_THROWS_AS(geometry_from_json(json{{"a", 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(
      geometry_from_json(json{{"primitives", json::array({json{{"kind", "pentagon"}}})}}),
      std::invalid_argument);
}

TEST_CASE("coefficient fields load from json and the registry extends them") {
  CHECK(field_from_json(json{{"kind", "identity"}}).lambda == 1.0);
  CHECK(field_from_json(json{{"kind", "diag"}, {"d1", 2.0}, {"d2", 0.5}}).lambda == 2.0);
  CHECK(field_from_json(json{{"kind", "rotated_diag"}, {"d1", 3.0}, {"d2", 1.0 / 3.0},
                             {"alpha", 0.7}})
            .lambda == 3.0);
  CHECK_THROWS(field_from_json(json{{"kind", "nonsense"}}));
  register_field("scaled_identity", [](const json& j) {
    double s = j.value("scale", 1.0);
    CoefficientField f = diag_field(s, s);
    f.description = "scaled_identity";
    return f;
  });
  auto f = field_from_json(json{{"kind", "scaled_identity"}, {"scale", 2.0}});
  CHECK(f.lambda == 2.0);
}

TEST_CASE("boundary data applies per-primitive constants") {
  CompactSetSpec two;
  two.primitives.push_back(Arc(2.0, 0.0, kTwoPi));
  two.primitives.push_back(Arc(3.0, 0.0, kTwoPi));
  json j{{"f_bar", 0.5}, {"default", -1.0}, {"per_primitive", {2.0, 7.0}}};
  BoundaryData data = boundary_from_json(j, two);
  CHECK(data.f_bar == 0.5);
  CHECK(data.f(LogPolarPoint(2.0, 1.0)) == 2.0);
  CHECK(data.f(LogPolarPoint(3.0, 4.0)) == 7.0);
  CHECK(data.f(LogPolarPoint(5.0, 0.0)) == -1.0);
  CHECK_THROWS(boundary_from_json(json{{"per_primitive", {1.0}}}, CompactSetSpec{}));
}

TEST_CASE("capacity runs reproduce byte-identical outputs") {
  json circle = geometry_to_json(
      [] {
        CompactSetSpec s;
        s.primitives.push_back(Arc(2.0, 0.0, kTwoPi));
        s.label = "circle";
        return s;
      }(),
      2.0);
  json config{{"command", "capacity"}, {"geometry", circle}, {"route", "equilibrium"}};
  fs::path d1 = fresh_dir("cap1");
  fs::path d2 = fresh_dir("cap2");
  REQUIRE(run_config(config, d1).exit_code == 0);
  // rerun from the persisted effective config
  json persisted = json::parse(slurp(d1 / "config.json"));
  REQUIRE(run_config(persisted, d2).exit_code == 0);
  CHECK(slurp(d1 / "result.json") == slurp(d2 / "result.json"));
  CHECK(slurp(d1 / "config.json") == slurp(d2 / "config.json"));

  json result = json::parse(slurp(d1 / "result.json"));
  CHECK(std::fabs(result["capacity"].get<double>() - 2.0) <= 0.04);
}

TEST_CASE("wiener runs write a report with a verdict and terms table") {
  json config{{"command", "wiener"},
              {"family", json{{"name", "deleted_radius"}}},
              {"n_min", 1},
              {"n_max", 4},
              {"resolution", 32.0}};
  fs::path d1 = fresh_dir("wie1");
  fs::path d2 = fresh_dir("wie2");
  REQUIRE(run_config(config, d1).exit_code == 0);
  REQUIRE(run_config(json::parse(slurp(d1 / "config.json")), d2).exit_code == 0);
  CHECK(slurp(d1 / "report.json") == slurp(d2 / "report.json"));
  CHECK(slurp(d1 / "terms.csv") == slurp(d2 / "terms.csv"));
  json report = json::parse(slurp(d1 / "report.json"));
  CHECK(report["verdict"] == "LogRegular");
  CHECK(report["shells"].size() == 4);
}

TEST_CASE("simulate runs are seed-deterministic") {
  json slit = geometry_to_json(
      [] {
        CompactSetSpec s;
        s.primitives.push_back(RadialSegment(2.0, 6.0, 0.0));
        return s;
      }(),
      2.0);
  json config{{"command", "simulate"}, {"geometry", slit},    {"n_paths", 200},
              {"seed", 7},             {"t_max", 10.0},       {"dump_paths", 2},
              {"start", json{{"t", 1.0}, {"theta", 3.0}}}};
  fs::path d1 = fresh_dir("sim1");
  fs::path d2 = fresh_dir("sim2");
  REQUIRE(run_config(config, d1).exit_code == 0);
  REQUIRE(run_config(json::parse(slurp(d1 / "config.json")), d2).exit_code == 0);
  CHECK(slurp(d1 / "stats.csv") == slurp(d2 / "stats.csv"));
  CHECK(slurp(d1 / "paths.csv") == slurp(d2 / "paths.csv"));
}

TEST_CASE("solve runs export solutions and gap tables") {
  json circle = geometry_to_json(
      [] {
        CompactSetSpec s;
        s.primitives.push_back(Arc(2.0, 0.0, kTwoPi));
        return s;
      }(),
      2.0);
  json config{{"command", "solve"},
              {"geometry", circle},
              {"truncations", {8.0, 16.0}},
              {"probes", json::array({json{{"t", 4.0}, {"theta", 1.0}}})}};
  fs::path d = fresh_dir("solve1");
  REQUIRE(run_config(config, d).exit_code == 0);
  CHECK(fs::exists(d / "solution_T8.csv"));
  CHECK(fs::exists(d / "solution_T16.csv"));
  json gaps = json::parse(slurp(d / "gaps.json"));
  REQUIRE(gaps["rows"].size() == 2);
  json measure = json::parse(slurp(d / "measure.json"));
  CHECK(measure["probes"].size() == 1);
}

TEST_CASE("runner reports input errors with exit code 2") {
  fs::path d = fresh_dir("err1");
  json bad{{"command", "capacity"}};  // geometry missing
  auto res = run_config(bad, d);
  CHECK(res.exit_code == 2);
  json unknown{{"command", "explode"}};
  CHECK(run_config(unknown, d).exit_code == 2);
}

#ifdef LOGCAP_CLI_PATH
TEST_CASE("command line: malformed input gives exit code 2, reruns are stable") {
  fs::path dir = fresh_dir("cli");
  fs::path badfile = dir / "bad.json";
  write_text_atomic(badfile, "{ not json");
  std::string cli = LOGCAP_CLI_PATH;
  int rc = std::system((cli + " capacity --geometry " + badfile.string() + " --out " +
                        (dir / "o").string() + " --quiet")
                           .c_str());
  CHECK(WEXITSTATUS(rc) == 2);

  int rc2 = std::system((cli + " family --name deleted_radius --n 1..3 --out " +
                         (dir / "fam").string() + " --quiet")
                            .c_str());
  CHECK(WEXITSTATUS(rc2) == 0);
  CHECK(fs::exists(dir / "fam" / "geometry.json"));

  int rc3 = std::system((cli + " rerun --config " + (dir / "fam" / "config.json").string() +
                         " --out " + (dir / "fam2").string() + " --quiet")
                            .c_str());
  CHECK(WEXITSTATUS(rc3) == 0);
  CHECK(slurp(dir / "fam" / "geometry.json") == slurp(dir / "fam2" / "geometry.json"));
}
#endif
