#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "helpers.hpp"
#include "hclab/error.hpp"
#include "hclab/io.hpp"
#include "hclab/runner.hpp"

using namespace hclab;
namespace fs = std::filesystem;

namespace {

Json singleton_config() {
  return Json::parse(R"({"dimension":3,"lambda":0.5,"environment":{"law":"constant","value":1.0},
    "window":{"radius":1},"master_seed":7,
    "potential":{"A":{"type":"sites","sites":[[0,0,0]]},"B":{"type":"sites","sites":[[0,0,0]]},
                 "green":[[[0,0,0],[0,0,0]]]}})");
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "hclab_test_io" / name;
  fs::create_directories(p);
  return p;
}

int run_config(const std::string& sub, const Json& j, const std::string& name, std::string* log_text = nullptr) {
  const fs::path dir = scratch(name);
  write_file(dir / "config.json", j.dump());
  RunOptions o;
  o.config_path = dir / "config.json";
  o.out = dir / "out";
  std::ostringstream log;
  const int rc = run(sub, o, log);
  if (log_text) *log_text = log.str();
  return rc;
}

}  // namespace

TEST_CASE("hash known answers") {
  CHECK(sha1_hex("abc") == "a9993e364706816aba3e25717850c26c9cd0d89d");
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(6.0) == "6");
}

TEST_CASE("site set and field round trips") {
  const SiteSet s = testing::random_subset(Box::ball(Site{0, 0, 0}, 3), 0.4, 1);
  std::stringstream ss;
  write_site_set(ss, s, Json{{"note", "x"}});
  Json header;
  CHECK(read_site_set(ss, &header) == s);
  CHECK(header["note"] == "x");
  CHECK(header["count"] == s.size());

  StreamRng rng(2, 0);
  const Field f = Field::from_function(s, [&](const Site&) { return rng.normal(); });
  const Field g = decode_field(encode_field(f));
  CHECK(g.domain == f.domain);
  CHECK(g.values == f.values);
  std::string bytes = encode_field(f);
  bytes.pop_back();
  CHECK_THROWS_AS(decode_field(bytes), InvalidArgument);
}

TEST_CASE("environment binary round trip keeps keyed re-derivation") {
  const auto env = Conductances::sample(EnvironmentLaw::iid_two_point(0.5, 1.0, 0.3), 0.5, Box::ball(Site{0, 0, 0}, 2), 9);
  const Conductances back = decode_environment(encode_environment(env));
  CHECK(encode_environment(back) == encode_environment(env));
  CHECK(back.shift(Site{3, 0, 0}).weight(Site{0, 0, 0}, Site{1, 0, 0}) ==
        env.shift(Site{3, 0, 0}).weight(Site{0, 0, 0}, Site{1, 0, 0}));
  std::string bytes = encode_environment(env);
  CHECK_THROWS_AS(decode_environment(bytes + "x"), InvalidArgument);
  bytes[0] = 'X';
  CHECK_THROWS_AS(decode_environment(bytes), InvalidArgument);
  CHECK(environment_header(env)["d"] == 3);
}

TEST_CASE("CSV writer") {
  CsvWriter w({"a", "b"}, "h");
  w.row({"1", "2"});
  CHECK(w.str() == "# config_hash=h\na,b\n1,2\n");
  CHECK_THROWS(w.row({"1"}));
}

TEST_CASE("config parsing and validation") {
  const ExperimentConfig c = ExperimentConfig::parse(singleton_config());
  CHECK(c.dim == 3);
  CHECK(c.stage_seed("a") != c.stage_seed("b"));
  CHECK(c.hash() == ExperimentConfig::parse(Json::parse(singleton_config().dump())).hash());
  Json bad = singleton_config();
  bad["colour"] = 1;
  CHECK_THROWS_AS(ExperimentConfig::parse(bad), InvalidArgument);
  bad = singleton_config();
  bad["lambda"] = 1.0;
  CHECK_THROWS_AS(ExperimentConfig::parse(bad), InvalidArgument);
  bad = singleton_config();
  bad["dimension"] = 2;
  CHECK_THROWS_AS(ExperimentConfig::parse(bad), InvalidArgument);

  CHECK(validate_config(singleton_config()).empty());
  Json nest = singleton_config();
  nest["potential"]["A"] = Json::parse(R"({"type":"sites","sites":[[0,0,0],[1,0,0]]})");
  const auto diag = validate_config(nest);
  REQUIRE_FALSE(diag.empty());
  CHECK(diag.front().find("nesting") != std::string::npos);
}

TEST_CASE("potential pipeline: singleton capacity and byte reproducibility") {
  const ExperimentConfig c = ExperimentConfig::parse(singleton_config());
  const RunOutputs a = execute("potential", c);
  const RunOutputs b = execute("potential", c);
  CHECK(a.files == b.files);
  const std::string cap = a.files.at("capacity.csv");
  CHECK(cap.find("\n6,6,6,") != std::string::npos);

  Json e = singleton_config();
  e.erase("potential");
  const RunOutputs env = execute("env", ExperimentConfig::parse(e));
  const Conductances w = decode_environment(env.files.at("environment.bin"));
  w.for_each_edge([](const Site&, int, double v) {
    if (!std::isnan(v)) CHECK(v == 1.0);
  });
}

TEST_CASE("run exit codes") {
  std::string log;
  CHECK(run_config("potential", singleton_config(), "ok", &log) == kExitOk);
  CHECK(fs::exists(scratch("ok") / "out" / "manifest.json"));
  CHECK(fs::exists(scratch("ok") / "out" / "timing.csv"));

  Json bad = singleton_config();
  bad["colour"] = 1;
  CHECK(run_config("potential", bad, "schema") == kExitSchema);

  Json solver = singleton_config();
  solver["window"]["radius"] = 3;
  solver["potential"]["B"] = Json::parse(R"({"type":"box","radius":2})");
  solver["potential"].erase("green");
  solver["solver"] = Json::parse(R"({"force_iterative":true,"cg_max_iterations":1})");
  CHECK(run_config("potential", solver, "solver", &log) == kExitSolver);

  Json geom = singleton_config();
  geom["potential"]["B"] = Json::parse(R"({"type":"box","radius":3})");
  geom["potential"].erase("green");
  CHECK(run_config("potential", geom, "geometry") == kExitGeometry);

  CHECK(run_config("validate", bad, "validate", &log) == kExitOk);
  CHECK_FALSE(log.empty());
}
