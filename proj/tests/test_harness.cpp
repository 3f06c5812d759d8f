#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "scl/errors.hpp"
#include "scl/harness.hpp"

using namespace scl;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("scl-test-" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
};

ConfigMap tiny_scenario() {
  ConfigMap m;
  m["name"] = "tiny";
  m["grid.n"] = "64";
  m["time.T"] = "0.5";
  m["spec.g0"] = "const:1.0";
  m["spec.g0_hat"] = "const:1.0 + cos:1:0.02";
  m["spec.v0_hat"] = "sin:1:0.02";
  m["spec.theta"] = "sin:1:0.02";
  m["synthesis.N"] = "1";
  m["synthesis.eps"] = "0.1";
  m["synthesis.nodes"] = "512";
  m["nls.hbar"] = "0.25";
  return m;
}

}  // namespace

TEST_CASE("config parsing accepts comments and reports bad lines") {
  std::istringstream good("# header\n"
                          "grid.n = 64\n"
                          "\n"
                          "spec.g0 = const:1.0 # inline note\n");
  ConfigMap m = parse_config(good, "good.cfg");
  CHECK(get_int(m, "grid.n", 0) == 64);
  CHECK(get_string(m, "spec.g0", "") == "const:1.0");

  std::istringstream bad("grid.n = 64\nnot a pair\n");
  try {
    parse_config(bad, "bad.cfg");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bad.cfg:2") != std::string::npos);
  }
}

TEST_CASE("typed getters fall back and name parse failures") {
  ConfigMap m{{"a", "1.5"}, {"b", "oops"}, {"c", "2.5"}};
  CHECK(get_double(m, "a", 0.0) == Catch::Approx(1.5));
  CHECK(get_double(m, "missing", 3.0) == Catch::Approx(3.0));
  try {
    get_double(m, "b", 0.0);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("b") != std::string::npos);
  }
  CHECK_THROWS_AS(get_int(m, "c", 0), ConfigError);  // 2.5 is not an integer
  CHECK(has_key(m, "a"));
  CHECK_FALSE(has_key(m, "missing"));
}

TEST_CASE("field expressions cover constants and modes") {
  ConfigMap m;
  m["f"] = "const:0.5 + cos:2:0.25 + sin:1:-0.1";
  m["g"] = "sin:1:1e+2";
  m["z"] = "0";

  const int n = 64;
  PeriodicGrid grid(n);
  PeriodicField f = field_from_config(m, "f", n);
  for (int j = 0; j < n; ++j) {
    const double x = grid.x(j);
    CHECK(f[j] == Catch::Approx(0.5 + 0.25 * std::cos(2 * x) - 0.1 * std::sin(x)).margin(1e-14));
  }

  // '+' inside an exponent must not split the term
  PeriodicField g = field_from_config(m, "g", n);
  CHECK(linf_norm(g) == Catch::Approx(100.0).epsilon(1e-12));

  CHECK(linf_norm(field_from_config(m, "z", n)) == 0.0);
  CHECK(linf_norm(field_from_config(m, "absent", n)) == 0.0);

  ConfigMap bad;
  bad["f"] = "cos:2";
  try {
    field_from_config(bad, "f", n);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("f") != std::string::npos);
    CHECK(msg.find("cos:2") != std::string::npos);
  }
}

TEST_CASE("scenario loading applies defaults and derived fields") {
  Scenario sc = load_scenario(tiny_scenario());
  CHECK(sc.name == "tiny");
  CHECK(sc.grid_n() == 64);
  CHECK(sc.spec.T == Catch::Approx(0.5));
  CHECK(sc.spec.N == 1);
  CHECK(sc.hbar == Catch::Approx(0.25));

  // hats not given fall back to the initial data
  CHECK(linf_norm(sc.spec.g1_hat - sc.spec.g1) == 0.0);
  CHECK(linf_norm(sc.spec.v1_hat - sc.spec.v1) == 0.0);

  // A0 derives from the phase: A0 = -g0 d(theta)/dx
  PeriodicField expect = -1.0 * hadamard(sc.spec.g0, derivative(sc.theta));
  CHECK(linf_norm(sc.spec.A0 - expect) < 1e-12);

  ConfigMap bad = tiny_scenario();
  bad["grid.n"] = "48";
  CHECK_THROWS_AS(load_scenario(bad), ConfigError);
}

TEST_CASE("initial states are consistent across descriptions") {
  Scenario sc = load_scenario(tiny_scenario());
  WKBState w = wkb_initial_state(sc);
  LimitState l = limit_initial_state(sc);
  LimitObservables obs = wkb_to_limit(w);

  CHECK(linf_norm(obs.rho0 - l.rho0) < 1e-12);
  CHECK(linf_norm(obs.rho1 - l.rho1) < 1e-12);
  CHECK(linf_norm(obs.A - l.A) < 1e-10);

  const double hb = sc.hbar;
  GrenierState g = grenier_initial_state(sc, hb);
  ComplexField psi = nls_initial_psi(sc, hb);
  ComplexField rebuilt = grenier_wavefunction(g, hb);
  double m = 0.0;
  for (int j = 0; j < sc.grid_n(); ++j) m = std::max(m, std::abs(psi.v[j] - rebuilt.v[j]));
  CHECK(m < 1e-12);
}

TEST_CASE("hash and canonical text are stable") {
  CHECK(fnv1a("") == 14695981039346656037ULL);
  CHECK(fnv1a("abc") == 16654208175385433931ULL);
  CHECK(fnv1a("abc") != fnv1a("acb"));
  CHECK(short_hash("abc").size() == 8);

  ConfigMap m{{"b", "2"}, {"a", "1"}};
  CHECK(config_text(m) == "a = 1\nb = 2\n");
}

TEST_CASE("csv output quotes what needs quoting") {
  TempDir tmp;
  const fs::path p = tmp.path / "t.csv";
  {
    CsvWriter w(p, {"name", "value"});
    w.row({"plain", "1"});
    w.row({"with,comma", "2"});
    w.row({"with\"quote", "3"});
  }
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  CHECK(text.find("name,value\r\n") == 0);
  CHECK(text.find("\"with,comma\",2\r\n") != std::string::npos);
  CHECK(text.find("\"with\"\"quote\",3\r\n") != std::string::npos);
}

TEST_CASE("json report files round trip") {
  TempDir tmp;
  const fs::path p = tmp.path / "r.json";
  json j;
  j["x"] = 1.5;
  j["list"] = json::array({1, 2, 3});
  write_json(p, j);

  std::ifstream in(p);
  json back = json::parse(in);
  CHECK(back["x"] == j["x"]);
  CHECK(back["list"] == j["list"]);
}

TEST_CASE("scenario files load from disk") {
  TempDir tmp;
  const fs::path p = tmp.path / "s.cfg";
  {
    std::ofstream out(p);
    for (const auto& [k, v] : tiny_scenario()) out << k << " = " << v << "\n";
  }
  Scenario sc = load_scenario_file(p.string());
  CHECK(sc.name == "tiny");
  CHECK(sc.grid_n() == 64);
}

TEST_CASE("step convergence study shrinks toward the reference") {
  Scenario sc = load_scenario(tiny_scenario());
  ConvergenceTable t = convergence_study(sc, "dt", 2);
  REQUIRE(t.rows.size() == 5);
  for (const auto& r : t.rows) CHECK(r.value >= 0.0);
  CHECK(t.rows.back().value <= t.rows.front().value);

  CHECK_THROWS_AS(convergence_study(sc, "bogus", 1), ConfigError);

  TempDir tmp;
  write_convergence_csv(tmp.path / "c.csv", t);
  CHECK(fs::exists(tmp.path / "c.csv"));
}
