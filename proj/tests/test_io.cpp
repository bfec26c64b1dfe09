#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "detloop/errors.hpp"
#include "detloop/io.hpp"
#include "detloop/quantum.hpp"

using namespace detloop;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / ("detloop_test_io_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run(const std::string& args) {
  const std::string cmd = std::string(DETLOOP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("io: behavior and inequality round trip") {
  const auto st = tsirelson_ch_settings();
  const auto p = quantum_behavior(maximally_entangled_state(), st.a, st.b);
  const auto back = io::behavior_from_json(nlohmann::json::parse(io::to_json(p).dump()));
  CHECK(back.scenario() == p.scenario());
  for (std::size_t l = 0; l < p.values().size(); ++l) CHECK(back.values()[l] == p.values()[l]);

  const auto i = builtin_i6522();
  const auto ib = io::inequality_from_json(io::to_json(i));
  for (std::size_t l = 0; l < i.coefficients().size(); ++l) CHECK(ib.coefficients()[l] == i.coefficients()[l]);
}

TEST_CASE("io: counts round trip") {
  const auto st = tsirelson_ch_settings();
  const auto c = sample_counts(quantum_behavior(maximally_entangled_state(), st.a, st.b), 500, 3);
  const auto back = io::counts_from_json(io::to_json(c));
  CHECK(back.nA == c.nA);
  CHECK(back.nB == c.nB);
  CHECK(back.nAB == c.nAB);
  CHECK(back.trialsPerContext == c.trialsPerContext);
}

TEST_CASE("io: malformed documents") {
  const fs::path dir = scratch_dir();
  write_file(dir / "nan.json", R"({"n":1,"m":1,"pA":[NaN],"pB":[0.1],"pAB":[[0.1]]})");
  CHECK_THROWS_AS(io::read_behavior(dir / "nan.json"), FormatError);
  write_file(dir / "short.json", R"({"n":2,"m":1,"pA":[0.1],"pB":[0.1],"pAB":[[0.1],[0.1]]})");
  CHECK_THROWS_AS(io::read_behavior(dir / "short.json"), FormatError);
  write_file(dir / "str.json", R"({"n":1,"m":1,"hA":["x"],"hB":[0],"hAB":[[1]]})");
  CHECK_THROWS_AS(io::read_inequality(dir / "str.json"), FormatError);
  write_file(dir / "frac.json", R"({"n":1,"m":1,"nA":[1.5],"nB":[1],"nAB":[[1]],"trialsPerContext":10})");
  CHECK_THROWS_AS(io::read_counts(dir / "frac.json"), FormatError);
  write_file(dir / "over.json", R"({"n":1,"m":1,"nA":[11],"nB":[1],"nAB":[[1]],"trialsPerContext":10})");
  CHECK_THROWS_AS(io::read_counts(dir / "over.json"), FormatError);
  CHECK_THROWS_AS(io::read_behavior(dir / "missing.json"), FormatError);
  fs::remove_all(dir);
}

TEST_CASE("io: atomic writes and curve CSV") {
  const fs::path dir = scratch_dir();
  io::write_text_atomic(dir / "a.txt", "first");
  io::write_text_atomic(dir / "a.txt", "second");
  CHECK(read_file(dir / "a.txt") == "second");
  int files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  CHECK(files == 1);
  const std::vector<CurvePoint> curve = {{0.8, 0.9, 0.1}, {0.9, std::nullopt, 0.1}};
  CHECK(io::curve_csv(curve) == "known_eta,bound,q\n0.800000,0.900000,0.100000\n");
  fs::remove_all(dir);
}

TEST_CASE("cli: exit codes") {
  const fs::path dir = scratch_dir();
  const auto pr = BehaviorVector::from_parts({0.5, 0.5}, {0.5, 0.5}, {{0.5, 0.5}, {0.5, 0.0}});
  io::write_json(dir / "pr.json", io::to_json(pr));
  io::write_json(dir / "v.json", io::to_json(vertex(Scenario(2, 2), 6)));
  write_file(dir / "bad.json", "{");

  CHECK(run("find-inequality --behavior " + (dir / "pr.json").string() + " --out " + (dir / "h.json").string()) == 0);
  const auto h = io::read_inequality(dir / "h.json");
  CHECK(evaluate_inequality(h, pr) > 0.0);
  CHECK(run("find-inequality --behavior " + (dir / "v.json").string()) == 2);
  CHECK(run("find-inequality --behavior " + (dir / "bad.json").string()) == 1);
  CHECK(run("no-such-command") == 1);
  CHECK(run("eta-bound --ineq builtin:ch --model ns --out " + (dir / "b.json").string()) == 0);
  const auto b = io::read_json(dir / "b.json");
  CHECK(b.at("etaLower").get<double>() == doctest::Approx(2.0 / 3.0).epsilon(2e-3));
  CHECK(b.at("modelClass").get<std::string>() == "nonsignalling");
  CHECK(run("eta-bound --ineq builtin:ch --model ns --q 0.9") == 2);
  CHECK(run("eta-curve --ineq builtin:ch --model ns --q 0.05 --from 0.8 --to 1 --points 3 --out " +
            (dir / "c.csv").string()) == 0);
  CHECK(read_file(dir / "c.csv").rfind("known_eta,bound,q\n", 0) == 0);
  CHECK(run("npa-check --behavior " + (dir / "pr.json").string() + " --level 1 --out " + (dir / "k.json").string()) == 2);
  CHECK(io::read_json(dir / "k.json").at("status").get<std::string>() == "Infeasible");
  CHECK(run("simulate --n 2 --m 2 --trials 100 --eta 0.9 --seed 4 --out " + (dir / "s.json").string()) == 0);
  CHECK_NOTHROW(io::read_counts(dir / "s.json"));
  fs::remove_all(dir);
}
