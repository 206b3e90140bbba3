#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "levyot/json_io.hpp"
#include "test_support.hpp"

using namespace levyot;
using levyot::testing::random_measure;
using levyot::testing::random_triplet;

namespace {

// All CLI scratch files live in one subdirectory of the test's working dir.
std::string scratch(const std::string& name) {
  const auto dir = std::filesystem::path("levyot_cli_scratch");
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

struct CliResult {
  int exit_code = -1;
  std::string stdout_text;
};

CliResult run_cli(const std::string& args) {
  const std::string out_file = scratch("stdout.tmp");
  const std::string cmd = std::string(LEVYOT_CLI_PATH) + " " + args + " > " + out_file +
                          " 2> " + scratch("stderr.tmp");
  const int raw = std::system(cmd.c_str());
  CliResult res;
  res.exit_code = WEXITSTATUS(raw);
  std::ifstream in(out_file);
  res.stdout_text.assign(std::istreambuf_iterator<char>(in),
                         std::istreambuf_iterator<char>());
  return res;
}

std::string write_tmp(const std::string& name, const std::string& content) {
  const std::string path = scratch(name);
  write_file(path, content);
  return path;
}

}  // namespace

TEST_CASE("triplet JSON round trip is exact") {
  CounterRng rng(227);
  for (int it = 0; it < 50; ++it) {
    const auto t = random_triplet(rng, 1 + static_cast<int>(rng.next_below(3)), 6);
    const auto back = parse_triplet(to_json(t));
    CHECK(back.drift == t.drift);
    CHECK(back.diffusion == t.diffusion);
    CHECK(lex_compare(back.jumps, t.jumps) == 0);
    CHECK(mean_vector(back) == mean_vector(t));
  }
}

TEST_CASE("measure and coupled-triplet JSON round trips") {
  CounterRng rng(229);
  const auto mu = random_measure(rng, 2, 8);
  CHECK(lex_compare(parse_measure(to_json(mu)), mu) == 0);

  const auto a = random_triplet(rng, 2, 4);
  const auto b = random_triplet(rng, 2, 4);
  const auto j = build_optimal_coupling(a, b);
  const auto back = parse_coupled_triplet(to_json(j));
  CHECK(back.drift == j.drift);
  CHECK(back.diffusion == j.diffusion);
  REQUIRE(back.jumps.size() == j.jumps.size());
  for (std::size_t i = 0; i < j.jumps.size(); ++i) {
    CHECK(back.jumps.atoms()[i].x == j.jumps.atoms()[i].x);
    CHECK(back.jumps.atoms()[i].y == j.jumps.atoms()[i].y);
    CHECK(back.jumps.atoms()[i].w == j.jumps.atoms()[i].w);
  }
}

TEST_CASE("parser diagnostics name the offending field") {
  CHECK_THROWS_WITH_AS(parse_measure(R"({"d":2,"atoms":[{"x":[1,0],"w":-1}]})"),
                       doctest::Contains("atoms[0].w"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_measure(R"({"d":2,"atoms":[{"x":[1],"w":1}]})"),
                       doctest::Contains("atoms[0].x"), ValidationError);
  CHECK_THROWS_AS(parse_triplet(R"({"d":2,"drift":[0,0],"jumps":[]})"), ValidationError);
  CHECK_THROWS_AS(parse_measure("{not json"), ValidationError);
  // Strict JSON has no NaN/Inf literals; they must be rejected, not absorbed.
  CHECK_THROWS_AS(parse_measure(R"({"d":1,"atoms":[{"x":[NaN],"w":1}]})"),
                  ValidationError);
}

TEST_CASE("kind detection") {
  CHECK(detect_kind(R"({"d":1,"drift":[0],"diffusion":[[1]],"jumps":[]})") ==
        InputKind::Triplet);
  CHECK(detect_kind(R"({"d":1,"atoms":[]})") == InputKind::Measure);
  CHECK(detect_kind(R"({"d":2,"drift":[0,0],"diffusion":[[1,0],[0,1]],"coupling":[]})") ==
        InputKind::CoupledTriplet);
  CHECK(detect_kind("[1,2]") == InputKind::Unknown);
}

TEST_CASE("cli: dist, couple, certify round trip") {
  CounterRng rng(233);
  const auto a = random_triplet(rng, 2, 4);
  const auto b = random_triplet(rng, 2, 4);
  const auto fa = write_tmp("cli_a.json", to_json(a));
  const auto fb = write_tmp("cli_b.json", to_json(b));

  SUBCASE("dist reports the decomposition") {
    const auto res = run_cli("dist --a " + fa + " --b " + fb);
    REQUIRE(res.exit_code == 0);
    const auto j = nlohmann::json::parse(res.stdout_text);
    const auto g = generator_distance(a, b);
    CHECK(j["total_sq"].get<double>() == g.total_sq);
    CHECK(j["total_sq"].get<double>() ==
          doctest::Approx(j["drift_sq"].get<double>() + j["diffusion_sq"].get<double>() +
                          j["jump_sq"].get<double>()));
  }

  SUBCASE("couple then certify --coupled passes") {
    const std::string fj = scratch("coupled.json");
    const auto res = run_cli("couple --a " + fa + " --b " + fb + " --out " + fj);
    REQUIRE(res.exit_code == 0);
    const auto cert = run_cli("certify --a " + fa + " --b " + fb + " --coupled " + fj);
    CHECK(cert.exit_code == 0);
    const auto cj = nlohmann::json::parse(cert.stdout_text);
    CHECK(cj["pass"].get<bool>());
  }

  SUBCASE("certify alone passes on solver output") {
    const auto cert = run_cli("certify --a " + fa + " --b " + fb);
    CHECK(cert.exit_code == 0);
  }

  SUBCASE("byte-identical outputs for identical inputs") {
    const auto r1 = run_cli("dist --a " + fa + " --b " + fb);
    const auto r2 = run_cli("dist --a " + fa + " --b " + fb);
    CHECK(r1.stdout_text == r2.stdout_text);
  }
}

TEST_CASE("cli: pure-jump inputs, classical, converge, simulate") {
  CounterRng rng(239);
  const auto mu = random_measure(rng, 2, 5);
  auto nu = random_measure(rng, 2, 5);
  const auto fmu = write_tmp("cli_mu.json", to_json(mu));
  const auto fnu = write_tmp("cli_nu.json", to_json(nu));

  SUBCASE("dist on measures reports the jump distance only") {
    const auto res = run_cli("dist --a " + fmu + " --b " + fnu);
    REQUIRE(res.exit_code == 0);
    const auto j = nlohmann::json::parse(res.stdout_text);
    CHECK(j.contains("jump_sq"));
    CHECK_FALSE(j.contains("drift_sq"));
    CHECK(j["jump_sq"].get<double>() == levy_ot_solve(mu, nu).cost);
  }

  SUBCASE("couple on measures emits a transport solution") {
    const auto res = run_cli("couple --a " + fmu + " --b " + fnu);
    REQUIRE(res.exit_code == 0);
    const auto j = nlohmann::json::parse(res.stdout_text);
    CHECK(j.contains("cost"));
    CHECK(j.contains("plan"));
    CHECK(j.contains("phi"));
    CHECK(j.contains("psi"));
    CHECK(j.contains("gap"));
    CHECK(j["monotone"].get<bool>());
  }

  SUBCASE("classical requires equal masses, then solves") {
    const auto bad = run_cli("classical --a " + fmu + " --b " + fnu);
    const auto nu_eq = nu.scaled(mu.total_mass() / nu.total_mass());
    const auto fnu_eq = write_tmp("cli_nu_eq.json", to_json(nu_eq));
    const auto good = run_cli("classical --a " + fmu + " --b " + fnu_eq);
    CHECK(bad.exit_code == 1);
    REQUIRE(good.exit_code == 0);
    const auto j = nlohmann::json::parse(good.stdout_text);
    CHECK(j["cost"].get<double>() >= levy_ot_solve(mu, nu_eq).cost - 1e-9);
  }

  SUBCASE("converge emits one row per sequence element") {
    std::vector<std::string> files;
    for (int n = 1; n <= 3; ++n) {
      const auto t = truncate_measure(mu, 1.0 / n, 0.0);
      files.push_back(write_tmp("cli_seq" + std::to_string(n) + ".json",
                                to_json(t.measure)));
    }
    const auto res = run_cli("converge --target " + fmu + " " + files[0] + " " +
                             files[1] + " " + files[2] + " --format csv");
    REQUIRE(res.exit_code == 0);
    CHECK(res.stdout_text.find("n,w_lambda") != std::string::npos);
    CHECK(res.stdout_text.find("co_trending") != std::string::npos);
  }

  SUBCASE("simulate emits the CSV schema and is seed-deterministic") {
    const auto r1 = run_cli("simulate --a " + fmu + " --b " + fnu +
                            " --t 0.5,1 --paths 200 --seed 9");
    REQUIRE(r1.exit_code == 0);
    CHECK(r1.stdout_text.rfind("t,estimate,std_error,predicted,bound", 0) == 0);
    const auto r2 = run_cli("simulate --a " + fmu + " --b " + fnu +
                            " --t 0.5,1 --paths 200 --seed 9");
    CHECK(r1.stdout_text == r2.stdout_text);
  }

  SUBCASE("simulate --sup and --path-csv") {
    const std::string fpath = scratch("path.csv");
    const auto r = run_cli("simulate --a " + fmu + " --b " + fnu +
                           " --t 1 --paths 200 --sup --seed 3 --T 1 --path-csv " + fpath);
    REQUIRE(r.exit_code == 0);
    CHECK(r.stdout_text.rfind("t,estimate,std_error,predicted,bound", 0) == 0);
    std::ifstream path_file(fpath);
    std::string header;
    std::getline(path_file, header);
    CHECK(header == "t,z0,z1,z2,z3");
  }
}

TEST_CASE("cli error paths: bad files exit 1") {
  const auto fbad = write_tmp("bad.json", "{broken");
  const auto res = run_cli("dist --a " + fbad + " --b " + fbad);
  CHECK(res.exit_code == 1);
  const auto res2 = run_cli("dist --a " + scratch("missing.json") + " --b " + fbad);
  CHECK(res2.exit_code == 1);
}
