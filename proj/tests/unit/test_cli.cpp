#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "ifsm/cli.hpp"
#include "ifsm/csv.hpp"
#include "ifsm/measure.hpp"
#include "json.hpp"

using namespace ifsm;
namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    std::random_device rd;
    dir = fs::temp_directory_path() / ("ifsm_cli_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  std::string operator()(const std::string& name) const { return (dir / name).string(); }
};

struct Result {
  int code;
  std::string out, err;
};

Result cli_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct Pgm {
  std::size_t width = 0, height = 0;
  std::vector<int> pixels;
  int at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
};

Pgm parse_pgm(const std::string& text) {
  std::istringstream in(text);
  std::string magic;
  int maxval = 0;
  Pgm p;
  in >> magic >> p.width >> p.height >> maxval;
  REQUIRE(magic == "P2");
  REQUIRE(maxval == 255);
  int v = 0;
  while (in >> v) p.pixels.push_back(v);
  REQUIRE(p.pixels.size() == p.width * p.height);
  return p;
}

nlohmann::json read_json(const std::string& path) { return nlohmann::json::parse(read_file(path)); }

}  // namespace

TEST_CASE("cli exit codes") {
  Scratch tmp;
  CHECK(cli_run({}).code == cli::kUsage);
  CHECK(cli_run({"attractor"}).code == cli::kUsage);  // --model is required
  CHECK(cli_run({"attractor", "--model", "builtin:cantor", "--bogus"}).code == cli::kUsage);
  CHECK(cli_run({"--version"}).code == cli::kOk);
  CHECK(cli_run({"--help"}).code == cli::kOk);

  const Result missing = cli_run({"check", "--model", tmp("nope.json"), "--out", tmp("m")});
  CHECK(missing.code == cli::kIoError);
  CHECK(missing.err.find("error:") != std::string::npos);

  write_file(tmp("bad.json"), R"({"domain": {"box": [[0, 1]]}})");
  CHECK(cli_run({"check", "--model", tmp("bad.json"), "--out", tmp("b")}).code == cli::kModelError);
  CHECK(cli_run({"check", "--model", "builtin:nope", "--out", tmp("b")}).code == cli::kModelError);

  const Result slow = cli_run({"invariant", "--model", "builtin:cantor", "--max-iter", "1", "--out", tmp("slow")});
  CHECK(slow.code == cli::kNotConverged);
  CHECK(fs::exists(tmp("slow.measure.csv")));  // outputs are still written
  CHECK(read_json(tmp("slow.manifest.json"))["exit_code"] == 2);

  CHECK(cli_run({"--replay"}).code == cli::kUsage);
  CHECK(cli_run({"--replay", tmp("none.manifest.json")}).code == cli::kIoError);
}

TEST_CASE("cli manifest") {
  Scratch tmp;
  const Result r = cli_run({"chaos", "--model", "builtin:mixture", "--steps", "2000", "--seed", "17", "--out", tmp("c")});
  REQUIRE(r.code == cli::kOk);
  const auto m = read_json(tmp("c.manifest.json"));
  CHECK(m["tool"] == "ifsm");
  CHECK(m["version"] == std::string(cli::kVersion));
  CHECK(m["subcommand"] == "chaos");
  CHECK(m["model"] == "builtin:mixture");
  CHECK(m["model_hash"].get<std::string>().size() == 16);
  CHECK(m["seed"] == 17);
  CHECK(m["resolution"] == 729);
  CHECK(m["rng"].get<std::string>().find("mt19937_64") != std::string::npos);
  CHECK(m["exit_code"] == 0);
  CHECK(m["argv"].size() == 9);
  const auto outputs = m["outputs"].get<std::vector<std::string>>();
  REQUIRE(outputs.size() == 2);
  for (const auto& p : outputs) CHECK(fs::exists(p));

  const auto traj = read_file(tmp("c.trajectory.csv"));
  CHECK(traj.rfind("x0,next_index\n", 0) == 0);
  CHECK(std::count(traj.begin(), traj.end(), '\n') == 2002);
  const DiscreteMeasure emp = measure_from_csv(read_file(tmp("c.empirical.csv")));
  CHECK(emp.size() > 1);
}

TEST_CASE("cli replay reproduces outputs") {
  Scratch tmp;
  REQUIRE(cli_run({"chaos", "--model", "builtin:sierpinski", "--steps", "5000", "--seed", "99", "--out", tmp("a")}).code ==
          cli::kOk);
  REQUIRE(cli_run({"--replay", tmp("a.manifest.json"), "--out", tmp("b")}).code == cli::kOk);
  CHECK(read_file(tmp("a.trajectory.csv")) == read_file(tmp("b.trajectory.csv")));
  CHECK(read_file(tmp("a.empirical.csv")) == read_file(tmp("b.empirical.csv")));

  REQUIRE(cli_run({"attractor", "--model", "builtin:cantor", "--resolution", "243", "--out", tmp("p")}).code == cli::kOk);
  REQUIRE(cli_run({"--replay", tmp("p.manifest.json"), "--out", tmp("q")}).code == cli::kOk);
  CHECK(read_file(tmp("p.cloud.csv")) == read_file(tmp("q.cloud.csv")));
  CHECK(read_file(tmp("p.log.json")) == read_file(tmp("q.log.json")));
}

TEST_CASE("cli distances") {
  Scratch tmp;
  write_file(tmp("mu.csv"), "x0,weight\n0,0.5\n1,0.5\n");
  write_file(tmp("nu.csv"), "x0,weight\n0.5,1\n");
  const Result w = cli_run({"wasserstein", "--mu", tmp("mu.csv"), "--nu", tmp("nu.csv"), "--out", tmp("w")});
  REQUIRE(w.code == cli::kOk);
  CHECK(w.out == "0.5\n");
  CHECK(read_json(tmp("w.result.json"))["wasserstein1"] == 0.5);

  write_file(tmp("a.csv"), "x0,x1\n0,0\n1,1\n");
  write_file(tmp("b.csv"), "x0,x1\n0,0\n");
  const Result e = cli_run({"hausdorff", "--a", tmp("a.csv"), "--b", tmp("b.csv"), "--out", tmp("h")});
  REQUIRE(e.code == cli::kOk);
  CHECK(std::abs(std::stod(e.out) - std::sqrt(2.0)) <= 1e-15);
  const Result mx =
      cli_run({"hausdorff", "--a", tmp("a.csv"), "--b", tmp("b.csv"), "--metric", "max_coord", "--out", tmp("h2")});
  CHECK(mx.out == "1\n");
  CHECK(cli_run({"hausdorff", "--a", tmp("a.csv"), "--b", tmp("b.csv"), "--metric", "taxicab", "--out", tmp("h3")})
            .code == cli::kModelError);
  write_file(tmp("bad.csv"), "x0,weight\n0,0.7\n");
  CHECK(cli_run({"wasserstein", "--mu", tmp("bad.csv"), "--nu", tmp("nu.csv"), "--out", tmp("w2")}).code ==
        cli::kModelError);
}

TEST_CASE("cli render") {
  Scratch tmp;
  write_file(tmp("delta.csv"), "x0,weight\n0,1\n");
  REQUIRE(cli_run({"render", "--input", tmp("delta.csv"), "--model", "builtin:cantor", "--width", "10", "--height", "3",
                   "--out", tmp("d")})
              .code == cli::kOk);
  const Pgm d = parse_pgm(read_file(tmp("d.pgm")));
  CHECK(d.width == 10);
  CHECK(d.height == 3);
  for (std::size_t row = 0; row < 3; ++row)
    for (std::size_t col = 0; col < 10; ++col) CHECK(d.at(row, col) == (col == 0 ? 255 : 0));

  std::string uniform = "x0,weight\n";
  for (int k = 0; k < 10; ++k) uniform += format_double((k + 0.5) / 10.0) + ",0.1\n";
  write_file(tmp("u.csv"), uniform);
  REQUIRE(cli_run({"render", "--input", tmp("u.csv"), "--model", "builtin:cantor", "--width", "10", "--height", "1",
                   "--out", tmp("u")})
              .code == cli::kOk);
  const Pgm u = parse_pgm(read_file(tmp("u.pgm")));
  for (int v : u.pixels) CHECK(v == 255);

  REQUIRE(cli_run({"attractor", "--model", "builtin:sierpinski", "--resolution", "128", "--out", tmp("s")}).code ==
          cli::kOk);
  for (const char* o : {"r1", "r2"})
    REQUIRE(cli_run({"render", "--input", tmp("s.cloud.csv"), "--model", "builtin:sierpinski", "--width", "64", "--height",
                     "64", "--out", tmp(o)})
                .code == cli::kOk);
  const std::string r1 = read_file(tmp("r1.pgm"));
  CHECK(r1 == read_file(tmp("r2.pgm")));
  const Pgm s = parse_pgm(r1);
  // the top corner of the triangle is lit, the top-left and top-right corners are not
  CHECK(s.at(0, 32) == 255);
  CHECK(s.at(0, 0) == 0);
  CHECK(s.at(0, 63) == 0);
  CHECK(s.at(63, 0) == 255);

  write_file(tmp("three.csv"), "x0,x1,x2\n0,0,0\n1,1,1\n");
  CHECK(cli_run({"render", "--input", tmp("three.csv"), "--out", tmp("t")}).code == cli::kModelError);
  CHECK(cli_run({"render", "--input", tmp("u.csv"), "--kind", "heat", "--out", tmp("k")}).code == cli::kModelError);
}

TEST_CASE("cli csv outputs round-trip") {
  Scratch tmp;
  REQUIRE(cli_run({"invariant", "--model", "builtin:mixture", "--resolution", "81", "--out", tmp("i")}).code == cli::kOk);
  const std::string text = read_file(tmp("i.measure.csv"));
  const DiscreteMeasure mu = measure_from_csv(text);
  CHECK(measure_to_csv(mu) == text);
  const auto log = read_json(tmp("i.log.json"));
  CHECK(log["converged"] == true);
  CHECK(log["atoms"] == mu.size());
  CHECK(std::abs(log["contraction"].get<double>() - (1.0 / 3.0 + 0.4)) <= 1e-12);

  // a saved measure can seed another run
  REQUIRE(cli_run({"invariant", "--model", "builtin:mixture", "--resolution", "81", "--init", tmp("i.measure.csv"),
                   "--out", tmp("j")})
              .code == cli::kOk);
  CHECK(read_json(tmp("j.log.json"))["iterations"].get<int>() <= 2);

  REQUIRE(cli_run({"check", "--model", "builtin:gifs_skew", "--samples", "400", "--out", tmp("g")}).code == cli::kOk);
  const auto check = read_json(tmp("g.check.json"));
  CHECK(check["s_source"] == "CP1");
  CHECK(check["lip_one_step"]["provenance"] == "analytic");
  CHECK(check["conditions"].size() == 10);
}
