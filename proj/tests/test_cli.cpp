#include "cli.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "dplane");
  std::vector<const char*> argv;
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  std::ostringstream out;
  std::ostringstream err;
  const int code = dplane::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "dplane_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string write_file(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("help and unknown flags") {
  CHECK(run({"--help"}).code == 0);
  for (const char* sub : {"constants", "sample", "forward", "backproject", "symbol-estimate", "reconstruct"}) {
    CHECK(run({sub, "--help"}).code == 0);
  }
  CHECK(run({"constants", "--bogus"}).code != 0);
  CHECK(run({}).code != 0);
}

TEST_CASE("constants table") {
  const Result one = run({"constants", "--d", "1", "--n", "2"});
  CHECK(one.code == 0);
  CHECK(count_lines(one.out) == 2);
  CHECK(one.out.find("1,2,6.283185307179586") != std::string::npos);

  const Result two = run({"constants", "--d", "1..2", "--n", "3"});
  CHECK(count_lines(two.out) == 3);

  const Result none = run({"constants", "--d", "3..2", "--n", "4"});
  CHECK(none.code == 0);
  CHECK(count_lines(none.out) == 1);

  CHECK(run({"constants", "--d", "1..x"}).code == 1);
  CHECK(run({"constants", "--n", "1..70"}).code == 1);
}

TEST_CASE("forward") {
  const std::string ph = write_file("unit.txt", "gaussian 1 0 0 1\n");
  const std::string planes = write_file("planes.txt", "1 0 0 0\n");
  const Result r = run({"forward", "--phantom", ph, "--d", "1", "--planes", planes});
  CHECK(r.code == 0);
  CHECK(r.out == "plane,w1_1,w1_2,o1,o2,value\n0,1,0,0,0,2.5066282746310002\n");

  const std::string empty = write_file("empty.txt", "# nothing\n");
  const Result e = run({"forward", "--phantom", ph, "--d", "1", "--planes", empty});
  CHECK(e.code == 0);
  CHECK(e.out == "plane,w1_1,w1_2,o1,o2,value\n");

  const Result grid = run({"forward", "--phantom", ph, "--d", "1", "--angles", "4", "--offsets", "3",
                           "--offset-max", "1"});
  CHECK(count_lines(grid.out) == 13);

  const Result rnd = run({"--seed", "4", "forward", "--phantom", ph, "--d", "1", "--random", "5", "--offset-max", "2"});
  CHECK(count_lines(rnd.out) == 6);

  const std::string bad = write_file("bad.txt", "gaussian 1 0 0 1\ngaussian 1 0\n");
  const Result b = run({"forward", "--phantom", bad, "--d", "1", "--planes", planes});
  CHECK(b.code != 0);
  CHECK(b.err.find("line 2") != std::string::npos);

  CHECK(run({"forward", "--phantom", (scratch() / "missing.txt").string(), "--d", "1", "--planes", planes}).code != 0);
  CHECK(run({"forward", "--phantom", ph, "--d", "2", "--planes", planes}).code == 1);
}

TEST_CASE("backproject and sample") {
  const std::string pts = write_file("pts.txt", "0 0\n1 0\n");
  const Result c = run({"backproject", "--d", "1", "--n", "2", "--constant", "1", "--points", pts});
  CHECK(c.code == 0);
  CHECK(c.out.find("0,0,6.2831853071795862,0,") != std::string::npos);

  const std::string ph = write_file("unit.txt", "gaussian 1 0 0 1\n");
  const Result a = run({"--threads", "1", "backproject", "--d", "1", "--phantom", ph, "--points", pts, "--samples", "5000"});
  const Result b = run({"--threads", "3", "backproject", "--d", "1", "--phantom", ph, "--points", pts, "--samples", "5000"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(run({"backproject", "--d", "1", "--phantom", ph, "--points", pts, "--samples", "1"}).code == 1);

  const Result s1 = run({"--seed", "9", "sample", "--d", "2", "--n", "4", "--count", "3"});
  const Result s2 = run({"sample", "--d", "2", "--n", "4", "--count", "3", "--seed", "9"});
  CHECK(s1.code == 0);
  CHECK(s1.out == s2.out);
  CHECK(count_lines(s1.out) == 4);
  CHECK(run({"sample", "--d", "4", "--n", "4"}).code == 1);
  CHECK(run({"sample", "--d", "1", "--n", "17"}).code == 1);
}

TEST_CASE("symbol-estimate and reconstruct") {
  const std::string csv1 = (scratch() / "sym1.csv").string();
  const std::string csv2 = (scratch() / "sym2.csv").string();
  const std::vector<std::string> args = {"symbol-estimate", "--d", "1", "--n", "2", "--size", "32", "--spacing",
                                         "0.5", "--samples", "400", "--batches", "4"};
  auto with = [&](const std::string& csv) {
    auto a = args;
    a.insert(a.end(), {"--csv", csv});
    return run(a);
  };
  const Result r1 = with(csv1);
  const Result r2 = with(csv2);
  CHECK((r1.code == 0 || r1.code == dplane::cli::kExitTolerance));
  CHECK(r1.out.find("kappa_paper") != std::string::npos);
  CHECK(slurp(csv1) == slurp(csv2));
  CHECK(r1.out == r2.out);

  const std::string ph = write_file("unit.txt", "gaussian 1 0 0 1\n");
  const std::string f1 = (scratch() / "rec1.dplf").string();
  const std::string p1 = (scratch() / "rec1.pgm").string();
  const Result rec = run({"reconstruct", "--phantom", ph, "--d", "1", "--size", "32", "--spacing", "0.5",
                          "--samples", "32", "--batches", "2", "-o", f1, "--pgm", p1});
  CHECK(rec.code == 0);
  CHECK(rec.out.find("relative_l2_error,") != std::string::npos);
  CHECK(slurp(f1).substr(0, 4) == "DPLF");
  CHECK(slurp(p1).substr(0, 2) == "P5");
  CHECK(run({"reconstruct", "--phantom", ph, "--d", "1", "--mode", "weird"}).code == 1);
}
