#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <regex>
#include <set>
#include <sstream>
#include <string>

#include "awvd/diagram.hpp"
#include "awvd/io.hpp"

using namespace awvd;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

class Workdir {
 public:
  Workdir() {
    dir_ = fs::temp_directory_path() / ("awvd_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  ~Workdir() { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  Run run(const std::string& args, const std::string& env = "") const {
    const std::string out = path("stdout.txt"), err = path("stderr.txt");
    const std::string cmd = env + " " + AWVD_CLI_PATH + " " + args + " > " + out + " 2> " + err;
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(out);
    r.err = read_file(err);
    return r;
  }

 private:
  fs::path dir_;
};

int count(const std::string& text, const std::string& what) {
  int n = 0;
  for (std::size_t p = text.find(what); p != std::string::npos; p = text.find(what, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("generate") {
  Workdir w;
  const Run a = w.run("generate --n 3 --d 2 --weights equal --seed 1");
  CHECK(a.code == 0);
  std::istringstream in(a.out);
  std::string header;
  std::getline(in, header);
  CHECK(header == "2 3");
  CHECK(count(a.out, "\n") == 4);
  CHECK(w.run("generate --n 3 --d 2 --weights equal --seed 1").out == a.out);
  CHECK(w.run("generate --n 0").code == 2);
  CHECK(w.run("generate --n 5 --d 7").code == 2);
  CHECK(w.run("generate --n 5 --weights gaussian").code == 2);
  CHECK(w.run("frobnicate").code == 2);
}

TEST_CASE("build, dump round trip and errors") {
  Workdir w;
  write_file(w.path("two.txt"), "2 2\n0 0 1\n1 0 3\n");
  const Run b = w.run("build --sites " + w.path("two.txt") + " --out " + w.path("two.awvd") +
                      " --stats " + w.path("two.json") + " --no-timing");
  REQUIRE(b.code == 0);
  const std::string dump = read_file(w.path("two.awvd"));
  CHECK(dump_diagram(load_diagram(dump)) == dump);
  CHECK(read_file(w.path("two.json")).find("\"n\": 2") != std::string::npos);

  CHECK(w.run("build --sites " + w.path("two.txt") + " --eps 2").code == 2);
  CHECK(w.run("build --sites " + w.path("missing.txt")).code == 2);
  write_file(w.path("bad.txt"), "2 2\n0 0 1\n1 0\n");
  CHECK(w.run("build --sites " + w.path("bad.txt")).code == 2);
  write_file(w.path("neg.txt"), "2 1\n0 0 -1\n");
  CHECK(w.run("build --sites " + w.path("neg.txt")).code == 2);

  const Run deep = w.run("build --sites " + w.path("two.txt") + " --eps 0.1 --frac-bits 4");
  CHECK(deep.code == 3);
  CHECK(deep.err.find("--frac-bits") != std::string::npos);

  // Thread count, by flag or environment, does not change the dump.
  const Run t2 = w.run("build --sites " + w.path("two.txt") + " --threads 2 --no-timing");
  const Run te = w.run("build --sites " + w.path("two.txt") + " --no-timing", "AWVD_THREADS=3");
  CHECK(t2.out == dump);
  CHECK(te.out == dump);

  REQUIRE(w.run("build --sites " + w.path("two.txt") + " --covers " + w.path("covers.txt")).code == 0);
  CHECK(read_file(w.path("covers.txt")) == "1: 2\n2:\n");
}

TEST_CASE("query") {
  Workdir w;
  REQUIRE(w.run("generate --n 20 --d 2 --seed 4 --out " + w.path("s.txt")).code == 0);
  REQUIRE(w.run("build --sites " + w.path("s.txt") + " --out " + w.path("d.awvd") + " --stats " +
                w.path("st.json")).code == 0);
  const Diagram d = load_diagram(read_file(w.path("d.awvd")));

  // A site location answers with that site at ratio 1; a far point answers n.
  const Point site = d.sites[7].coords;
  std::ostringstream pts;
  pts.precision(17);
  pts << site[0] << ' ' << site[1] << "\n1e6 -1e6\n";
  write_file(w.path("p.txt"), pts.str());
  const Run q = w.run("query --diagram " + w.path("d.awvd") + " --points " + w.path("p.txt") + " --check");
  REQUIRE(q.code == 0);
  std::istringstream lines(q.out);
  int label = 0, exact = 0;
  double dist = 0, exact_dist = 0, ratio = 0;
  lines >> label >> dist >> exact >> exact_dist >> ratio;
  CHECK(ratio == 1.0);
  CHECK(dist == 0.0);
  lines >> label;
  CHECK(label == 20);

  const Run r = w.run("query --diagram " + w.path("d.awvd") + " --random 10000 --seed 3 --check");
  REQUIRE(r.code == 0);
  std::smatch m;
  REQUIRE(std::regex_search(r.out, m, std::regex("max_ratio=([0-9.eE+-]+)")));
  CHECK(std::stod(m[1]) <= 1.25);
  CHECK(r.out.find("queries=10000") != std::string::npos);

  write_file(w.path("junk.txt"), "0.5 abc\n");
  CHECK(w.run("query --diagram " + w.path("d.awvd") + " --points " + w.path("junk.txt")).code == 2);
  write_file(w.path("odd.txt"), "0.5 0.5 0.5\n");
  CHECK(w.run("query --diagram " + w.path("d.awvd") + " --points " + w.path("odd.txt")).code == 2);
  CHECK(w.run("query --diagram " + w.path("s.txt")).code == 2);
}

TEST_CASE("render") {
  Workdir w;
  write_file(w.path("one.txt"), "2 1\n0.5 0.5 2\n");
  REQUIRE(w.run("build --sites " + w.path("one.txt") + " --out " + w.path("one.awvd") + " --stats " +
                w.path("x.json")).code == 0);
  const Run one = w.run("render --diagram " + w.path("one.awvd"));
  REQUIRE(one.code == 0);
  CHECK(count(one.out, "<rect") == 1);
  CHECK(count(one.out, "<circle") == 1);

  write_file(w.path("two.txt"), "2 2\n0 0 1\n1 1 2\n");
  REQUIRE(w.run("build --sites " + w.path("two.txt") + " --out " + w.path("two.awvd") + " --stats " +
                w.path("x.json")).code == 0);
  const Run a = w.run("render --diagram " + w.path("two.awvd"));
  const Run b = w.run("render --diagram " + w.path("two.awvd"));
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  std::set<std::string> fills;
  const std::regex fill("<rect[^>]*fill=\"([^\"]+)\"");
  for (auto it = std::sregex_iterator(a.out.begin(), a.out.end(), fill); it != std::sregex_iterator(); ++it)
    fills.insert((*it)[1]);
  CHECK(fills.size() == 2);
  CHECK(count(a.out, "<rect") > 10);

  REQUIRE(w.run("generate --n 5 --d 3 --out " + w.path("s3.txt")).code == 0);
  REQUIRE(w.run("build --sites " + w.path("s3.txt") + " --eps 0.5 --out " + w.path("s3.awvd") +
                " --stats " + w.path("x.json")).code == 0);
  CHECK(w.run("render --diagram " + w.path("s3.awvd")).code == 4);
}

TEST_CASE("validate") {
  Workdir w;
  REQUIRE(w.run("generate --n 50 --d 2 --seed 1 --out " + w.path("s.txt")).code == 0);
  const Run all = w.run("validate --sites " + w.path("s.txt") + " --suite all");
  CHECK(all.code == 0);
  CHECK(all.out.find("FAIL") == std::string::npos);
  CHECK(w.run("validate --sites " + w.path("s.txt") + " --suite sspd").code == 0);
  const Run fault = w.run("validate --sites " + w.path("s.txt") + " --suite e2e --fault skip-dedup");
  CHECK(fault.code == 1);
  CHECK(w.run("validate --sites " + w.path("s.txt") + " --suite everything").code == 2);
}
