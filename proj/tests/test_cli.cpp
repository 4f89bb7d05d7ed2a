#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("softsim_cli_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int softsim(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + SOFTSIM_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

const char* kSmallConfig =
    "generation:\n  num_identities: 6\n  num_test_identities: 5\n"
    "hyperparams:\n  baseline_epochs: 3\n  num_iterations: 2\n"
    "run:\n  preset: full\n";

}  // namespace

TEST_CASE("cli end to end") {
  TempDir tmp;
  const fs::path cfg = tmp.path / "small.yaml";
  std::ofstream(cfg) << kSmallConfig;
  const fs::path log = tmp.path / "log.txt";
  const std::string c = "-c \"" + cfg.string() + "\"";

  REQUIRE(softsim("generate " + c + " -o \"" + (tmp.path / "ds.txt").string() + "\"", log) == 0);
  CHECK(slurp(tmp.path / "ds.txt").rfind("SOFTSIM-DS-1", 0) == 0);

  const fs::path run = tmp.path / "run";
  REQUIRE(softsim("train " + c + " -o \"" + run.string() + "\" -d \"" + (tmp.path / "ds.txt").string() + "\"", log) == 0);
  for (const char* f : {"resolved_config.yaml", "seed.txt", "metrics.csv", "metrics.yaml", "final.ckpt",
                        "checkpoints/iter_000.ckpt", "checkpoints/iter_002.ckpt"})
    CHECK_MESSAGE(fs::exists(run / f), f);
  CHECK(count_lines(run / "metrics.csv") == 4);

  // training from the generated file matches training from the config alone
  const fs::path run2 = tmp.path / "run2";
  REQUIRE(softsim("train " + c + " -o \"" + run2.string() + "\"", log) == 0);
  CHECK(slurp(run / "metrics.csv") == slurp(run2 / "metrics.csv"));

  const std::string ck = "--checkpoint \"" + (run / "final.ckpt").string() + "\" -d \"" + (tmp.path / "ds.txt").string() + "\"";
  REQUIRE(softsim("mine " + ck + " -o \"" + (tmp.path / "mine.csv").string() + "\"", log) == 0);
  // 6 identities x 8 images, k = 4 neighbors each, plus a header
  CHECK(count_lines(tmp.path / "mine.csv") == 6 * 8 * 4 + 1);
  CHECK(slurp(tmp.path / "mine.csv").rfind("anchor,rank,neighbor,D,d,d_part,cce", 0) == 0);

  REQUIRE(softsim("eval " + ck + " -o \"" + (tmp.path / "eval.csv").string() + "\" --detail \"" +
                      (tmp.path / "detail.csv").string() + "\"",
                  log) == 0);
  CHECK(count_lines(tmp.path / "eval.csv") == 2);
  CHECK(count_lines(tmp.path / "detail.csv") > 1);

  REQUIRE(softsim("sweep " + c + " --param k --values 0,1,2 -o \"" + (tmp.path / "sweep.csv").string() + "\"", log) == 0);
  CHECK(count_lines(tmp.path / "sweep.csv") == 4);
}

TEST_CASE("cli exit codes") {
  TempDir tmp;
  const fs::path log = tmp.path / "log.txt";
  const fs::path bad = tmp.path / "bad.yaml";
  std::ofstream(bad) << "hyperparams:\n  lambda: 1.5\n";

  CHECK(softsim("train -c \"" + bad.string() + "\" -o \"" + (tmp.path / "r").string() + "\"", log) == 2);
  CHECK(slurp(log).find("lambda") != std::string::npos);
  CHECK(softsim("frobnicate", log) == 2);
  CHECK(softsim("sweep --param tau --values 0.1 -o \"" + (tmp.path / "s.csv").string() + "\"", log) == 2);

  const fs::path junk = tmp.path / "junk.txt";
  std::ofstream(junk) << "not a dataset\n";
  CHECK(softsim("train -d \"" + junk.string() + "\" -o \"" + (tmp.path / "r").string() + "\"", log) == 3);
  CHECK(softsim("eval --checkpoint \"" + junk.string() + "\" -d \"" + junk.string() + "\" -o \"" +
                    (tmp.path / "e.csv").string() + "\"",
                log) == 3);
}
