#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("vitalcast_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
  }

  Outcome run(const std::string& args, const std::string& env = "") const {
    const auto out = dir_ / "stdout.txt";
    const auto err = dir_ / "stderr.txt";
    const std::string cmd = "cd '" + dir_.string() + "' && " + env + " '" VITALCAST_CLI "' " +
                            args + " >'" + out.string() + "' 2>'" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  }

  fs::path dir_;
};

constexpr const char* kTinyConfig =
    "data.source = synthetic\ndata.patients = 20\nmodel = nbeats\nmodel.width = 16\n"
    "model.theta = 4\ntrain.batch_size = 8\ntrain.max_epochs = 3\n";

TEST_F(Cli, MissingDataFileExitsTwoNamingPath) {
  write("c.cfg", "data.source = csv\ndata.vitals = gone.csv\ndata.diagnoses = dx.csv\n");
  const auto r = run("train --config c.cfg --out o");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("gone.csv"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / "o"));
}

TEST_F(Cli, InvalidConfigExitsTwoNamingField) {
  write("c.cfg", "model = nbeats\ntrain.batch_size = lots\n");
  const auto r = run("train --config c.cfg --out o");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("train.batch_size"), std::string::npos) << r.err;
  EXPECT_EQ(run("frobnicate").code, 2);
}

TEST_F(Cli, PersistenceEvaluateNeedsNoCheckpointAndIsStable) {
  const auto a = run("evaluate --model persistence", "VITALCAST_OUT_DIR=env_out");
  ASSERT_EQ(a.code, 0) << a.err;
  const auto curve = slurp(dir_ / "env_out" / "horizon_curve.csv");
  EXPECT_EQ(std::count(curve.begin(), curve.end(), '\n'), 1 + 36);
  const auto metrics = slurp(dir_ / "env_out" / "metrics.json");
  ASSERT_EQ(run("evaluate --model persistence --out again").code, 0);
  EXPECT_EQ(slurp(dir_ / "again" / "metrics.json"), metrics);
  EXPECT_EQ(slurp(dir_ / "again" / "horizon_curve.csv"), curve);
  EXPECT_EQ(run("evaluate --model nhits --out x").code, 2);
}

TEST_F(Cli, TrainIsReproducibleAndEvaluateChecksConfig) {
  write("c.cfg", kTinyConfig);
  ASSERT_EQ(run("train --config c.cfg --out a").code, 0);
  ASSERT_EQ(run("train --config c.cfg --out b").code, 0);
  EXPECT_EQ(slurp(dir_ / "a" / "model.ckpt"), slurp(dir_ / "b" / "model.ckpt"));
  EXPECT_EQ(slurp(dir_ / "a" / "train_log.csv"), slurp(dir_ / "b" / "train_log.csv"));

  const auto e1 = run("evaluate --checkpoint a/model.ckpt --config c.cfg --out e1");
  ASSERT_EQ(e1.code, 0) << e1.err;
  ASSERT_EQ(run("evaluate --checkpoint b/model.ckpt --config c.cfg --out e2").code, 0);
  for (const char* f : {"metrics.json", "horizon_curve.csv", "results_table.txt", "crossover.txt"}) {
    EXPECT_EQ(slurp(dir_ / "e1" / f), slurp(dir_ / "e2" / f)) << f;
  }
  const auto curve = slurp(dir_ / "e1" / "horizon_curve.csv");
  EXPECT_EQ(std::count(curve.begin(), curve.end(), '\n'), 1 + 2 * 36);

  write("wide.cfg", std::string(kTinyConfig) + "covariates = true\n");
  const auto bad = run("evaluate --checkpoint a/model.ckpt --config wide.cfg --out e3");
  EXPECT_EQ(bad.code, 3);
  EXPECT_NE(bad.err.find("covariates"), std::string::npos) << bad.err;
  EXPECT_EQ(run("evaluate --checkpoint a/model.ckpt --model tft --out e4").code, 3);

  // Tampered tensor shapes.
  auto text = slurp(dir_ / "a" / "model.ckpt");
  text.replace(text.find("model.width = 16"), 16, "model.width = 17");
  write("bad.ckpt", text);
  EXPECT_EQ(run("evaluate --checkpoint bad.ckpt --out e5").code, 3);

  const auto table = run("table e1/metrics.json");
  EXPECT_EQ(table.code, 0);
  EXPECT_NE(table.out.find("N-BEATS"), std::string::npos);
}

std::string window_csv(std::size_t rows) {
  std::string out = "step,hr,mbp,rr\n";
  for (std::size_t t = 0; t < rows; ++t) {
    out += std::to_string(t) + "," + std::to_string(80 + t % 7) + "," +
           std::to_string(70.5 + 0.1 * static_cast<double>(t)) + ",18\n";
  }
  return out;
}

TEST_F(Cli, PersistenceForecast) {
  write("w.csv", window_csv(80));
  const auto r = run("forecast --model persistence --input w.csv --target mbp");
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "step,minutes_ahead,value");
  const double last = 70.5 + 0.1 * 79;
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    int step = 0, minutes = 0;
    double value = 0;
    ASSERT_EQ(std::sscanf(line.c_str(), "%d,%d,%lf", &step, &minutes, &value), 3) << line;
    EXPECT_EQ(step, rows);
    EXPECT_EQ(minutes, 5 * rows);
    EXPECT_NEAR(value, last, 1e-9);
  }
  EXPECT_EQ(rows, 36);

  write("short.csv", window_csv(71));
  const auto s = run("forecast --model persistence --input short.csv --target hr");
  EXPECT_EQ(s.code, 2);
  EXPECT_NE(s.err.find("72"), std::string::npos) << s.err;
  EXPECT_EQ(run("forecast --model persistence --input w.csv --target rr").code, 2);
}

TEST_F(Cli, ForecastFromCheckpoint) {
  write("c.cfg", std::string(kTinyConfig) + "covariates = true\ntarget = hr\n");
  ASSERT_EQ(run("train --config c.cfg --out a").code, 0);
  write("w.csv", window_csv(72));
  const auto r = run("forecast --checkpoint a/model.ckpt --input w.csv --target hr --out f.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto f = slurp(dir_ / "f.csv");
  EXPECT_EQ(std::count(f.begin(), f.end(), '\n'), 37);
  EXPECT_EQ(run("forecast --checkpoint a/model.ckpt --input w.csv --target mbp").code, 3);
  std::string hr_only = "hr\n";
  for (int t = 0; t < 72; ++t) hr_only += "80\n";
  write("hr_only.csv", hr_only);
  EXPECT_EQ(run("forecast --checkpoint a/model.ckpt --input hr_only.csv --target hr").code, 2);
}

TEST_F(Cli, SynthThenTrainFromCsv) {
  ASSERT_EQ(run("synth --patients 12 --seed 3 --out data").code, 0);
  EXPECT_EQ(slurp(dir_ / "data" / "vitals.csv").rfind("patient_id,offset_min,hr,sbp,dbp,rr\n", 0), 0u);
  write("c.cfg",
        "data.source = csv\ndata.vitals = data/vitals.csv\ndata.diagnoses = data/diagnoses.csv\n"
        "model = nhits\nmodel.width = 8\nmodel.theta = 4\ntrain.max_epochs = 2\n");
  const auto r = run("train --config c.cfg --out t");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "t" / "model.ckpt"));
  EXPECT_TRUE(fs::exists(dir_ / "t" / "exclusions.log"));
}

TEST_F(Cli, DivergenceExitsFourWithoutCheckpoint) {
  write("c.cfg", std::string(kTinyConfig) + "train.lr = 1e300\n");
  const auto r = run("train --config c.cfg --out o");
  EXPECT_EQ(r.code, 4) << r.err;
  EXPECT_NE(r.err.find("loss"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / "o" / "model.ckpt"));
}

}  // namespace
