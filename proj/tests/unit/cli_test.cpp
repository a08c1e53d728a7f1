// Copyright 2026 The Anatomy-kNN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "anatomy/anatomizer.hpp"
#include "anatomy/dataset.hpp"

namespace anatomy {
namespace {

namespace fs = std::filesystem;

const std::string kCli = ANATOMY_CLI_PATH;
const std::string kData = ANATOMY_TEST_DATA_DIR;

int run(const std::string& args, const fs::path& log) {
  std::string cmd = kCli + " " + args + " >" + (log / "stdout.txt").string() + " 2>" +
                    (log / "stderr.txt").string();
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("anatomy_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string small() const {
    return "--in " + kData + "/small.csv --schema " + kData + "/small.schema.json";
  }
  fs::path dir_;
};

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run("", dir_), 1);
  EXPECT_EQ(run("anatomize --bogus", dir_), 1);
  EXPECT_EQ(run("anatomize " + small() + " --format xml", dir_), 1);
  EXPECT_EQ(run("--help", dir_), 0);
  EXPECT_EQ(run("--version", dir_), 0);
}

TEST_F(CliTest, DataErrors) {
  EXPECT_EQ(run("anatomize --in /nonexistent.csv --schema " + kData + "/small.schema.json --out " +
                    (dir_ / "o").string(),
                dir_),
            2);
  EXPECT_NE(slurp(dir_ / "stderr.txt").find("error:"), std::string::npos);
  // four distinct diseases
  EXPECT_EQ(run("anatomize " + small() + " --l 5 --out " + (dir_ / "o").string(), dir_), 2);
}

TEST_F(CliTest, AnatomizeThenVerify) {
  auto out = dir_ / "a";
  ASSERT_EQ(run("anatomize " + small() + " --l 3 --seed 4 --out " + out.string(), dir_), 0);
  for (const char* f : {"it.csv", "st.csv", "anatomized.csv", "partition.json"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  std::string verify = "verify --it " + (out / "it.csv").string() + " --st " + (out / "st.csv").string();
  EXPECT_EQ(run(verify + " --l 3", dir_), 0);
  EXPECT_EQ(run(verify + " --l 2", dir_), 0);
  // groups of three or four rows cannot be 5-diverse
  EXPECT_EQ(run(verify + " --l 5", dir_), 2);

  // make every value of the first group the same
  std::ifstream st_in(out / "st.csv");
  std::ostringstream tampered;
  std::string line, group;
  std::getline(st_in, line);
  tampered << line << '\n';
  while (std::getline(st_in, line)) {
    if (group.empty()) group = line.substr(0, line.find(',') + 1);
    if (line.starts_with(group)) line = group + "flu";
    tampered << line << '\n';
  }
  st_in.close();
  std::ofstream(out / "st.csv", std::ios::trunc) << tampered.str();
  EXPECT_EQ(run(verify + " --l 3", dir_), 2);
}

TEST_F(CliTest, MatchesLibraryAndIsDeterministic) {
  auto a = dir_ / "a";
  auto b = dir_ / "b";
  ASSERT_EQ(run("anatomize " + small() + " --l 2 --seed 9 --out " + a.string(), dir_), 0);
  ASSERT_EQ(run("anatomize " + small() + " --l 2 --seed 9 --out " + b.string(), dir_), 0);
  for (const char* f : {"it.csv", "st.csv", "anatomized.csv", "partition.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  auto schema = load_schema(kData + "/small.schema.json");
  auto data = load_csv(kData + "/small.csv", schema, MissingPolicy::kError).data;
  auto result = anatomize(data, 2, GroupingOptions{9});
  std::ostringstream expected;
  write_csv(expected, result.joined.data);
  EXPECT_EQ(slurp(a / "anatomized.csv"), expected.str());
}

TEST_F(CliTest, CvReportIsReproducible) {
  std::string args =
      "cv " + small() + " --k 1,3 --l 2 --folds 4 --seed 3 --format all --out " + (dir_ / "a").string();
  ASSERT_EQ(run(args, dir_), 0);
  const std::string json = slurp(dir_ / "a" / "report.json");
  const std::string csv = slurp(dir_ / "a" / "errors.csv");
  ASSERT_EQ(run(args, dir_), 0);
  EXPECT_EQ(slurp(dir_ / "a" / "report.json"), json);
  EXPECT_EQ(slurp(dir_ / "a" / "errors.csv"), csv);
  std::string err = slurp(dir_ / "stderr.txt");
  EXPECT_NE(err.find("# seed 3"), std::string::npos) << err;
  EXPECT_NE(err.find("# cv config"), std::string::npos) << err;
}

TEST_F(CliTest, ConfigFileAndOverride) {
  auto config = dir_ / "config.json";
  std::ofstream(config) << "{\"cv\": {\"in\": \"" << kData << "/small.csv\", \"schema\": \"" << kData
                        << "/small.schema.json\", \"folds\": 3, \"seed\": 5, \"format\": \"json\"}}";
  ASSERT_EQ(run("cv --config " + config.string() + " --out " + (dir_ / "a").string(), dir_), 0);
  EXPECT_NE(slurp(dir_ / "stderr.txt").find("# seed 5"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "a" / "report.json"));
  EXPECT_FALSE(fs::exists(dir_ / "a" / "errors.csv"));
  ASSERT_EQ(run("cv --config " + config.string() + " --seed 6 --out " + (dir_ / "b").string(), dir_),
            0);
  EXPECT_NE(slurp(dir_ / "stderr.txt").find("# seed 6"), std::string::npos);
  EXPECT_NE(slurp(dir_ / "a" / "report.json").find("\"folds\": 3"), std::string::npos);
}

TEST_F(CliTest, GeneralizeAndClassify) {
  std::string h = " --hierarchies " + kData + "/small.hierarchies.json";
  ASSERT_EQ(run("generalize " + small() + h + " --k 5 --out " + (dir_ / "g").string(), dir_), 0);
  EXPECT_TRUE(fs::exists(dir_ / "g" / "anonymized.csv"));
  std::string cls = "classify --train " + kData + "/small.csv --test " + kData +
                    "/small.csv --schema " + kData + "/small.schema.json";
  ASSERT_EQ(run(cls + " --k 1 --out " + (dir_ / "c").string(), dir_), 0);
  EXPECT_TRUE(fs::exists(dir_ / "c" / "predictions.csv"));
  ASSERT_EQ(run(cls + " --variant anonymized --anonymity-k 5" + h + " --out " +
                    (dir_ / "d").string(),
                dir_),
            0);
  EXPECT_EQ(run(cls + " --variant anonymized --anonymity-k 5 --out " + (dir_ / "e").string(), dir_),
            2);
}

TEST_F(CliTest, BoundsSim) {
  ASSERT_EQ(run("bounds-sim --n-train 2000 --n-test 500 --format csv --out " + (dir_ / "a").string(),
                dir_),
            0);
  EXPECT_TRUE(fs::exists(dir_ / "a" / "bounds.csv"));
  EXPECT_NE(slurp(dir_ / "stdout.txt").find("l=3 k=3"), std::string::npos);
}

}  // namespace
}  // namespace anatomy
