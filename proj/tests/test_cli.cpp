// Copyright 2026 The ECTPI Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ectpi/cli.hpp"
#include "ectpi/grid_io.hpp"
#include "support.hpp"

namespace ectpi {
namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ectpi");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string write_text(const std::string& stem, const std::string& text) {
  const std::string path = test::scratch_path(stem);
  std::ofstream(path) << text;
  return path;
}

std::vector<Measurement> parse(const std::string& text) {
  std::istringstream in(text);
  return cli::parse_measurements(in);
}

TEST(MeasurementCsv, ParsesRowsWithAndWithoutGroup) {
  const auto ms = parse(
      "id,f_hz,dz_re_ohm,dz_im_ohm,group\n"
      "a,1000,0.18,-0.15,p1\n"
      "\n"
      "b,2e4,1.5e-1,-2.5e-1,\n"
      "c,500,0.1,-0.1\n");
  ASSERT_EQ(ms.size(), 3u);
  EXPECT_EQ(ms[0].group, "p1");
  EXPECT_EQ(ms[1].frequency_hz, 2e4);
  EXPECT_EQ(ms[1].delta_z, std::complex<double>(0.15, -0.25));
  EXPECT_EQ(ms[1].group, "");
  EXPECT_EQ(ms[2].group, "");
}

TEST(MeasurementCsv, RoundTripIsExact) {
  const std::vector<Measurement> ms{{"x1", 800.0, {0.1234567890123456, -1.0 / 3.0}, "g"},
                                    {"x2", 23200.0, {1e-7, -2.5e-9}, ""}};
  std::ostringstream os;
  cli::write_measurements(os, ms);
  const auto back = parse(os.str());
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(back[k].id, ms[k].id);
    EXPECT_EQ(back[k].frequency_hz, ms[k].frequency_hz);
    EXPECT_EQ(back[k].delta_z, ms[k].delta_z);
    EXPECT_EQ(back[k].group, ms[k].group);
  }
}

TEST(MeasurementCsv, MalformedInputIsAConfigError) {
  const std::string h = "id,f_hz,dz_re_ohm,dz_im_ohm,group\n";
  EXPECT_THROW(parse(""), ConfigError);
  EXPECT_THROW(parse(h), ConfigError);
  EXPECT_THROW(parse("id,freq,re,im,group\na,1,1,1,\n"), ConfigError);
  EXPECT_THROW(parse(h + "a,1000,0.1\n"), ConfigError);
  EXPECT_THROW(parse(h + "a,1000,x,0.1,\n"), ConfigError);
  EXPECT_THROW(parse(h + "a,1000,0.1,0.1,\na,2000,0.1,0.1,\n"), ConfigError);
  EXPECT_THROW(parse(h + ",1000,0.1,0.1,\n"), ConfigError);
  EXPECT_THROW(parse(h + "a,-5,0.1,0.1,\n"), ConfigError);
}

TEST(ExitCodes, CategoryMapping) {
  EXPECT_EQ(cli::exit_code(ErrorCategory::kConfig), cli::kExitConfig);
  EXPECT_EQ(cli::exit_code(ErrorCategory::kDomain), cli::kExitConfig);
  EXPECT_EQ(cli::exit_code(ErrorCategory::kData), cli::kExitData);
  EXPECT_EQ(cli::exit_code(ErrorCategory::kAmbiguity), cli::kExitData);
  EXPECT_EQ(cli::exit_code(ErrorCategory::kFormat), cli::kExitData);
  EXPECT_EQ(cli::exit_code(ErrorCategory::kModel), cli::kExitModel);
  EXPECT_EQ(cli::exit_code(ErrorCategory::kIo), cli::kExitIo);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, cli::kExitConfig);
  EXPECT_EQ(run_cli({"estimate", "--db", test::default_grid_path()}).code, cli::kExitConfig);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kExitConfig);
  EXPECT_EQ(run_cli({"--help"}).code, cli::kExitOk);
}

TEST(Cli, SynthThenEstimateThicknessVaried) {
  test::default_grid();
  const std::string csv = test::scratch_path("thickness_varied.csv");
  const auto s = run_cli({"synth", "--sigma", "34.5", "--thickness", "0.5,1.0", "--lift-off",
                          "0.6", "--f-hz", "1000", "--group", "plate", "--out", csv});
  ASSERT_EQ(s.code, 0) << s.err;
  const auto e = run_cli({"estimate", "--db", test::default_grid_path(), "-m", csv, "--mode",
                          "thickness-inv"});
  ASSERT_EQ(e.code, 0) << e.err;
  const auto j = nlohmann::json::parse(e.out);
  ASSERT_EQ(j.at("results").size(), 1u);
  const auto& r = j.at("results")[0];
  EXPECT_EQ(r.at("group"), "plate");
  for (const auto& q : r.at("quantities")) {
    if (q.at("name") == "pi2") {
      EXPECT_NEAR(q.at("value").get<double>(), 2.86, 0.01);
    }
    if (q.at("name") == "pi4") {
      EXPECT_NEAR(q.at("value").get<double>(), 7.75e-2, 1e-3);
    }
    if (q.at("name") == "sigma") {
      EXPECT_NEAR(q.at("value").get<double>(), 34.5e6, 0.2e6);
    }
  }
}

TEST(Cli, GroupsAreEstimatedSeparately) {
  test::default_grid();
  const std::string a = test::scratch_path("g1.csv");
  const std::string b = test::scratch_path("g2.csv");
  ASSERT_EQ(run_cli({"synth", "--sigma", "30", "--thickness", "1.5", "--lift-off", "0.7,1.1",
                     "--f-hz", "800,18000", "--group", "one", "--id-prefix", "a", "--out", a})
                .code,
            0);
  ASSERT_EQ(run_cli({"synth", "--sigma", "50", "--thickness", "2.5", "--lift-off", "0.9",
                     "--f-hz", "1200,23600", "--group", "two", "--id-prefix", "b", "--out", b})
                .code,
            0);
  std::ifstream fa(a), fb(b);
  std::string all((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string line;
  std::getline(fb, line);
  while (std::getline(fb, line)) all += line + "\n";
  const std::string both = write_text("both.csv", all);
  const auto e = run_cli({"estimate", "--db", test::default_grid_path(), "-m", both, "--mode",
                          "liftoff-inv"});
  ASSERT_EQ(e.code, 0) << e.err;
  const auto j = nlohmann::json::parse(e.out).at("results");
  ASSERT_EQ(j.size(), 2u);
  const double want_sigma[2] = {30e6, 50e6};
  for (int k = 0; k < 2; ++k) {
    for (const auto& q : j[k].at("quantities")) {
      if (q.at("name") == "sigma") {
        EXPECT_NEAR(q.at("value").get<double>(), want_sigma[k], 5e-3 * want_sigma[k]);
      }
    }
  }
}

TEST(Cli, TwoFrequencyThicknessInvariantIsAmbiguous) {
  test::default_grid();
  const std::string csv = test::scratch_path("two_frequency.csv");
  ASSERT_EQ(run_cli({"synth", "--sigma", "34.5", "--thickness", "1.03", "--lift-off", "0.6",
                     "--f-hz", "800,23200", "--out", csv})
                .code,
            0);
  const auto e = run_cli({"estimate", "--db", test::default_grid_path(), "-m", csv, "--mode",
                          "thickness-inv"});
  EXPECT_EQ(e.code, cli::kExitData);
  EXPECT_NE(e.err.find("candidates"), std::string::npos);
  EXPECT_NE(e.err.find("further frequency"), std::string::npos);
}

TEST(Cli, TraceWritesCurveCsv) {
  test::default_grid();
  const auto dz = test::forward(34.5e6, 1.03e-3, 0.6e-3, 1000.0);
  const std::string out = test::scratch_path("curve.csv");
  const auto r = run_cli({"trace", "--db", test::default_grid_path(), "--f-hz", "1000",
                          "--dz-re", std::to_string(dz.real()), "--dz-im",
                          std::to_string(dz.imag()), "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream f(out);
  std::string header;
  std::getline(f, header);
  EXPECT_EQ(header, "s,pi2,pi3,pi4,residual1,residual2,curve");
  std::size_t rows = 0;
  for (std::string line; std::getline(f, line);) ++rows;
  EXPECT_GT(rows, 20u);
}

TEST(Cli, BuildDbWritesALoadableDatabase) {
  const std::string db = test::scratch_path("small.db");
  const auto r = run_cli({"build-db", "--out", db, "--pi2", "1,5,4", "--pi3", "0.05,0.3,3",
                          "--pi4", "0.05,0.3,3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("36 (4 x 3 x 3)"), std::string::npos);
  const auto g = load_grid(db);
  EXPECT_EQ(g.node_count(), 36u);
  EXPECT_EQ(g.axis(0).back(), 5.0);
  EXPECT_EQ(run_cli({"build-db", "--out", db, "--pi2", "1,5"}).code, cli::kExitConfig);
}

TEST(Cli, ExperimentWritesTables) {
  test::default_grid();
  const std::string cfg = write_text(
      "exp.json",
      R"({"plates": [{"name": "c", "sigma_ms_per_m": 35.09, "thickness_mm": 1.97}],
          "lift_offs_mm": [1.0], "frequency_pairs_hz": [[1000, 23400]], "repeats": 1,
          "noise_rel": 0.0})");
  const std::string dir = test::scratch_path("exp_out");
  const auto r = run_cli({"experiment", "--config", cfg, "--db", test::default_grid_path(),
                          "--out", dir});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("cells 1"), std::string::npos);
  EXPECT_TRUE(fs::exists(fs::path(dir) / "liftoff-invariant_sigma.csv"));
  EXPECT_TRUE(fs::exists(fs::path(dir) / "raw.json"));
}

TEST(Cli, FailureExitCodes) {
  const std::string db = test::default_grid_path();
  test::default_grid();
  const std::string csv = write_text(
      "ok.csv", "id,f_hz,dz_re_ohm,dz_im_ohm,group\na,800,0.1,-0.1,\nb,18000,0.2,-0.3,\n");
  // Missing inputs are configuration errors.
  EXPECT_EQ(run_cli({"estimate", "--db", test::scratch_path("none.db"), "-m", csv, "--mode",
                     "liftoff-inv"})
                .code,
            cli::kExitConfig);
  EXPECT_EQ(run_cli({"estimate", "--db", db, "-m", test::scratch_path("none.csv"), "--mode",
                     "liftoff-inv"})
                .code,
            cli::kExitConfig);
  EXPECT_EQ(run_cli({"estimate", "--db", db, "-m", write_text("empty.csv", ""), "--mode",
                     "liftoff-inv"})
                .code,
            cli::kExitConfig);
  EXPECT_EQ(run_cli({"build-db", "--probe", test::scratch_path("none.json"), "--out",
                     test::scratch_path("x.db")})
                .code,
            cli::kExitConfig);
  // Unwritable outputs are I/O errors, detected before any work.
  EXPECT_EQ(run_cli({"estimate", "--db", db, "-m", csv, "--mode", "liftoff-inv", "--out",
                     "/nonexistent_dir/out.json"})
                .code,
            cli::kExitIo);
  // A damaged database is a data/format error.
  const std::string bad = write_text("bad.db", "not a database at all");
  EXPECT_EQ(run_cli({"estimate", "--db", bad, "-m", csv, "--mode", "liftoff-inv"}).code,
            cli::kExitData);
  // A response the database cannot produce is incompatible data.
  const std::string far = write_text(
      "far.csv", "id,f_hz,dz_re_ohm,dz_im_ohm,group\na,800,50,40,\nb,18000,60,30,\n");
  EXPECT_EQ(run_cli({"estimate", "--db", db, "-m", far, "--mode", "liftoff-inv"}).code,
            cli::kExitData);
  EXPECT_EQ(run_cli({"estimate", "--db", db, "-m", csv, "--mode", "bogus"}).code,
            cli::kExitConfig);
}

}  // namespace
}  // namespace ectpi
