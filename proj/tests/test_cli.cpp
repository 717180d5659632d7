// Copyright (c) 2026 The CCPV Authors
//
// This source code is licensed under the Apache-2.0 license found in the
// LICENSE file in the root directory of this source tree.
//
// End-to-end coverage of the command-line tool: every subcommand is exercised
// through a real process, JSON on stdout, diagnostics on stderr, and the
// documented exit codes.

#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ccpv/common.hpp"
#include "ccpv/metrics.hpp"
#include "test_util.hpp"

using json = nlohmann::json;
using testutil::CliResult;
using testutil::TempDir;
using testutil::run_cli;

namespace {

int exit_code_for(ccpv::ErrorCode code) { return 10 + static_cast<int>(code); }

// One prepared corpus + trained checkpoint, shared by the read-only cases.
struct Workspace {
  TempDir dir{"cli"};
  std::string data;
  std::string ckpt;
  CliResult prep;
  CliResult train;

  Workspace() {
    data = dir.file("data");
    ckpt = dir.file("model.ckpt");
    prep = run_cli(
        "prepare-data --synthetic --identities 5 --images-per-palm 5 --side 24"
        " --noise-sigma 0.05 --seed 3 --train-left 3 --train-right 3 --out " +
            data,
        dir);
    REQUIRE(prep.exit_code == 0);
    train = run_cli(
        "train --data " + data + "/train.csv --framework ccpv --epochs 2"
        " --batch-identities 5 --embedding-dim 8 --image-side 16"
        " --channels 2,4,4,4 --seed 1 --out " + ckpt +
        " --log " + dir.file("train.csv"),
        dir);
    REQUIRE(train.exit_code == 0);
  }
};

Workspace& workspace() {
  static Workspace w;
  return w;
}

}  // namespace

TEST_CASE("cli rejects unknown commands and bad flags with exit 2") {
  TempDir dir("cli_usage");
  CHECK(run_cli("definitely-not-a-command", dir).exit_code == 2);
  CHECK(run_cli("", dir).exit_code == 2);
  CHECK(run_cli("prepare-data", dir).exit_code == 2);  // --out missing
  CHECK(run_cli("train", dir).exit_code == 2);         // --data missing
  CHECK(run_cli("eval --checkpoint x", dir).exit_code == 2);
  CHECK(run_cli("verify --gallery g", dir).exit_code == 2);
}

TEST_CASE("cli help and version exit cleanly") {
  TempDir dir("cli_help");
  CHECK(run_cli("--help", dir).exit_code == 0);
  CHECK(run_cli("train --help", dir).exit_code == 0);
  const CliResult version = run_cli("--version", dir);
  CHECK(version.exit_code == 0);
  CHECK(version.out.find("1.0.0") != std::string::npos);
}

TEST_CASE("prepare-data generates a splittable synthetic corpus") {
  Workspace& w = workspace();
  const json summary = json::parse(w.prep.out);
  CHECK(summary["identities"] == 5);
  CHECK(summary["train_samples"] == 5 * 6);
  CHECK(summary["test_samples"] == 5 * 4);

  // Same seed, fresh directory: identical sample layout.
  TempDir dir("cli_prep_repro");
  const CliResult again = run_cli(
      "prepare-data --synthetic --identities 5 --images-per-palm 5 --side 24"
      " --noise-sigma 0.05 --seed 3 --train-left 3 --train-right 3 --out " +
          dir.file("data"),
      dir);
  REQUIRE(again.exit_code == 0);
  const std::string a = testutil::read_file(w.data + "/images/id0001_L_00.png");
  const std::string b =
      testutil::read_file(dir.file("data") + "/images/id0001_L_00.png");
  CHECK(a == b);

  // Both --synthetic and --manifest (or neither) is a usage error.
  CHECK(run_cli("prepare-data --out x", dir).exit_code == 2);
  CHECK(run_cli("prepare-data --synthetic --manifest m.csv --out x", dir)
            .exit_code == 2);
}

TEST_CASE("prepare-data splits an existing manifest") {
  Workspace& w = workspace();
  TempDir dir("cli_prep_manifest");
  const CliResult r = run_cli(
      "prepare-data --manifest " + w.data + "/manifest.csv --train-left 3" +
          " --train-right 3 --seed 9 --out " + dir.file("split"),
      dir);
  REQUIRE(r.exit_code == 0);
  const json summary = json::parse(r.out);
  CHECK(summary["train_samples"] == 30);
  CHECK(summary["test_samples"] == 20);
  CHECK(testutil::read_file(dir.file("split") + "/train.csv")
            .rfind("path,identity", 0) == 0);
}

TEST_CASE("train writes checkpoint, log, and a summary") {
  Workspace& w = workspace();
  const json summary = json::parse(w.train.out);
  CHECK(summary["framework"] == "ccpv");
  CHECK(summary["classes"] == 5);
  CHECK(summary["epochs"] == 2);
  CHECK(std::isfinite(summary["final_total"].get<double>()));

  const std::string log = testutil::read_file(w.dir.file("train.csv"));
  CHECK(log.rfind("epoch,step,l_ce,l_cc,total\n", 0) == 0);

  TempDir dir("cli_train_bad");
  CHECK(run_cli("train --data " + w.data + "/train.csv --framework alexnet"
                " --out " + dir.file("x.ckpt"),
                dir)
            .exit_code == 2);
  CHECK(run_cli("train --data " + dir.file("nope.csv") + " --out " +
                    dir.file("x.ckpt"),
                dir)
            .exit_code == exit_code_for(ccpv::ErrorCode::Io));
}

TEST_CASE("train reads a config file with flag overrides") {
  Workspace& w = workspace();
  TempDir dir("cli_train_cfg");
  testutil::write_file(dir.file("cfg.json"),
                       "{\"framework\":\"naive\",\"epochs\":1,"
                       "\"batch_identities\":5,\"embedding_dim\":8,"
                       "\"image_side\":16,\"channels\":\"2,4,4,4\",\"seed\":2}");
  const CliResult r = run_cli("train --config " + dir.file("cfg.json") +
                                  " --data " + w.data + "/train.csv --epochs 2" +
                                  " --out " + dir.file("m.ckpt"),
                              dir);
  REQUIRE(r.exit_code == 0);
  const json summary = json::parse(r.out);
  CHECK(summary["framework"] == "naive");
  CHECK(summary["epochs"] == 2);  // the flag overrides the file

  // The config is also picked up from the environment.
  const CliResult env = run_cli(
      "train --data " + w.data + "/train.csv --epochs 1 --out " +
          dir.file("m2.ckpt"),
      dir, "CCPV_CONFIG=" + dir.file("cfg.json") + " ");
  REQUIRE(env.exit_code == 0);
  CHECK(json::parse(env.out)["framework"] == "naive");

  testutil::write_file(dir.file("bad.json"), "{\"epochz\":1}");
  CHECK(run_cli("train --config " + dir.file("bad.json") + " --data " + w.data +
                    "/train.csv --out " + dir.file("m3.ckpt"),
                dir)
            .exit_code == exit_code_for(ccpv::ErrorCode::BadFormat));
}

TEST_CASE("eval writes reports, curves, and scores per protocol") {
  Workspace& w = workspace();
  TempDir dir("cli_eval");
  const CliResult r = run_cli(
      "eval --checkpoint " + w.ckpt + " --data " + w.data + "/test.csv" +
          " --protocols l2r,r2l --out-dir " + dir.file("out"),
      dir);
  REQUIRE(r.exit_code == 0);
  const json reports = json::parse(r.out);
  REQUIRE(reports.is_array());
  REQUIRE(reports.size() == 2);
  CHECK(reports[0]["protocol"] == "l2r");
  CHECK(reports[1]["protocol"] == "r2l");
  CHECK(reports[0]["n_genuine"] == 10);      // 5 ids x 2 right test samples
  CHECK(reports[0]["n_impostor"] == 10 * 4);
  CHECK(r.err.find("EER") != std::string::npos);

  // The written scores reproduce the reported EER exactly.
  const ccpv::ScoreSet scores =
      ccpv::load_scores_csv(dir.file("out") + "/scores_l2r.csv");
  CHECK(ccpv::eer(scores).eer ==
        doctest::Approx(reports[0]["eer"].get<double>()).epsilon(1e-9));
  const ccpv::RocCurve curve =
      ccpv::load_roc_csv(dir.file("out") + "/roc_l2r.csv");
  CHECK(curve.points.size() >= 2);
  const ccpv::MetricsReport report =
      ccpv::load_report(dir.file("out") + "/report_l2r.json");
  CHECK(report.protocol == "l2r");

  // "all" on single-spectrum data: four protocols and a warning.
  TempDir dir2("cli_eval_all");
  const CliResult all = run_cli(
      "eval --checkpoint " + w.ckpt + " --data " + w.data + "/test.csv" +
          " --protocols all --out-dir " + dir2.file("out"),
      dir2);
  REQUIRE(all.exit_code == 0);
  CHECK(json::parse(all.out).size() == 4);
  CHECK(all.err.find("cross-spectral") != std::string::npos);

  // Rule and pairing overrides are accepted.
  const CliResult comp = run_cli(
      "eval --checkpoint " + w.ckpt + " --data " + w.data + "/test.csv" +
          " --protocols l2r --rule competition --pairing aswritten" +
          " --out-dir " + dir2.file("comp"),
      dir2);
  CHECK(comp.exit_code == 0);

  CHECK(run_cli("eval --checkpoint " + w.ckpt + " --data " + w.data +
                    "/test.csv --protocols nope --out-dir " + dir2.file("x"),
                dir2)
            .exit_code == 2);
}

TEST_CASE("enroll and verify run the verification loop") {
  Workspace& w = workspace();
  TempDir dir("cli_verify");
  const std::string gallery = dir.file("g.bin");
  const std::string img = w.data + "/images/id0001_L_00.png";
  const std::string probe = w.data + "/images/id0001_R_01.png";
  const std::string other = w.data + "/images/id0002_R_00.png";

  const CliResult enroll = run_cli("enroll --gallery " + gallery +
                                       " --checkpoint " + w.ckpt + " --image " +
                                       img + " --identity first --side L",
                                   dir);
  REQUIRE(enroll.exit_code == 0);
  CHECK(json::parse(enroll.out)["entries"] == 1);

  // Re-enrolling the same identity needs --overwrite.
  CHECK(run_cli("enroll --gallery " + gallery + " --checkpoint " + w.ckpt +
                    " --image " + img + " --identity first",
                dir)
            .exit_code == exit_code_for(ccpv::ErrorCode::DuplicateIdentity));
  CHECK(run_cli("enroll --gallery " + gallery + " --checkpoint " + w.ckpt +
                    " --image " + img + " --identity first --overwrite",
                dir)
            .exit_code == 0);

  const CliResult accept = run_cli(
      "verify --gallery " + gallery + " --checkpoint " + w.ckpt + " --image " +
          probe + " --identity first --threshold 1.5",
      dir);
  REQUIRE(accept.exit_code == 0);
  const json verdict = json::parse(accept.out);
  CHECK(verdict["accept"] == true);
  for (const char* key : {"aggregate", "d1", "d2", "d3", "d4", "threshold"})
    CHECK(verdict.contains(key));
  CHECK(verdict["threshold"] == 1.5);

  // A rejection still exits 0; the verdict is in the payload.
  const CliResult reject = run_cli(
      "verify --gallery " + gallery + " --checkpoint " + w.ckpt + " --image " +
          other + " --identity first --threshold 0.0001",
      dir);
  REQUIRE(reject.exit_code == 0);
  CHECK(json::parse(reject.out)["accept"] == false);

  CHECK(run_cli("verify --gallery " + gallery + " --checkpoint " + w.ckpt +
                    " --image " + probe + " --identity stranger --threshold 1",
                dir)
            .exit_code == exit_code_for(ccpv::ErrorCode::UnknownIdentity));
  CHECK(run_cli("verify --gallery " + dir.file("none.bin") + " --checkpoint " +
                    w.ckpt + " --image " + probe +
                    " --identity first --threshold 1",
                dir)
            .exit_code == exit_code_for(ccpv::ErrorCode::Io));
}

TEST_CASE("plot-roc renders an SVG per curve") {
  Workspace& w = workspace();
  TempDir dir("cli_plot");
  REQUIRE(run_cli("eval --checkpoint " + w.ckpt + " --data " + w.data +
                      "/test.csv --protocols l2r,r2l --out-dir " +
                      dir.file("out"),
                  dir)
              .exit_code == 0);

  const CliResult plot = run_cli(
      "plot-roc " + dir.file("out") + "/roc_l2r.csv " + dir.file("out") +
          "/roc_r2l.csv --out " + dir.file("roc.svg") + " --title Mirror",
      dir);
  REQUIRE(plot.exit_code == 0);
  CHECK(json::parse(plot.out)["curves"] == 2);
  const std::string svg = testutil::read_file(dir.file("roc.svg"));
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("Mirror") != std::string::npos);
  CHECK(svg.find("roc_l2r") != std::string::npos);  // legend carries stems
  CHECK(svg.find("roc_r2l") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);

  testutil::write_file(dir.file("empty.csv"), "threshold,far,gar\n");
  CHECK(run_cli("plot-roc " + dir.file("empty.csv") + " --out " +
                    dir.file("x.svg"),
                dir)
            .exit_code == exit_code_for(ccpv::ErrorCode::EmptyScores));
  CHECK(run_cli("plot-roc --out " + dir.file("x.svg"), dir).exit_code == 2);
}

TEST_CASE("eval exit code distinguishes missing protocol data") {
  Workspace& w = workspace();
  TempDir dir("cli_eval_missing");
  // A manifest with one test sample per palm starves same-side protocols.
  const CliResult prep = run_cli(
      "prepare-data --synthetic --identities 3 --images-per-palm 2 --side 16"
      " --train-left 1 --train-right 1 --seed 5 --out " + dir.file("thin"),
      dir);
  REQUIRE(prep.exit_code == 0);
  CHECK(run_cli("eval --checkpoint " + w.ckpt + " --data " +
                    dir.file("thin") + "/test.csv --protocols l2l --out-dir " +
                    dir.file("out"),
                dir)
            .exit_code == exit_code_for(ccpv::ErrorCode::ProtocolDataMissing));
}
