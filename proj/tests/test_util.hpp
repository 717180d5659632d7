// Copyright (c) 2026 The CCPV Authors
//
// This source code is licensed under the Apache-2.0 license found in the
// LICENSE file in the root directory of this source tree.

#ifndef CCPV_TESTS_TEST_UTIL_HPP
#define CCPV_TESTS_TEST_UTIL_HPP

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ccpv/common.hpp"
#include "ccpv/image.hpp"

namespace testutil {

// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("ccpv_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline ccpv::ImageArray random_image(int side, std::uint64_t seed,
                                     int channels = 1) {
  ccpv::Rng rng = ccpv::make_rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  ccpv::ImageArray img(channels, side, side);
  for (double& v : img.data) v = uni(rng);
  return img;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the installed CLI binary with stdout/stderr captured to files.
inline CliResult run_cli(const std::string& args, const TempDir& dir,
                         const std::string& env_prefix = "") {
  static std::atomic<int> counter{0};
  const int id = counter++;
  const std::string out_path = dir.file("cli_out_" + std::to_string(id));
  const std::string err_path = dir.file("cli_err_" + std::to_string(id));
  const std::string cmd = env_prefix + std::string(CCPV_CLI_PATH) + " " + args +
                          " > " + out_path + " 2> " + err_path;
  const int raw = std::system(cmd.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  result.out = read_file(out_path);
  result.err = read_file(err_path);
  return result;
}

}  // namespace testutil

#endif  // CCPV_TESTS_TEST_UTIL_HPP
