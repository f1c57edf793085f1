/*
 * Copyright 2026 The BMC Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Runs the bmc_cli binary in scratch directories and checks that every
// subcommand reproduces its artifacts from the config snapshot it wrote.

#ifndef BMC_TESTS_CLI_RUNNER_H_
#define BMC_TESTS_CLI_RUNNER_H_

#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace bmc::cli {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string stderr_text;
};

inline std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// A fresh directory under the system temp path.
inline fs::path scratch_dir(const std::string& name) {
  const fs::path dir =
      fs::temp_directory_path() / ("bmc_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Runs "bmc_cli <args>" with `cwd` as working directory and the output
// directory variable unset. stdout is discarded.
inline RunResult run(const fs::path& cwd, const std::string& args) {
  const fs::path err = cwd / ".stderr";
  const std::string command = "cd '" + cwd.string() + "' && env -u BMC_OUTPUT_DIR '" +
                              std::string(BMC_CLI_PATH) + "' " + args + " >/dev/null 2>'" +
                              err.string() + "'";
  const int status = std::system(command.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.stderr_text = slurp(err);
  fs::remove(err);
  return r;
}

// File name -> contents, hidden files skipped.
inline std::map<std::string, std::string> contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name[0] != '.') out[name] = slurp(e.path());
  }
  return out;
}

struct Replay {
  std::string subcommand;
  bool ok = false;
  std::string detail;
};

// Runs each subcommand once in its own directory, then again from only the
// snapshot in a second directory, and compares every file byte for byte.
// Inputs are passed as absolute paths so both runs see the same files.
inline std::vector<Replay> replay_all(const fs::path& root) {
  struct Step {
    std::string name;
    std::string args;
  };
  const fs::path data = root / "data";
  fs::create_directories(data);
  const std::string d = data.string();
  // Inputs for the later steps.
  run(data, "corpus --n 2000 --error-rate 0 --seed 101 --name train");
  run(data, "corpus --n 120 --error-rate 0.4 --seed 0 --name eval");
  run(data, "fit --train " + d + "/train.jsonl --name model");
  run(data, "diagnose --corpus " + d + "/eval.jsonl --model " + d +
                "/model.json --steps-k 8 --name diag");

  const std::vector<Step> steps = {
      {"corpus", "corpus --n 300 --seed 4 --error-rate 0.3 --paraphrase-rate 0.5"},
      {"fit", "fit --train " + d + "/train.jsonl --smoothing 0.5"},
      {"diagnose", "diagnose --corpus " + d + "/eval.jsonl --model " + d +
                       "/model.json --steps-k 8 --self-consistency 2 --cross-entropy 1"},
      {"mgrs", "mgrs --corpus " + d + "/eval.jsonl --model " + d +
                   "/model.json --queries 12 --budget 4 --tau 0.8"},
      {"ablate", "ablate --corpus " + d + "/eval.jsonl --model " + d +
                     "/model.json --axis gamma --grid 0.5,0.9 --seeds 0,1 --steps-k 4"},
      {"geometry", "geometry --records " + d + "/diag.records.jsonl --bins 4"},
      {"bounds", "bounds --operators 2 --samples 500 --dimension 4"},
  };
  std::vector<Replay> out;
  for (const auto& step : steps) {
    Replay r;
    r.subcommand = step.name;
    const fs::path first = root / (step.name + "_a");
    const fs::path second = root / (step.name + "_b");
    fs::create_directories(first);
    fs::create_directories(second);
    const RunResult a = run(first, step.args);
    if (a.exit_code != 0) {
      r.detail = "first run exited " + std::to_string(a.exit_code) + ": " + a.stderr_text;
      out.push_back(r);
      continue;
    }
    fs::path snapshot;
    for (const auto& e : fs::directory_iterator(first)) {
      const std::string f = e.path().filename().string();
      if (f.size() > 12 && f.ends_with(".config.toml")) snapshot = e.path();
    }
    if (snapshot.empty()) {
      r.detail = "no config snapshot written";
      out.push_back(r);
      continue;
    }
    const RunResult b = run(second, "--config '" + snapshot.string() + "' " + step.name);
    if (b.exit_code != 0) {
      r.detail = "replay exited " + std::to_string(b.exit_code) + ": " + b.stderr_text;
      out.push_back(r);
      continue;
    }
    const auto ca = contents(first);
    const auto cb = contents(second);
    if (ca != cb) {
      r.detail = "artifacts differ:";
      for (const auto& [name, text] : ca) {
        const auto it = cb.find(name);
        if (it == cb.end() || it->second != text) r.detail += " " + name;
      }
      for (const auto& [name, text] : cb) {
        if (!ca.count(name)) r.detail += " +" + name;
      }
    } else {
      r.ok = true;
      r.detail = std::to_string(ca.size()) + " files identical";
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace bmc::cli

#endif  // BMC_TESTS_CLI_RUNNER_H_
