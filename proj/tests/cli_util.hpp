#pragma once

// Helpers for driving the legopt executable from tests.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace legopt::testing {

namespace fs = std::filesystem;

inline int run_cli(const std::string& args, const std::string& log = "/dev/null") {
  const std::string cmd = std::string(LEGOPT_CLI) + " " + args + " >" + log + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

/// A fresh scratch directory under the build tree.
inline fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::current_path() / "scratch_runs" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

/// Minimal-cost config: tiny networks, few environments, short episodes.
inline nlohmann::json tiny_config(const fs::path& out_dir) {
  return {{"ppo",
           {{"actor_hidden", {16}},
            {"critic_hidden", {16}},
            {"epochs", 2},
            {"rollout_length", 8},
            {"minibatch_size", 32}}},
          {"task", {{"episode_steps", 20}}},
          {"bo",
           {{"initial_design", 2},
            {"iterations", 1},
            {"finetune_steps", 1},
            {"fitness_envs", 2},
            {"fitness_steps", 20}}},
          {"run", {{"n_envs", 8}, {"out_dir", out_dir.string()}, {"wall_clock", false}}}};
}

}  // namespace legopt::testing
