#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tconn::cli {

inline constexpr const char* kVersion = "0.1.0";

enum class Format { Json, Csv, Human };

struct RunConfig {
  std::string input;   // path to a DSL file
  std::string source;  // DSL text; used instead of `input` when non-empty
  std::string command;
  std::vector<std::string> args;
  int samples = 64;
  std::uint64_t seed = 42;
  double tol = 1e-8;
  int steps = 4096;
  Format format = Format::Json;
  bool list = false;
  bool statement_variant = false;
  bool reproject = false;
  bool euler = false;
};

struct RunResult {
  int exit_code = 0;  // 0 pass, 1 check failure, 2 parse or configuration error
  std::string output;
  std::string error;
};

RunResult run(const RunConfig& cfg);

const std::vector<std::string>& commands();

}  // namespace tconn::cli
