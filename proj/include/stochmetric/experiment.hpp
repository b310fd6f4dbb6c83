#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stochmetric/config.hpp"

namespace stochmetric {

inline constexpr const char* kVersion = "0.1.0";
/// Overrides experiment.output_dir when set.
inline constexpr const char* kOutputDirEnv = "STOCHMETRIC_OUTPUT_DIR";

struct OutputFile {
  std::string name;
  std::uintmax_t bytes = 0;
  std::uint32_t crc32 = 0;
};

struct RunManifest {
  std::string config_text;
  std::string version = kVersion;
  std::string started;
  std::string finished;
  std::filesystem::path output_dir;
  std::vector<std::uint64_t> substream_seeds;
  std::vector<OutputFile> outputs;
};

/// Output directory after applying the environment override.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config);

/// Creates and probes the output directory, runs the experiment, writes its
/// CSV/JSON outputs and finally manifest.json (via rename). Throws IoError
/// before any computation if the directory is not writable.
RunManifest run_experiment(const ExperimentConfig& config);

/// Same, into an explicit directory (ignores config.output_dir and the
/// environment).
RunManifest run_experiment(const ExperimentConfig& config, const std::filesystem::path& dir);

std::uint32_t file_crc32(const std::filesystem::path& file);

}  // namespace stochmetric
