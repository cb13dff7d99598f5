#pragma once

#include <exception>
#include <string>
#include <vector>

#include "tripcast/config.h"

namespace tripcast {

/// Stage names in execution order. `synth` precedes the chain; `all` in the
/// CLI runs every stage after it.
const std::vector<std::string>& stage_names();

/// Runs one stage: reads the artifacts of earlier stages under
/// <output_dir>/<stage>/, writes its own, and records input/output digests in
/// <output_dir>/manifest.json. Throws ConfigError for an unknown stage,
/// MissingArtifactError naming the upstream stage when an input is absent,
/// and DataError for malformed data.
void run_stage(const std::string& stage, const PipelineConfig& config);

/// Runs ingest through report.
void run_chain(const PipelineConfig& config);

/// 0 for success; 2 config, 3 missing dependency, 4 data error, 1 otherwise.
int exit_code_for(const std::exception& e);

/// Hex SHA-256 digest of a file's bytes.
std::string sha256_file(const std::string& path);

/// Sends library logs to standard error at the given level
/// ("trace" ... "off").
void init_logging(const std::string& level = "info");

}  // namespace tripcast
