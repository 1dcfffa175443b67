#pragma once

#include <string>
#include <vector>

#include "sentlab/extract.hpp"
#include "sentlab/model.hpp"

namespace sentlab::cli {

// Full run configuration: the model hyperparameters plus every path and
// evaluation knob a subcommand may need. Stored as "key = value" lines
// with '#' comments; unknown keys are rejected.
struct RunConfig {
  model::ModelConfig model;
  std::string corpus_path;
  std::string vocab_path;       // empty -> "<checkpoint>.vocab"
  std::string checkpoint_path;
  std::string out_dir;
  std::vector<std::string> sts_files;
  std::string transfer_file;
  extract::ReprSpec spec;
  extract::SimilarityKind similarity = extract::SimilarityKind::dot;
  uint32_t sweep_nmax = 10;
  uint32_t folds = 10;

  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);
std::string render_run_config(const RunConfig& cfg);

}  // namespace sentlab::cli
