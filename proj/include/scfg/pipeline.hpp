#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scfg/corpus.hpp"
#include "scfg/extract.hpp"
#include "scfg/grammar.hpp"
#include "scfg/merge.hpp"
#include "scfg/verify.hpp"

namespace scfg {

/// Failure inside a pipeline stage; what() is "<stage>: <cause>".
class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string stage, const std::string& cause)
      : std::runtime_error(stage + ": " + cause), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

enum class ExtractMode { specialized, baseline };
enum class MergeMethod { none, blue_fringe, kmedoids };

struct PipelineConfig {
  // [corpus]
  std::filesystem::path src, tgt, align;
  std::optional<std::filesystem::path> classes;
  bool reserve_unknown_class = false;
  std::optional<std::size_t> max_len;
  // [extract]
  ExtractMode mode = ExtractMode::specialized;
  ExtractOptions extract;
  // [merge]
  MergeMethod method = MergeMethod::none;
  BlueFringeOptions blue_fringe;
  KMedoidsOptions kmedoids;
  // [verify]
  bool verify = true;
  VerifyOptions verify_options;
  // [output]
  std::filesystem::path out_dir = ".";
  std::string rule_table = "rules.txt";
  std::string grammar = "grammar.dump";
  std::string plan = "plan.txt";
  std::string manifest = "manifest.json";
  // [run]
  std::size_t threads = 1;
};

/// Flat `key = value` settings grouped in `[section]` blocks, addressed as
/// "section.key". Unknown keys are rejected.
using Settings = std::map<std::string, std::string>;

Settings read_settings(const std::filesystem::path& path);

/// Applies settings on top of `base`. Relative paths are resolved against
/// `base_dir`. Throws std::invalid_argument naming the offending key.
PipelineConfig configure(const Settings& settings, const std::filesystem::path& base_dir = ".",
                         PipelineConfig base = {});

/// Reads settings from `path`, then applies `overrides` (e.g. from CLI flags).
PipelineConfig load_pipeline_config(const std::filesystem::path& path, const Settings& overrides = {});

struct StageTiming {
  std::string stage;
  double milliseconds = 0.0;
};

struct PipelineResult {
  GrammarStats extracted;
  GrammarStats final_grammar;
  std::size_t sentence_pairs = 0;
  std::optional<CoverageReport> coverage;
  std::vector<StageTiming> timings;
  std::vector<std::string> warnings;
  std::string manifest;  // JSON text as written
};

/// extract -> merge -> score -> export -> verify. Writes the rule table,
/// grammar dump, merge plan and manifest under out_dir.
PipelineResult run_pipeline(const PipelineConfig& cfg);

}  // namespace scfg
