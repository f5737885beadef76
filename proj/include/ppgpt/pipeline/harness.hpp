#pragma once

#include <map>
#include <string>
#include <vector>

#include "ppgpt/pipeline/pipeline.hpp"

namespace ppgpt::pipeline {

// Labeled match file: one {"id", "role": "generated" | "truth", "matched": bool} per line.
// A generated property is matched when it agrees with some ground-truth one; a
// ground-truth property is matched when some generated one recovers it.
struct MatchStats {
  size_t generated = 0, generated_matched = 0;
  size_t truth = 0, truth_matched = 0;
  double precision() const { return generated ? double(generated_matched) / generated : 0; }
  double recall() const { return truth ? double(truth_matched) / truth : 0; }
};
MatchStats match_stats(const std::string& jsonl);

// Recompiles the last response of every transcript against the target and
// counts how many compile and cover it.
struct CompileStats {
  size_t total = 0;
  size_t compiled = 0;               // recomputed
  size_t disagreements = 0;          // recorded status differs from the recomputation
  std::map<int, size_t> attempts;    // revision count -> candidates, successful ones only
  double rate() const { return total ? double(compiled) / total : 0; }
};
CompileStats compile_stats(const RunReport& report, const gen::GenTarget& target);

}  // namespace ppgpt::pipeline
