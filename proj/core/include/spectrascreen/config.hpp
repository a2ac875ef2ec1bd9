#pragma once

#include <cstdint>

#include "spectrascreen/baseline.hpp"
#include "spectrascreen/eval.hpp"
#include "spectrascreen/pls.hpp"
#include "spectrascreen/serialize.hpp"
#include "spectrascreen/synth.hpp"
#include "spectrascreen/train.hpp"

namespace spectrascreen {

// Everything a reproducible run needs. Every block and key is optional; a
// missing key keeps the module default.
//
//   {"airpls": {...}, "pls": {...}, "train": {...},
//    "folds": {"k": 5, "seed": 0, "stratified": false}, "synth": {...}}
struct RunConfig {
  AirPlsParams airpls;
  PlsConfig pls;
  TrainConfig train;
  std::size_t folds = 5;
  std::uint64_t fold_seed = 0;
  bool stratified = false;
  SynthConfig synth;

  PipelineConfig pipeline(unsigned threads = 1) const;
};

RunConfig decode_run_config(const Json& j);
Json encode(const RunConfig& cfg);

// Report document: echoed effective config plus every per-fold artifact.
Json encode_report(const EvalReport& report, const RunConfig& cfg);

}  // namespace spectrascreen
