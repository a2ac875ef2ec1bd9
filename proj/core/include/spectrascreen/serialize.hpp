#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "spectrascreen/baseline.hpp"
#include "spectrascreen/cnn.hpp"
#include "spectrascreen/eval.hpp"
#include "spectrascreen/importance.hpp"
#include "spectrascreen/pls.hpp"
#include "spectrascreen/synth.hpp"
#include "spectrascreen/train.hpp"

namespace spectrascreen {

using Json = nlohmann::json;

// Matrices are {"rows": r, "cols": c, "data": [[row 0], [row 1], ...]}.
Json encode(const Matrix& m);
Json encode(const Vector& v);
Json encode(const RowVector& v);
Matrix decode_matrix(const Json& j);
Vector decode_vector(const Json& j);

// Config blocks. Decoders start from the defaults, accept any subset of the
// keys and reject unknown ones with ConfigError.
Json encode(const AirPlsParams& p);
Json encode(const PlsConfig& c);
Json encode(const TrainConfig& c);
Json encode(const CnnArchitecture& a);
Json encode(const SynthConfig& c);
AirPlsParams decode_airpls(const Json& j);
PlsConfig decode_pls_config(const Json& j);
TrainConfig decode_train_config(const Json& j);
CnnArchitecture decode_architecture(const Json& j);
SynthConfig decode_synth_config(const Json& j);

// Fitted PLS model; `grid` is stored so downstream tools can map features
// back to wavenumbers.
Json encode(const PlsModel& model, const WavenumberGrid& grid);
PlsModel decode_pls_model(const Json& j, WavenumberGrid* grid = nullptr);

Json encode(const AttentionCnnModel& model);
AttentionCnnModel decode_cnn_model(const Json& j);

Json encode(const BandTable& table);
BandTable decode_band_table(const Json& j);

Json encode(const BmiReport& report, const VipVector& raw,
            const VipVector& normalized);

Json encode(const MetricSet& m);
Json encode(const ConfusionMatrix& cm);
Json encode(const RocCurve& roc);
Json encode(const TrainHistory& h);
Json encode(const FoldPlan& plan);
Json encode(const SynthTruth& truth);

RocCurve decode_roc(const Json& j);

Json read_json_file(const std::filesystem::path& path);

}  // namespace spectrascreen
