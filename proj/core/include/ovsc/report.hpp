#pragma once

#include <nlohmann/json.hpp>

#include "ovsc/overlap_decode.hpp"
#include "ovsc/pipeline.hpp"
#include "ovsc/scoring.hpp"
#include "ovsc/speaker_count.hpp"

namespace ovsc {

nlohmann::json to_json(const EigengapReport& report);
nlohmann::json to_json(const DerBreakdown& der);
nlohmann::json to_json(const DiarizeResult& result);
nlohmann::json to_json(const DurationConfig& cfg);

/// Write a matrix as comma-separated rows with round-trip precision.
void write_csv(const Matrix& m, const std::string& path);

}  // namespace ovsc
