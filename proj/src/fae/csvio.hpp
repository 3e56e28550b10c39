#pragma once

#include <string>
#include <vector>

#include "fae/detector.hpp"
#include "fae/latent.hpp"
#include "fae/trainer.hpp"

namespace fae {

// All writers emit the documented column schemas, floats at 17 significant
// digits, and write atomically (temp file + rename).

void write_detection_csv(const DetectionResult& result,
                         const std::string& path);

void write_history_csv(const TrainHistory& history, const std::string& path);

void write_leaderboard_csv(const std::vector<TrialResult>& leaderboard,
                           const std::string& path);

void write_zeroshot_csv(const std::vector<ZeroShotSeriesReport>& rows,
                        const std::string& path);

void write_latent_csv(const std::vector<AnnotatedRow>& rows,
                      const std::string& path);

void write_eval_csv(const std::vector<EvalRow>& rows, const std::string& path);

}  // namespace fae
