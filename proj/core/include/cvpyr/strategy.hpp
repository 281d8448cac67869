#pragma once

#include <string>
#include <string_view>

namespace cvpyr {

/// How a stage chooses its depth hypotheses.
enum class Strategy {
  kUniform,           // DHS1: uniform over the whole range (or a handcrafted window)
  kVarianceInterval,  // DHS2: confidence interval from the previous distribution's variance
  kEpipolar,          // DHS3: window sized by one-pixel epipolar depth steps
};

/// Which strategies the coarse-to-fine loop may use after stage 1.
enum class Schedule {
  kFull,          // DHS1, DHS2, then DHS3
  kUniformOnly,   // DHS1 at every stage, handcrafted halving windows
  kUniformThenVariance,  // DHS1, then DHS2 at every later stage
  kUniformThenEpipolar,  // DHS1, then DHS3 at every later stage
};

/// Accepts "full", "dhs1", "dhs1+dhs2", "dhs1+dhs3" and "dhs1+dhs2+dhs3"
/// (case-insensitive). Throws InputError otherwise.
Schedule parse_schedule(std::string_view name);
std::string to_string(Schedule schedule);
std::string to_string(Strategy strategy);

}  // namespace cvpyr
