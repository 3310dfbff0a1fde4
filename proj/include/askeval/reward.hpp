#pragma once

// Rubric-derived turn rewards for verifier-based RL, and pass-rate bucketing
// of training items.

#include "askeval/core.hpp"

#include <map>
#include <string>
#include <vector>

namespace askeval {

class InvalidObservation : public Error {
  public:
    using Error::Error;
};
class AlignmentError : public Error {
  public:
    using Error::Error;
};
class SkippedTrace : public Error {
  public:
    using Error::Error;
};
class BadEdges : public Error {
  public:
    using Error::Error;
};

/// What the judge reports about one non-final turn.
struct TurnObservation {
    bool answered = false;     // the turn was a final answer
    std::size_t targeted = 0;  // rubric items explicitly asked about
    std::size_t rubric_size = 1;
};

/// Reward constants. Defaults are the shared hand-set weights; an override
/// exists for experiments but every default run uses these values.
struct RewardWeights {
    double premature_answer = -2.0;
    double untargeted_ask = -0.8;
    double partial_target = 0.8;
    double full_target = 1.0;
    double terminal_correct = 1.0;
    double terminal_wrong = -1.0;
    double terminal_still_asking = -2.0;
};

struct ScoredTurn {
    double reward = 0.0;
    std::string case_tag;
};

ScoredTurn score_intermediate(const TurnObservation& obs, const RewardWeights& w = {});
ScoredTurn score_terminal(Outcome decision, const RewardWeights& w = {});

double intermediate_reward(const TurnObservation& obs, const RewardWeights& w = {});
/// Accepts correct, wrong, still_asking; protocol_violation maps to wrong.
double terminal_reward(Outcome decision, const RewardWeights& w = {});

/// Terminal decision for a finished trace (protocol_violation becomes wrong).
Outcome terminal_decision(const DialogueTrace& trace);

/// Attaches one reward per assistant turn: intermediate rewards for every
/// non-final turn from the reward-mode verdicts, and the terminal reward on
/// the last assistant turn from the trace outcome.
RewardTrajectory annotate_trajectory(const DialogueTrace& trace, const std::vector<JudgeVerdict>& reward_verdicts,
                                     std::size_t rubric_size, std::size_t trace_line = 0,
                                     const RewardWeights& w = {});

struct KeepRange {
    double lo = 0.0;
    double hi = 1.0;
    bool lo_inclusive = false;
    bool hi_inclusive = false;

    [[nodiscard]] bool keeps(double p) const noexcept;
};

struct PassRateBucket {
    std::string item_id;
    double pass_rate = 0.0;
    std::size_t correct = 0;
    std::size_t total = 0;
    std::string label;  // "[lo,hi)" of the bucket, or "rejected"
    bool rejected = false;

    bool operator==(const PassRateBucket&) const = default;
};

/// Bucket boundaries e_0 < e_1 < ... < e_n. Buckets are [e_i, e_{i+1}),
/// except the last, which is closed on the right.
std::vector<double> default_bucket_edges();

std::vector<PassRateBucket> bucket_by_pass_rate(const std::map<std::string, std::vector<Outcome>>& item_rollouts,
                                                const std::vector<double>& edges = default_bucket_edges(),
                                                const KeepRange& keep = {});

}  // namespace askeval
