#pragma once

// Judge-side behavior: turn classification and grading, checkpoint tracking,
// reward-mode targeting, user simulation, and single-turn answer scoring.

#include "askeval/core.hpp"
#include "askeval/gateway.hpp"
#include "askeval/templates.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace askeval {

enum class JudgeMode { standard, hard, reward };

/// The judge could not produce a usable verdict within its retry budget.
struct Skip {
    std::string cause;
    bool operator==(const Skip&) const = default;
};

using JudgeResult = std::variant<JudgeVerdict, Skip>;

class VerdictParseError : public Error {
  public:
    using Error::Error;
};

/// Everything a judge-side call needs besides the dialogue itself.
struct CallContext {
    ChatBackend* backend = nullptr;
    RoleParams params;
    const TemplateSet* templates = &TemplateSet::builtin();
    int retry_budget = 3;
    CallCounter* counter = nullptr;
    std::optional<std::int64_t> seed;
};

inline constexpr const char* kJudgeChannel = "judge";
inline constexpr const char* kRewardJudgeChannel = "reward_judge";
inline constexpr const char* kSimulatorChannel = "simulator";
inline constexpr const char* kSingleTurnChannel = "single_judge";

std::string render_conversation(const std::vector<Turn>& turns);
std::string render_rubric(const Instance& instance);
std::string rubric_header(Dimension dimension);

std::string render_judge_prompt(const Instance& instance, const std::vector<Turn>& turns, JudgeMode mode,
                                const TemplateSet& templates = TemplateSet::builtin());

/// Parses and validates a judge reply. Rubric references are mapped onto the
/// instance's checkpoint texts; anything unmatched is a parse failure.
JudgeVerdict parse_verdict(std::string_view raw, const Instance& instance, JudgeMode mode);

JudgeResult judge_turn(const Instance& instance, const std::vector<Turn>& turns, JudgeMode mode,
                       const CallContext& ctx, const char* channel = kJudgeChannel);

/// Reward-mode verdict: additionally names the checkpoints targeted by the
/// latest assistant turn.
JudgeResult judge_turn_reward(const Instance& instance, const std::vector<Turn>& turns, const CallContext& ctx);

std::string render_simulator_prompt(const Instance& instance, const std::vector<Turn>& turns,
                                    std::string_view assistant_question,
                                    const TemplateSet& templates = TemplateSet::builtin());

/// Replies as the user. Transport failures propagate as RetryExhausted.
std::string simulate_user(const Instance& instance, const std::vector<Turn>& turns,
                          std::string_view assistant_question, const CallContext& ctx);

enum class SingleTurnVerdict { correct, incorrect };
using SingleTurnResult = std::variant<SingleTurnVerdict, Skip>;

struct SingleTurnOptions {
    // Multiple-choice items must end with a single explicit option line.
    bool multiple_choice = false;
};

/// True when the last nonblank line names exactly one option letter A-J,
/// optionally prefixed by "Answer:" / "Final Answer:" and wrapped in brackets.
bool has_explicit_option(std::string_view response);

SingleTurnResult score_single_turn(std::string_view question, std::string_view reference,
                                   std::string_view candidate, const CallContext& ctx,
                                   const SingleTurnOptions& options = {}, const std::string& item_id = "item");

}  // namespace askeval
