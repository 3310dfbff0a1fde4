#pragma once

// The multi-turn ask-before-answer protocol: policy replies, the judge
// classifies and grades, and the user simulator answers clarifying questions
// until a final answer or the turn budget ends the dialogue.

#include "askeval/adjudicate.hpp"
#include "askeval/core.hpp"
#include "askeval/gateway.hpp"
#include "askeval/templates.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace askeval {

struct LoopConfig {
    Protocol protocol = Protocol::standard;
    int max_turns = 3;
    Guidance guidance = Guidance::none;
    PromptMode prompt_mode = PromptMode::plain;
    // Judge every turn in reward mode so verdicts carry targeted checkpoints.
    bool reward_mode = false;
    int retry_budget = 3;
    std::uint64_t seed = 0;

    std::shared_ptr<ChatBackend> policy;
    std::shared_ptr<ChatBackend> judge;
    std::shared_ptr<ChatBackend> simulator;
    RoleParams policy_params{"policy", 0.7, 2048};
    RoleParams judge_params{"judge", 0.0, 2048};
    RoleParams simulator_params{"simulator", 0.0, 2048};

    const TemplateSet* templates = &TemplateSet::builtin();

    /// Standard protocol with the default three-turn budget.
    static LoopConfig standard();
    /// Strict two-turn protocol.
    static LoopConfig hard();
};

inline constexpr const char* kPolicyChannel = "policy";

void validate(const LoopConfig& config);
ConfigSnapshot snapshot(const LoopConfig& config);

/// First user message for the configured guidance and prompt mode.
std::string compose_first_message(const Instance& instance, const LoopConfig& config);

DialogueTrace run_dialogue(const Instance& instance, const LoopConfig& config);

/// One trace per instance, in input order, for any parallelism. Failures of a
/// single dialogue become skipped traces and never abort the batch.
/// Called after each finished dialogue with (finished, total); calls are serialized.
using ProgressFn = std::function<void(std::size_t, std::size_t)>;

std::vector<DialogueTrace> run_batch(const std::vector<Instance>& instances, const LoopConfig& config,
                                     std::size_t parallelism, const ProgressFn& progress = {});

}  // namespace askeval
