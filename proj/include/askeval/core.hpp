#pragma once

// Domain types shared by every stage of the harness. No I/O lives here.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace askeval {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Raised when a value object violates one of its invariants.
class ValidationError : public Error {
  public:
    ValidationError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

  private:
    std::string field_;
};

enum class Dimension { ask_mind, ask_overconfidence, behavior };
enum class CheckpointKind { missing_info, misleading_claim };
enum class Resolver { user_provides, assistant_corrects };
enum class Correctness { correct, wrong, undetermined };
enum class Role { system, user, assistant };
enum class Protocol { standard, hard };
enum class Guidance { none, weak, strong };
enum class PromptMode { plain, fata, self_alert };
enum class Clarity { vague, clear };

// `ungraded` is the terminal state of behavior-only dialogues that end in a
// direct response; there is no reference answer to grade against.
enum class Outcome { correct, wrong, still_asking, skipped, protocol_violation, ungraded };

std::string_view to_string(Dimension d);
std::string_view to_string(CheckpointKind k);
std::string_view to_string(Correctness c);
std::string_view to_string(Role r);
std::string_view to_string(Protocol p);
std::string_view to_string(Guidance g);
std::string_view to_string(PromptMode m);
std::string_view to_string(Clarity c);
std::string_view to_string(Outcome o);

// Parsers accept the canonical spelling produced by to_string plus the short
// CLI aliases (e.g. "mind", "overconfidence"). Unknown text throws ValidationError.
Dimension parse_dimension(std::string_view s);
CheckpointKind parse_checkpoint_kind(std::string_view s);
Correctness parse_correctness(std::string_view s);
Role parse_role(std::string_view s);
Protocol parse_protocol(std::string_view s);
Guidance parse_guidance(std::string_view s);
PromptMode parse_prompt_mode(std::string_view s);
Clarity parse_clarity(std::string_view s);
Outcome parse_outcome(std::string_view s);

Resolver resolver_for(CheckpointKind kind) noexcept;
CheckpointKind checkpoint_kind_for(Dimension d);

struct QAPair {
    std::string id;
    std::string domain;
    std::string query;
    std::string answer;

    bool operator==(const QAPair&) const = default;
};

struct Checkpoint {
    std::string text;
    CheckpointKind kind = CheckpointKind::missing_info;

    [[nodiscard]] Resolver resolver() const noexcept { return resolver_for(kind); }
    bool operator==(const Checkpoint&) const = default;
};

struct Instance {
    std::string id;
    Dimension dimension = Dimension::ask_mind;
    std::string domain;
    std::string original_query;
    std::string answer;
    std::string variant_query;
    std::string variant_summary;
    std::vector<Checkpoint> checkpoints;
    // Behavior-only items carry a vague/clear label instead of checkpoints.
    std::optional<Clarity> label;
    // Corrected final-answer text produced by the direct-answer flow for
    // training instances; never set on evaluation instances.
    std::optional<std::string> reference_solution;

    [[nodiscard]] std::size_t rubric_size() const noexcept { return checkpoints.size(); }
    [[nodiscard]] bool graded() const noexcept { return dimension != Dimension::behavior; }
    bool operator==(const Instance&) const = default;
};

struct Turn {
    int index = 0;
    Role role = Role::user;
    std::string text;

    bool operator==(const Turn&) const = default;
};

struct JudgeVerdict {
    bool is_final_answer = false;
    Correctness correctness = Correctness::undetermined;
    bool all_resolved = false;
    std::vector<std::string> missing_checkpoints;
    // Present only for reward-mode verdicts.
    std::optional<std::vector<std::string>> targeted_checkpoints;
    std::optional<std::string> notes;

    [[nodiscard]] std::size_t targeted_count() const noexcept {
        return targeted_checkpoints ? targeted_checkpoints->size() : 0;
    }
    bool operator==(const JudgeVerdict&) const = default;
};

struct RoleParams {
    std::string model;
    double temperature = 0.0;
    int max_tokens = 2048;

    bool operator==(const RoleParams&) const = default;
};

struct ConfigSnapshot {
    Protocol protocol = Protocol::standard;
    Guidance guidance = Guidance::none;
    PromptMode prompt_mode = PromptMode::plain;
    int max_turns = 3;
    bool reward_mode = false;
    std::uint64_t seed = 0;
    RoleParams policy;
    RoleParams judge;
    RoleParams simulator;

    bool operator==(const ConfigSnapshot&) const = default;
};

struct DialogueTrace {
    std::string instance_id;
    Dimension dimension = Dimension::ask_mind;
    std::string domain;
    std::optional<Clarity> label;
    Protocol protocol = Protocol::standard;
    ConfigSnapshot config;
    std::vector<Turn> turns;
    std::vector<JudgeVerdict> verdicts;
    Outcome outcome = Outcome::skipped;
    bool resolved_all_before_answer = false;
    bool asked_after_all_resolved = false;
    std::optional<std::string> skip_cause;

    [[nodiscard]] std::size_t assistant_turn_count() const noexcept;
    [[nodiscard]] std::size_t clarifying_turn_count() const noexcept;
    [[nodiscard]] bool skipped() const noexcept { return outcome == Outcome::skipped; }
    [[nodiscard]] bool answered() const noexcept {
        return outcome == Outcome::correct || outcome == Outcome::wrong ||
               outcome == Outcome::protocol_violation;
    }
    bool operator==(const DialogueTrace&) const = default;
};

struct TurnReward {
    int turn_index = 0;
    double reward = 0.0;
    std::string case_tag;

    bool operator==(const TurnReward&) const = default;
};

struct RewardTrajectory {
    std::string instance_id;
    std::size_t trace_line = 0;
    std::size_t rubric_size = 0;
    Outcome terminal_decision = Outcome::wrong;
    std::vector<TurnReward> per_turn_rewards;

    bool operator==(const RewardTrajectory&) const = default;
};

/// Whitespace normalization used for every verbatim rubric comparison: trims
/// both ends and collapses internal whitespace runs to one space.
std::string normalize_whitespace(std::string_view text);

/// Returns the checkpoint whose normalized text equals the normalized candidate.
std::optional<Checkpoint> checkpoint_match(std::string_view candidate, const Instance& instance);

void validate(const QAPair& pair);
void validate(const Checkpoint& checkpoint);
void validate(const Instance& instance);
void validate(const Turn& turn);
void validate_dialogue_turns(const std::vector<Turn>& turns);

/// Checks the verdict's self-consistency and that every referenced rubric text
/// is one of the instance's checkpoints.
void validate(const JudgeVerdict& verdict, const Instance& instance);
void validate(const DialogueTrace& trace);
void validate(const RewardTrajectory& trajectory);

/// Ensures ids are unique across a corpus.
void validate_unique_ids(const std::vector<QAPair>& pairs);
void validate_unique_ids(const std::vector<Instance>& instances);

/// Stable 64-bit seed for one item, independent of platform and run.
std::uint64_t derive_seed(std::uint64_t base_seed, std::string_view item_id) noexcept;

}  // namespace askeval
