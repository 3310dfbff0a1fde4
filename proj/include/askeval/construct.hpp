#pragma once

// Converts QA pairs into ask-before-answer instances through templated model
// calls with strict payload validation, regeneration, and discard.

#include "askeval/adjudicate.hpp"
#include "askeval/core.hpp"
#include "askeval/gateway.hpp"
#include "askeval/templates.hpp"

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace askeval {

enum class DiscardCause {
    malformed,          // no structured block at all
    missing_key,
    bad_structure,      // wrong JSON type for a field
    empty_list,         // empty checkpoint list, or empty text anywhere
    duplicate_entries,
    variant_unchanged,  // query variant equals the original query
    backend_failure,
};

std::string_view to_string(DiscardCause cause);

class MalformedPayload : public Error {
  public:
    MalformedPayload(DiscardCause cause, std::string field, const std::string& detail)
        : Error(std::string(to_string(cause)) + " (" + field + "): " + detail),
          cause_(cause),
          field_(std::move(field)) {}

    [[nodiscard]] DiscardCause cause() const noexcept { return cause_; }
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

  private:
    DiscardCause cause_;
    std::string field_;
};

class InsufficientPool : public Error {
  public:
    InsufficientPool(std::string domain, std::size_t available, std::size_t requested);

    [[nodiscard]] const std::string& domain() const noexcept { return domain_; }
    [[nodiscard]] std::size_t available() const noexcept { return available_; }
    [[nodiscard]] std::size_t requested() const noexcept { return requested_; }

  private:
    std::string domain_;
    std::size_t available_;
    std::size_t requested_;
};

/// Validated construction reply. `summary` holds degraded_info or
/// overconfidence_info; `criteria` the rubric_criteria or misleading_points;
/// `question` the degraded or overconfident query.
struct ConstructionPayload {
    Dimension dimension = Dimension::ask_mind;
    std::string summary;
    std::vector<std::string> criteria;
    std::string question;

    bool operator==(const ConstructionPayload&) const = default;
};

struct PayloadKeys {
    const char* summary;
    const char* criteria;
    const char* question;
};
PayloadKeys payload_keys(Dimension dimension);

ConstructionPayload parse_payload(std::string_view raw, Dimension dimension);
/// Raw JSON text accepted by parse_payload.
std::string serialize_payload(const ConstructionPayload& payload);

struct Discarded {
    std::string pair_id;
    std::string domain;
    DiscardCause cause = DiscardCause::malformed;
    std::string detail;
    int attempts = 0;
};

using BuildResult = std::variant<Instance, Discarded>;

struct ConstructOptions {
    int retry_budget = 3;
    RoleParams params{"constructor", 0.7, 2048};
    const TemplateSet* templates = &TemplateSet::builtin();
};

inline constexpr const char* kConstructChannel = "construct";

/// AskMind variant: blurs intent-critical details and lists them as rubric criteria.
BuildResult degrade(const QAPair& pair, ChatBackend& backend, const ConstructOptions& options = {});

/// AskOverconfidence variant: keeps the givens and injects misleading claims.
BuildResult inject_overconfidence(const QAPair& pair, ChatBackend& backend, const ConstructOptions& options = {});

BuildResult construct_instance(const QAPair& pair, Dimension dimension, ChatBackend& backend,
                               const ConstructOptions& options = {});

struct DomainBuildStats {
    std::size_t attempted = 0;
    std::size_t valid = 0;
    std::size_t discarded = 0;
};

struct BuildReport {
    std::vector<Instance> instances;  // input order
    std::vector<Discarded> discarded; // input order
    std::map<std::string, DomainBuildStats> per_domain;
};

BuildReport build_instances(const std::vector<QAPair>& pairs, Dimension dimension, ChatBackend& backend,
                            const ConstructOptions& options, std::size_t parallelism);

/// Exactly k instances per domain, chosen uniformly with the given seed and
/// returned in input order.
std::vector<Instance> sample_per_domain(const std::vector<Instance>& instances, std::size_t k, std::uint64_t seed);

/// Writes the instance file atomically; returns the number of records.
std::size_t export_instances(const std::vector<Instance>& instances, const std::string& destination);
std::vector<Instance> import_instances(const std::string& source);

// ---------------------------------------------------------------------------
// Training-data construction modes.

struct TrainingBackends {
    ChatBackend* assistant = nullptr;
    ChatBackend* user = nullptr;
    ChatBackend* checker = nullptr;
    ChatBackend* judge = nullptr;
};

struct TrainingOptions {
    int max_questions = 3;
    int retry_budget = 3;
    RoleParams assistant_params{"assistant", 0.7, 2048};
    RoleParams judge_params{"judge", 0.0, 2048};
    const TemplateSet* templates = &TemplateSet::builtin();
};

enum class TrainingFailure { none, insufficient_asking, reasoning_error };

struct CoverageCheck {
    bool all_covered = false;
    std::vector<std::string> missing;
};

/// Parses a coverage-checker reply; missing items must be instance checkpoints.
CoverageCheck parse_coverage(std::string_view raw, const Instance& instance);

struct TrainingDialogue {
    std::string instance_id;
    std::vector<Turn> turns;
    bool covered = false;
    std::string final_answer;
    bool judged_correct = false;
    TrainingFailure failure = TrainingFailure::none;
    // Final answer was replaced by the force-correction rewrite.
    bool corrected = false;
};

/// Synthetic ask-then-answer rollout: initial question, follow-ups on
/// still-missing items, a combined question on the last asking turn, then a
/// final answer that is judged and force-corrected when wrong.
TrainingDialogue synthesize_training_dialogue(const Instance& instance, const TrainingBackends& backends,
                                              const TrainingOptions& options = {});

struct DirectAnswerResult {
    std::string answer;
    bool reconstructed = false;
};

/// One-shot structured answer to the original query; when judged wrong, it is
/// replaced by a reconstruction that agrees with the reference answer.
DirectAnswerResult direct_answer_with_correction(const QAPair& pair, ChatBackend& answerer, ChatBackend& judge,
                                                 const TrainingOptions& options = {});

/// Attaches the direct-answer reference solution to a training instance.
Instance attach_reference_solution(Instance instance, const DirectAnswerResult& result);

}  // namespace askeval
