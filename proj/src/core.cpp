#include "askeval/core.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <utility>

namespace askeval {
namespace {

template <typename E, std::size_t N>
using NameTable = std::array<std::pair<E, std::string_view>, N>;

constexpr NameTable<Dimension, 3> kDimensions{{
    {Dimension::ask_mind, "AskMind"},
    {Dimension::ask_overconfidence, "AskOverconfidence"},
    {Dimension::behavior, "Behavior"},
}};
constexpr NameTable<CheckpointKind, 2> kKinds{{
    {CheckpointKind::missing_info, "missing_info"},
    {CheckpointKind::misleading_claim, "misleading_claim"},
}};
constexpr NameTable<Correctness, 3> kCorrectness{{
    {Correctness::correct, "correct"},
    {Correctness::wrong, "wrong"},
    {Correctness::undetermined, "undetermined"},
}};
constexpr NameTable<Role, 3> kRoles{{
    {Role::system, "system"},
    {Role::user, "user"},
    {Role::assistant, "assistant"},
}};
constexpr NameTable<Protocol, 2> kProtocols{{
    {Protocol::standard, "standard"},
    {Protocol::hard, "hard"},
}};
constexpr NameTable<Guidance, 3> kGuidance{{
    {Guidance::none, "none"},
    {Guidance::weak, "weak"},
    {Guidance::strong, "strong"},
}};
constexpr NameTable<PromptMode, 3> kPromptModes{{
    {PromptMode::plain, "plain"},
    {PromptMode::fata, "fata"},
    {PromptMode::self_alert, "self_alert"},
}};
constexpr NameTable<Clarity, 2> kClarity{{
    {Clarity::vague, "vague"},
    {Clarity::clear, "clear"},
}};
constexpr NameTable<Outcome, 6> kOutcomes{{
    {Outcome::correct, "correct"},
    {Outcome::wrong, "wrong"},
    {Outcome::still_asking, "still_asking"},
    {Outcome::skipped, "skipped"},
    {Outcome::protocol_violation, "protocol_violation"},
    {Outcome::ungraded, "ungraded"},
}};

template <typename E, std::size_t N>
std::string_view name_of(const NameTable<E, N>& table, E value) {
    for (const auto& [v, name] : table) {
        if (v == value) return name;
    }
    return "?";
}

template <typename E, std::size_t N>
std::optional<E> lookup(const NameTable<E, N>& table, std::string_view s) {
    for (const auto& [v, name] : table) {
        if (name == s) return v;
    }
    return std::nullopt;
}

template <typename E, std::size_t N>
E parse_or_throw(const NameTable<E, N>& table, std::string_view s, const char* field) {
    if (auto v = lookup(table, s)) return *v;
    throw ValidationError(field, "unknown value '" + std::string(s) + "'");
}

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

void require(bool ok, const char* field, const char* what) {
    if (!ok) throw ValidationError(field, what);
}

bool contains_rubric_text(const Instance& instance, const std::string& text) {
    return std::any_of(instance.checkpoints.begin(), instance.checkpoints.end(),
                       [&](const Checkpoint& c) { return c.text == text; });
}

}  // namespace

std::string_view to_string(Dimension d) { return name_of(kDimensions, d); }
std::string_view to_string(CheckpointKind k) { return name_of(kKinds, k); }
std::string_view to_string(Correctness c) { return name_of(kCorrectness, c); }
std::string_view to_string(Role r) { return name_of(kRoles, r); }
std::string_view to_string(Protocol p) { return name_of(kProtocols, p); }
std::string_view to_string(Guidance g) { return name_of(kGuidance, g); }
std::string_view to_string(PromptMode m) { return name_of(kPromptModes, m); }
std::string_view to_string(Clarity c) { return name_of(kClarity, c); }
std::string_view to_string(Outcome o) { return name_of(kOutcomes, o); }

Dimension parse_dimension(std::string_view s) {
    if (s == "mind") return Dimension::ask_mind;
    if (s == "overconfidence") return Dimension::ask_overconfidence;
    if (s == "behavior") return Dimension::behavior;
    return parse_or_throw(kDimensions, s, "dimension");
}
CheckpointKind parse_checkpoint_kind(std::string_view s) { return parse_or_throw(kKinds, s, "kind"); }
Correctness parse_correctness(std::string_view s) { return parse_or_throw(kCorrectness, s, "correctness"); }
Role parse_role(std::string_view s) { return parse_or_throw(kRoles, s, "role"); }
Protocol parse_protocol(std::string_view s) { return parse_or_throw(kProtocols, s, "protocol"); }
Guidance parse_guidance(std::string_view s) { return parse_or_throw(kGuidance, s, "guidance"); }
PromptMode parse_prompt_mode(std::string_view s) { return parse_or_throw(kPromptModes, s, "prompt_mode"); }
Clarity parse_clarity(std::string_view s) { return parse_or_throw(kClarity, s, "label"); }
Outcome parse_outcome(std::string_view s) { return parse_or_throw(kOutcomes, s, "outcome"); }

Resolver resolver_for(CheckpointKind kind) noexcept {
    return kind == CheckpointKind::missing_info ? Resolver::user_provides : Resolver::assistant_corrects;
}

CheckpointKind checkpoint_kind_for(Dimension d) {
    switch (d) {
        case Dimension::ask_mind: return CheckpointKind::missing_info;
        case Dimension::ask_overconfidence: return CheckpointKind::misleading_claim;
        case Dimension::behavior: break;
    }
    throw ValidationError("dimension", "behavior items carry no checkpoints");
}

std::size_t DialogueTrace::assistant_turn_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(turns.begin(), turns.end(), [](const Turn& t) { return t.role == Role::assistant; }));
}

std::size_t DialogueTrace::clarifying_turn_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(verdicts.begin(), verdicts.end(), [](const JudgeVerdict& v) { return !v.is_final_answer; }));
}

std::string normalize_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

std::optional<Checkpoint> checkpoint_match(std::string_view candidate, const Instance& instance) {
    const std::string needle = normalize_whitespace(candidate);
    if (needle.empty()) return std::nullopt;
    for (const auto& cp : instance.checkpoints) {
        if (normalize_whitespace(cp.text) == needle) return cp;
    }
    return std::nullopt;
}

void validate(const QAPair& pair) {
    require(!pair.id.empty(), "id", "must be nonempty");
    require(!normalize_whitespace(pair.query).empty(), "query", "must be nonempty");
    require(!normalize_whitespace(pair.answer).empty(), "answer", "must be nonempty");
}

void validate(const Checkpoint& checkpoint) {
    require(!normalize_whitespace(checkpoint.text).empty(), "checkpoints.text", "must be nonempty");
}

void validate(const Instance& instance) {
    require(!instance.id.empty(), "id", "must be nonempty");
    require(!normalize_whitespace(instance.variant_query).empty(), "variant_query", "must be nonempty");

    if (instance.dimension == Dimension::behavior) {
        require(instance.checkpoints.empty(), "checkpoints", "behavior items carry no checkpoints");
        require(instance.label.has_value(), "label", "behavior items need a vague/clear label");
        return;
    }

    require(!instance.label.has_value(), "label", "only behavior items carry a label");
    require(!normalize_whitespace(instance.original_query).empty(), "original_query", "must be nonempty");
    require(!normalize_whitespace(instance.answer).empty(), "answer", "must be nonempty");
    require(normalize_whitespace(instance.variant_query) != normalize_whitespace(instance.original_query),
            "variant_query", "must differ from original_query");
    require(!instance.checkpoints.empty(), "checkpoints", "must be nonempty");

    const CheckpointKind expected = checkpoint_kind_for(instance.dimension);
    std::set<std::string> seen;
    for (const auto& cp : instance.checkpoints) {
        validate(cp);
        require(cp.kind == expected, "checkpoints.kind", "inconsistent with dimension");
        require(seen.insert(normalize_whitespace(cp.text)).second, "checkpoints", "duplicate checkpoint text");
    }
}

void validate(const Turn& turn) {
    require(turn.index >= 1, "turns.index", "must be 1-based");
}

void validate_dialogue_turns(const std::vector<Turn>& turns) {
    int last = 0;
    bool seen_non_system = false;
    for (const auto& t : turns) {
        validate(t);
        require(t.index > last, "turns.index", "must be strictly increasing");
        last = t.index;
        if (!seen_non_system && t.role != Role::system) {
            require(t.role == Role::user, "turns", "first non-system turn must be a user turn");
            seen_non_system = true;
        }
    }
}

void validate(const JudgeVerdict& verdict, const Instance& instance) {
    if (!verdict.is_final_answer) {
        require(verdict.correctness == Correctness::undetermined, "is_correct",
                "must be undetermined for a clarifying turn");
    }
    require(verdict.all_resolved == verdict.missing_checkpoints.empty(), "all_rubric_criteria_resolved",
            "must be true exactly when no checkpoint is missing");
    for (const auto& text : verdict.missing_checkpoints) {
        require(contains_rubric_text(instance, text), "missing_rubric_criteria", "not an instance checkpoint");
    }
    if (verdict.targeted_checkpoints) {
        for (const auto& text : *verdict.targeted_checkpoints) {
            require(contains_rubric_text(instance, text), "targeted_rubric_criteria", "not an instance checkpoint");
        }
    }
}

void validate(const DialogueTrace& trace) {
    require(!trace.instance_id.empty(), "instance_id", "must be nonempty");
    validate_dialogue_turns(trace.turns);
    require(trace.skipped() == trace.skip_cause.has_value(), "skip_cause", "present exactly on skipped traces");
    if (!trace.skipped()) {
        require(trace.verdicts.size() == trace.assistant_turn_count(), "verdicts",
                "one verdict per assistant turn");
    } else {
        require(trace.verdicts.size() <= trace.assistant_turn_count(), "verdicts",
                "more verdicts than assistant turns");
    }
}

void validate(const RewardTrajectory& trajectory) {
    require(!trajectory.per_turn_rewards.empty(), "per_turn_rewards", "must be nonempty");
    for (const auto& r : trajectory.per_turn_rewards) {
        require(r.reward >= -2.0 && r.reward <= 1.0, "reward", "outside [-2, 1]");
    }
    const auto terminal = std::count_if(trajectory.per_turn_rewards.begin(), trajectory.per_turn_rewards.end(),
                                        [](const TurnReward& r) { return r.case_tag.rfind("terminal_", 0) == 0; });
    require(terminal == 1, "per_turn_rewards", "exactly one terminal reward");
    require(trajectory.per_turn_rewards.back().case_tag.rfind("terminal_", 0) == 0, "per_turn_rewards",
            "terminal reward must be last");
}

void validate_unique_ids(const std::vector<QAPair>& pairs) {
    std::set<std::string_view> ids;
    for (const auto& p : pairs) {
        require(ids.insert(p.id).second, "id", "duplicate id in corpus");
    }
}

void validate_unique_ids(const std::vector<Instance>& instances) {
    std::set<std::string_view> ids;
    for (const auto& i : instances) {
        require(ids.insert(i.id).second, "id", "duplicate id in corpus");
    }
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::string_view item_id) noexcept {
    // FNV-1a over the little-endian seed bytes followed by the id.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](unsigned char b) {
        h ^= b;
        h *= 0x100000001b3ULL;
    };
    for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>(base_seed >> (8 * i)));
    for (char c : item_id) mix(static_cast<unsigned char>(c));
    return h;
}

}  // namespace askeval
