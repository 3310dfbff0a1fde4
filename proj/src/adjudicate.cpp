#include "askeval/adjudicate.hpp"

#include "askeval/structured.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace askeval {
namespace {

constexpr const char* kResolutionUserProvides =
    "A checkpoint counts as resolved only if the user has explicitly provided or confirmed that information.";
constexpr const char* kResolutionAssistantCorrects =
    "A checkpoint counts as resolved only if the assistant has explicitly identified that misleading claim and "
    "provided a correction.";

constexpr const char* kHardRules =
    "\n4. Strict protocol: treat any message that attempts a solution, proposes a candidate answer, or commits to a "
    "conclusion as a final answer, even if it also asks questions. Only a message that purely asks for information "
    "counts as a clarifying question.\n"
    "5. A final answer must commit to exactly one answer. If it proposes more than one distinct answer, set "
    "`\"is_correct\": false`.";

constexpr const char* kTargetingSchema =
    "\n  \"targeted_rubric_criteria\": [\"points from the list above that the latest assistant message explicitly "
    "asks about or corrects\"],";
constexpr const char* kTargetingRule =
    "\n- `targeted_rubric_criteria` lists only items from the provided list that the assistant's latest message "
    "explicitly targets. Use an empty array when it targets none, including when the message is a final answer.";

void require_parse(bool ok, const std::string& what) {
    if (!ok) throw VerdictParseError(what);
}

const json& require_key(const json& obj, const char* key) {
    auto it = obj.find(key);
    require_parse(it != obj.end(), std::string("missing key '") + key + "'");
    return *it;
}

/// Maps judge-quoted rubric items onto canonical checkpoint texts, in
/// checkpoint order, without duplicates.
std::vector<std::string> canonical_items(const json& arr, const Instance& instance, const char* field) {
    require_parse(arr.is_array(), std::string(field) + " must be an array");
    std::set<std::string> hits;
    for (const auto& item : arr) {
        require_parse(item.is_string(), std::string(field) + " entries must be strings");
        auto cp = checkpoint_match(item.get<std::string>(), instance);
        require_parse(cp.has_value(), std::string(field) + " names an unknown checkpoint: " + item.get<std::string>());
        hits.insert(cp->text);
    }
    std::vector<std::string> out;
    for (const auto& cp : instance.checkpoints) {
        if (hits.count(cp.text)) out.push_back(cp.text);
    }
    return out;
}

JudgeVerdict parse_behavior_verdict(const json& obj) {
    const json& final_flag = require_key(obj, "is_final_answer");
    require_parse(final_flag.is_boolean(), "is_final_answer must be boolean");
    JudgeVerdict v;
    v.is_final_answer = final_flag.get<bool>();
    v.all_resolved = true;
    if (auto it = obj.find("notes"); it != obj.end() && it->is_string()) v.notes = it->get<std::string>();
    return v;
}

std::string role_label(Role r) {
    switch (r) {
        case Role::system: return "[System]";
        case Role::user: return "[User]";
        case Role::assistant: return "[Assistant]";
    }
    return "[?]";
}

CallTag next_tag(const CallContext& ctx, const char* channel) {
    if (ctx.counter == nullptr) throw Error("judge call without a call counter");
    return ctx.counter->next(channel);
}

ChatRequest make_request(const CallContext& ctx, std::string prompt, CallTag tag) {
    if (ctx.backend == nullptr) throw ConfigError("judge-side backend is not configured");
    ChatRequest req;
    req.model_id = ctx.params.model;
    req.temperature = ctx.params.temperature;
    req.max_tokens = ctx.params.max_tokens;
    req.seed = ctx.seed;
    req.messages.push_back({Role::user, std::move(prompt)});
    req.tag = std::move(tag);
    return req;
}

std::string trim(std::string_view s) {
    return normalize_whitespace(s);
}

}  // namespace

std::string render_conversation(const std::vector<Turn>& turns) {
    std::string out;
    for (const auto& t : turns) {
        if (!out.empty()) out += "\n\n";
        out += role_label(t.role);
        out += "\n";
        out += t.text;
    }
    return out;
}

std::string render_rubric(const Instance& instance) {
    if (instance.checkpoints.empty()) return "(no rubric criteria)";
    std::string out;
    for (const auto& cp : instance.checkpoints) {
        if (!out.empty()) out += "\n";
        out += "- " + cp.text;
    }
    return out;
}

std::string rubric_header(Dimension dimension) {
    switch (dimension) {
        case Dimension::ask_mind: return "Scenario checkpoints: missing information the user must provide";
        case Dimension::ask_overconfidence:
            return "Scenario checkpoints: misleading claims the assistant must explicitly correct";
        case Dimension::behavior: break;
    }
    return "Scenario checkpoints";
}

std::string render_judge_prompt(const Instance& instance, const std::vector<Turn>& turns, JudgeMode mode,
                                const TemplateSet& templates) {
    if (instance.dimension == Dimension::behavior) {
        return templates.render("judge_behavior", {
                                                      {"scenario_question", instance.variant_query},
                                                      {"conversation_history", render_conversation(turns)},
                                                  });
    }
    const bool corrects = instance.dimension == Dimension::ask_overconfidence;
    return templates.render(
        "judge", {
                     {"ground_truth_answer", instance.answer},
                     {"ori_question", instance.original_query},
                     {"scenario_question", instance.variant_query},
                     {"scenario_context", instance.variant_summary},
                     {"rubric_header", rubric_header(instance.dimension)},
                     {"rubric_criteria", render_rubric(instance)},
                     {"conversation_history", render_conversation(turns)},
                     {"resolution_rule", corrects ? kResolutionAssistantCorrects : kResolutionUserProvides},
                     {"mode_rules", mode == JudgeMode::hard ? kHardRules : ""},
                     {"targeting_schema", mode == JudgeMode::reward ? kTargetingSchema : ""},
                     {"targeting_rule", mode == JudgeMode::reward ? kTargetingRule : ""},
                 });
}

JudgeVerdict parse_verdict(std::string_view raw, const Instance& instance, JudgeMode mode) {
    auto obj = extract_json_object(raw);
    require_parse(obj.has_value(), "no structured block in judge reply");
    if (instance.dimension == Dimension::behavior) return parse_behavior_verdict(*obj);

    JudgeVerdict v;
    const json& final_flag = require_key(*obj, "is_final_answer");
    require_parse(final_flag.is_boolean(), "is_final_answer must be boolean");
    v.is_final_answer = final_flag.get<bool>();

    const json& correct = require_key(*obj, "is_correct");
    require_parse(correct.is_boolean() || correct.is_null(), "is_correct must be boolean or null");
    if (v.is_final_answer) {
        require_parse(correct.is_boolean(), "a final answer must be graded");
        v.correctness = correct.get<bool>() ? Correctness::correct : Correctness::wrong;
    }
    // A clarifying turn is never graded, whatever the judge wrote.

    const json& resolved = require_key(*obj, "all_rubric_criteria_resolved");
    require_parse(resolved.is_boolean(), "all_rubric_criteria_resolved must be boolean");
    v.all_resolved = resolved.get<bool>();
    v.missing_checkpoints = canonical_items(require_key(*obj, "missing_rubric_criteria"), instance,
                                            "missing_rubric_criteria");
    require_parse(v.all_resolved == v.missing_checkpoints.empty(),
                  "all_rubric_criteria_resolved disagrees with missing_rubric_criteria");

    if (mode == JudgeMode::reward) {
        v.targeted_checkpoints = canonical_items(require_key(*obj, "targeted_rubric_criteria"), instance,
                                                 "targeted_rubric_criteria");
    }
    if (auto it = obj->find("notes"); it != obj->end() && it->is_string()) v.notes = it->get<std::string>();
    return v;
}

JudgeResult judge_turn(const Instance& instance, const std::vector<Turn>& turns, JudgeMode mode,
                       const CallContext& ctx, const char* channel) {
    if (turns.empty() || turns.back().role != Role::assistant) {
        throw Error("judge_turn needs the latest turn to be an assistant turn");
    }
    const std::string prompt = render_judge_prompt(instance, turns, mode, *ctx.templates);
    std::string last_error;
    for (int attempt = 0; attempt <= ctx.retry_budget; ++attempt) {
        ChatResponse resp;
        try {
            resp = complete(make_request(ctx, prompt, next_tag(ctx, channel)), *ctx.backend);
        } catch (const RetryExhausted& e) {
            return Skip{std::string("backend_failure: ") + e.what()};
        }
        if (resp.finish_reason == FinishReason::error) {
            last_error = "backend returned no content";
            continue;
        }
        try {
            return parse_verdict(resp.text, instance, mode);
        } catch (const VerdictParseError& e) {
            last_error = e.what();
        }
    }
    return Skip{"unparseable: " + last_error};
}

JudgeResult judge_turn_reward(const Instance& instance, const std::vector<Turn>& turns, const CallContext& ctx) {
    return judge_turn(instance, turns, JudgeMode::reward, ctx, kRewardJudgeChannel);
}

std::string render_simulator_prompt(const Instance& instance, const std::vector<Turn>& turns,
                                    std::string_view assistant_question, const TemplateSet& templates) {
    json knowledge = json::object();
    if (instance.graded()) knowledge["complete_request"] = instance.original_query;
    knowledge["request_as_sent"] = instance.variant_query;
    if (!instance.variant_summary.empty()) knowledge["background"] = instance.variant_summary;
    return templates.render("user_simulator", {
                                                  {"user_internal_knowledge", knowledge.dump(2)},
                                                  {"rubric_header", rubric_header(instance.dimension)},
                                                  {"rubric_criteria", render_rubric(instance)},
                                                  {"conversation_history", render_conversation(turns)},
                                                  {"assistant_question", std::string(assistant_question)},
                                              });
}

std::string simulate_user(const Instance& instance, const std::vector<Turn>& turns,
                          std::string_view assistant_question, const CallContext& ctx) {
    const std::string prompt = render_simulator_prompt(instance, turns, assistant_question, *ctx.templates);
    std::string last_error = "empty reply";
    for (int attempt = 0; attempt <= ctx.retry_budget; ++attempt) {
        ChatResponse resp = complete(make_request(ctx, prompt, next_tag(ctx, kSimulatorChannel)), *ctx.backend);
        if (resp.finish_reason != FinishReason::error && !trim(resp.text).empty()) return resp.text;
    }
    throw RetryExhausted("user simulator produced no reply: " + last_error, ctx.retry_budget + 1);
}

bool has_explicit_option(std::string_view response) {
    std::string_view last;
    std::size_t pos = 0;
    while (true) {
        const std::size_t nl = response.find('\n', pos);
        const std::string_view line =
            response.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        if (!trim(line).empty()) last = line;
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    std::string s;
    for (char c : last) {
        if (c != '*' && c != '`') s.push_back(c);
    }
    s = trim(s);
    std::string lower = s;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    for (std::string_view prefix : {"the final answer", "final answer", "the answer", "answer", "option"}) {
        if (lower.rfind(prefix, 0) == 0) {
            s = s.substr(prefix.size());
            break;
        }
    }
    s = trim(s);
    if (!s.empty() && (s.front() == ':' || s.front() == '-')) s = trim(s.substr(1));
    if (s.rfind("is ", 0) == 0) s = trim(s.substr(3));
    if (s.size() >= 2 && s.front() == '(' ) s = s.substr(1);
    while (!s.empty() && (s.back() == '.' || s.back() == ')')) s.pop_back();
    return s.size() == 1 && s[0] >= 'A' && s[0] <= 'J';
}

SingleTurnResult score_single_turn(std::string_view question, std::string_view reference,
                                   std::string_view candidate, const CallContext& ctx,
                                   const SingleTurnOptions& options, const std::string& item_id) {
    if (options.multiple_choice && !has_explicit_option(candidate)) return SingleTurnVerdict::incorrect;
    if (!trim(candidate).empty() && trim(candidate) == trim(reference)) return SingleTurnVerdict::correct;

    CallCounter local(item_id);
    CallContext call = ctx;
    if (call.counter == nullptr) call.counter = &local;

    const std::string prompt = ctx.templates->render("single_turn_judge", {
                                                                              {"ori_question", std::string(question)},
                                                                              {"ground_truth_answer", std::string(reference)},
                                                                              {"candidate_answer", std::string(candidate)},
                                                                          });
    std::string last_error = "no attempt";
    for (int attempt = 0; attempt <= call.retry_budget; ++attempt) {
        ChatResponse resp;
        try {
            resp = complete(make_request(call, prompt, next_tag(call, kSingleTurnChannel)), *call.backend);
        } catch (const RetryExhausted& e) {
            return Skip{std::string("backend_failure: ") + e.what()};
        }
        auto obj = extract_json_object(resp.text);
        if (!obj || !obj->contains("verdict") || !(*obj)["verdict"].is_string()) {
            last_error = "no verdict field";
            continue;
        }
        const std::string verdict = (*obj)["verdict"].get<std::string>();
        if (verdict == "correct") return SingleTurnVerdict::correct;
        if (verdict == "incorrect") return SingleTurnVerdict::incorrect;
        last_error = "unknown verdict '" + verdict + "'";
    }
    return Skip{"unparseable: " + last_error};
}

}  // namespace askeval
