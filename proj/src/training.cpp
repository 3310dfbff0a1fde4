#include "askeval/construct.hpp"

#include "askeval/structured.hpp"

#include <set>

namespace askeval {
namespace {

constexpr const char* kAssistantChannel = "train_assistant";
constexpr const char* kCoverageChannel = "coverage";
constexpr const char* kTrainJudgeChannel = "train_judge";
constexpr const char* kDirectChannel = "direct";
constexpr const char* kDirectJudgeChannel = "direct_judge";

std::string task_focus(Dimension d) {
    if (d == Dimension::ask_overconfidence) {
        return "Explicitly point out and correct each misleading claim you address, and never rely on the wrong "
               "assertions.";
    }
    return "Ask the user for the missing information rather than assuming it.";
}

std::string coverage_rule(Dimension d) {
    if (d == Dimension::ask_overconfidence) {
        return "An item counts as covered only if the assistant has explicitly identified that misleading claim and "
               "provided a correction.";
    }
    return "An item counts as covered only if the user has explicitly provided its value.";
}

std::string bullet_list(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& i : items) {
        if (!out.empty()) out += "\n";
        out += "- " + i;
    }
    return out;
}

class Caller {
  public:
    Caller(CallCounter& counter, const TrainingOptions& options) : counter_(counter), options_(options) {}

    std::string ask(ChatBackend* backend, const RoleParams& params, const char* channel, std::string prompt) {
        if (backend == nullptr) throw ConfigError(std::string("no backend bound for ") + channel);
        ChatRequest req;
        req.model_id = params.model;
        req.temperature = params.temperature;
        req.max_tokens = params.max_tokens;
        req.messages.push_back({Role::user, std::move(prompt)});
        req.tag = counter_.next(channel);
        ChatResponse resp = complete(req, *backend);
        if (resp.finish_reason == FinishReason::error) throw BackendError(std::string(channel) + ": no content");
        return resp.text;
    }

    /// Retries until `parse` accepts the reply or the budget runs out.
    template <typename Parse>
    auto ask_structured(ChatBackend* backend, const RoleParams& params, const char* channel, const std::string& prompt,
                        Parse parse) {
        std::string last_error;
        for (int attempt = 0; attempt <= options_.retry_budget; ++attempt) {
            try {
                return parse(ask(backend, params, channel, prompt));
            } catch (const VerdictParseError& e) {
                last_error = e.what();
            }
        }
        throw RetryExhausted(std::string(channel) + " reply never parsed: " + last_error, options_.retry_budget + 1);
    }

  private:
    CallCounter& counter_;
    const TrainingOptions& options_;
};

struct TrainJudgement {
    bool correct = false;
    TrainingFailure failure = TrainingFailure::none;
};

TrainJudgement parse_train_judgement(std::string_view raw) {
    auto obj = extract_json_object(raw);
    if (!obj || !obj->contains("is_correct") || !(*obj)["is_correct"].is_boolean()) {
        throw VerdictParseError("training judge reply lacks boolean is_correct");
    }
    TrainJudgement j;
    j.correct = (*obj)["is_correct"].get<bool>();
    if (!j.correct) {
        const std::string reason = obj->value("failure_reason", std::string());
        j.failure = reason == "insufficient_asking" ? TrainingFailure::insufficient_asking
                                                    : TrainingFailure::reasoning_error;
    }
    return j;
}

}  // namespace

CoverageCheck parse_coverage(std::string_view raw, const Instance& instance) {
    auto obj = extract_json_object(raw);
    if (!obj) throw VerdictParseError("coverage reply has no structured block");
    auto all = obj->find("all_covered");
    auto missing = obj->find("missing");
    if (all == obj->end() || !all->is_boolean()) throw VerdictParseError("all_covered must be boolean");
    if (missing == obj->end() || !missing->is_array()) throw VerdictParseError("missing must be an array");

    CoverageCheck c;
    c.all_covered = all->get<bool>();
    std::set<std::string> hits;
    for (const auto& item : *missing) {
        if (!item.is_string()) throw VerdictParseError("missing entries must be strings");
        auto cp = checkpoint_match(item.get<std::string>(), instance);
        if (!cp) throw VerdictParseError("missing names an unknown checkpoint: " + item.get<std::string>());
        hits.insert(cp->text);
    }
    for (const auto& cp : instance.checkpoints) {
        if (hits.count(cp.text)) c.missing.push_back(cp.text);
    }
    if (c.all_covered != c.missing.empty()) throw VerdictParseError("all_covered disagrees with missing");
    return c;
}

TrainingDialogue synthesize_training_dialogue(const Instance& instance, const TrainingBackends& backends,
                                              const TrainingOptions& options) {
    validate(instance);
    if (!instance.graded()) throw ValidationError("dimension", "training dialogues need a rubric");
    if (options.max_questions < 1) throw ValidationError("max_questions", "must be positive");

    CallCounter counter(instance.id);
    Caller call(counter, options);
    const TemplateSet& tpl = *options.templates;
    const std::string focus = task_focus(instance.dimension);

    TrainingDialogue out;
    out.instance_id = instance.id;
    auto push = [&out](Role role, std::string text) {
        out.turns.push_back({static_cast<int>(out.turns.size()) + 1, role, std::move(text)});
    };
    push(Role::user, instance.variant_query);

    std::vector<std::string> missing;
    for (const auto& cp : instance.checkpoints) missing.push_back(cp.text);

    const CallContext user_ctx{backends.user, options.judge_params, options.templates, options.retry_budget, &counter,
                               std::nullopt};
    for (int asked = 0; asked < options.max_questions && !out.covered; ++asked) {
        std::string prompt;
        if (asked == 0) {
            prompt = tpl.render("train_initial_question", {{"scenario_question", instance.variant_query},
                                                           {"rubric_criteria", render_rubric(instance)},
                                                           {"task_focus", focus}});
        } else {
            const char* name = asked + 1 == options.max_questions ? "train_combined_question" : "train_followup_question";
            prompt = tpl.render(name, {{"conversation_history", render_conversation(out.turns)},
                                       {"missing_criteria", bullet_list(missing)},
                                       {"task_focus", focus}});
        }
        const std::string question = call.ask(backends.assistant, options.assistant_params, kAssistantChannel, prompt);
        push(Role::assistant, question);
        push(Role::user, simulate_user(instance, out.turns, question, user_ctx));

        const std::string check_prompt = tpl.render("coverage_checker", {{"coverage_rule", coverage_rule(instance.dimension)},
                                                                         {"rubric_criteria", render_rubric(instance)},
                                                                         {"conversation_history", render_conversation(out.turns)}});
        const CoverageCheck check = call.ask_structured(backends.checker, options.judge_params, kCoverageChannel,
                                                        check_prompt,
                                                        [&](const std::string& raw) { return parse_coverage(raw, instance); });
        out.covered = check.all_covered;
        missing = check.missing;
    }

    out.final_answer = call.ask(backends.assistant, options.assistant_params, kAssistantChannel,
                                tpl.render("train_final_answer", {{"conversation_history", render_conversation(out.turns)},
                                                                  {"task_focus", ""}}));
    push(Role::assistant, out.final_answer);

    const std::string judge_prompt = tpl.render("train_judge", {{"ori_question", instance.original_query},
                                                                {"ground_truth_answer", instance.answer},
                                                                {"rubric_criteria", render_rubric(instance)},
                                                                {"conversation_history", render_conversation(out.turns)}});
    const TrainJudgement verdict =
        call.ask_structured(backends.judge, options.judge_params, kTrainJudgeChannel, judge_prompt, parse_train_judgement);
    out.judged_correct = verdict.correct;
    out.failure = verdict.failure;

    if (!verdict.correct) {
        out.final_answer = call.ask(backends.assistant, options.assistant_params, kAssistantChannel,
                                    tpl.render("force_correction", {{"conversation_history", render_conversation(out.turns)},
                                                                    {"ground_truth_answer", instance.answer}}));
        out.turns.back().text = out.final_answer;
        out.corrected = true;
    }
    return out;
}

DirectAnswerResult direct_answer_with_correction(const QAPair& pair, ChatBackend& answerer, ChatBackend& judge,
                                                 const TrainingOptions& options) {
    validate(pair);
    CallCounter counter(pair.id);
    Caller call(counter, options);
    const TemplateSet& tpl = *options.templates;

    DirectAnswerResult out;
    out.answer = call.ask(&answerer, options.assistant_params, kDirectChannel,
                          tpl.render("direct_answer", {{"ori_question", pair.query}}));

    const std::string judge_prompt = tpl.render(
        "direct_judge", {{"ori_question", pair.query}, {"ground_truth_answer", pair.answer}, {"candidate_answer", out.answer}});
    const bool correct = call.ask_structured(&judge, options.judge_params, kDirectJudgeChannel, judge_prompt,
                                             [](const std::string& raw) {
                                                 auto obj = extract_json_object(raw);
                                                 if (!obj || !obj->contains("is_correct") ||
                                                     !(*obj)["is_correct"].is_boolean()) {
                                                     throw VerdictParseError("direct judge lacks boolean is_correct");
                                                 }
                                                 return (*obj)["is_correct"].get<bool>();
                                             });
    if (!correct) {
        out.answer = call.ask(&answerer, options.assistant_params, kDirectChannel,
                              tpl.render("reconstruction", {{"ori_question", pair.query}, {"ground_truth_answer", pair.answer}}));
        out.reconstructed = true;
    }
    return out;
}

Instance attach_reference_solution(Instance instance, const DirectAnswerResult& result) {
    instance.reference_solution = result.answer;
    return instance;
}

}  // namespace askeval
