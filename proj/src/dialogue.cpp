#include "askeval/dialogue.hpp"

#include "askeval/parallel.hpp"

#include <mutex>
#include <set>

namespace askeval {
namespace {

constexpr std::int64_t kRequestSeedMask = 0x7fffffff;

/// Cumulative checkpoint resolution. Once a verdict marks an item resolved,
/// later verdicts listing it as missing do not undo that.
class ResolutionTracker {
  public:
    explicit ResolutionTracker(const Instance& instance) : instance_(instance) {}

    void observe(const JudgeVerdict& v) {
        if (!instance_.graded()) return;
        const std::set<std::string> missing(v.missing_checkpoints.begin(), v.missing_checkpoints.end());
        for (const auto& cp : instance_.checkpoints) {
            if (!missing.count(cp.text)) resolved_.insert(cp.text);
        }
    }

    [[nodiscard]] bool fully_resolved() const {
        return instance_.graded() && resolved_.size() == instance_.checkpoints.size();
    }

  private:
    const Instance& instance_;
    std::set<std::string> resolved_;
};

class DialogueRun {
  public:
    DialogueRun(const Instance& instance, const LoopConfig& config)
        : instance_(instance), config_(config), counter_(instance.id), tracker_(instance) {
        request_seed_ = static_cast<std::int64_t>(derive_seed(config.seed, instance.id)) & kRequestSeedMask;
        trace_.instance_id = instance.id;
        trace_.dimension = instance.dimension;
        trace_.domain = instance.domain;
        trace_.label = instance.label;
        trace_.protocol = config.protocol;
        trace_.config = snapshot(config);
    }

    DialogueTrace run() {
        const CallContext judge_ctx{config_.judge.get(), config_.judge_params, config_.templates,
                                    config_.retry_budget, &counter_, request_seed_};
        const CallContext sim_ctx{config_.simulator.get(), config_.simulator_params, config_.templates,
                                  config_.retry_budget, &counter_, request_seed_};
        const JudgeMode mode = config_.reward_mode                   ? JudgeMode::reward
                               : config_.protocol == Protocol::hard ? JudgeMode::hard
                                                                     : JudgeMode::standard;
        const std::string& force_final = config_.templates->get("force_final");

        if (config_.prompt_mode == PromptMode::self_alert) push(Role::system, config_.templates->get("self_alert"));
        std::string first = compose_first_message(instance_, config_);
        if (config_.max_turns == 1) first += "\n\n" + force_final;
        push(Role::user, std::move(first));

        for (int turn = 1; turn <= config_.max_turns; ++turn) {
            ChatRequest req;
            req.model_id = config_.policy_params.model;
            req.messages = messages_;
            req.temperature = config_.policy_params.temperature;
            req.max_tokens = config_.policy_params.max_tokens;
            req.seed = request_seed_;
            req.tag = counter_.next(kPolicyChannel);
            ChatResponse reply;
            try {
                reply = complete(req, *config_.policy);
            } catch (const RetryExhausted& e) {
                return skip(std::string("policy backend_failure: ") + e.what());
            }
            if (reply.finish_reason == FinishReason::error) return skip("policy returned no content");
            push(Role::assistant, reply.text);

            JudgeResult judged = judge_turn(instance_, trace_.turns, mode, judge_ctx);
            if (const auto* s = std::get_if<Skip>(&judged)) return skip(s->cause);
            const JudgeVerdict& verdict = trace_.verdicts.emplace_back(std::get<JudgeVerdict>(std::move(judged)));

            const bool resolved_before = tracker_.fully_resolved();
            tracker_.observe(verdict);

            if (verdict.is_final_answer) {
                trace_.resolved_all_before_answer = tracker_.fully_resolved();
                trace_.outcome = final_outcome(verdict, turn);
                return std::move(trace_);
            }
            if (resolved_before) trace_.asked_after_all_resolved = true;
            if (turn == config_.max_turns) {
                trace_.outcome = Outcome::still_asking;
                return std::move(trace_);
            }

            std::string user_reply;
            try {
                user_reply = simulate_user(instance_, trace_.turns, reply.text, sim_ctx);
            } catch (const RetryExhausted& e) {
                return skip(std::string("simulator backend_failure: ") + e.what());
            }
            if (turn + 1 == config_.max_turns) user_reply += "\n\n" + force_final;
            push(Role::user, std::move(user_reply));
        }
        // max_turns >= 1 guarantees the loop returns.
        return skip("turn budget exhausted without a verdict");
    }

  private:
    void push(Role role, std::string text) {
        const int index = static_cast<int>(trace_.turns.size()) + 1;
        messages_.push_back({role, text});
        trace_.turns.push_back({index, role, std::move(text)});
    }

    DialogueTrace skip(std::string cause) {
        trace_.outcome = Outcome::skipped;
        trace_.skip_cause = std::move(cause);
        return std::move(trace_);
    }

    Outcome final_outcome(const JudgeVerdict& verdict, int turn) const {
        if (config_.protocol == Protocol::hard && turn == 1) return Outcome::protocol_violation;
        if (!instance_.graded()) return Outcome::ungraded;
        return verdict.correctness == Correctness::correct ? Outcome::correct : Outcome::wrong;
    }

    const Instance& instance_;
    const LoopConfig& config_;
    CallCounter counter_;
    ResolutionTracker tracker_;
    std::int64_t request_seed_ = 0;
    std::vector<ChatMessage> messages_;
    DialogueTrace trace_;
};

std::string with_guidance(std::string text, const LoopConfig& config) {
    switch (config.guidance) {
        case Guidance::none: return text;
        case Guidance::weak: return text + "\n\n" + config.templates->get("guidance_weak");
        case Guidance::strong: return text + "\n\n" + config.templates->get("guidance_strong");
    }
    return text;
}

}  // namespace

LoopConfig LoopConfig::standard() {
    return LoopConfig{};
}

LoopConfig LoopConfig::hard() {
    LoopConfig c;
    c.protocol = Protocol::hard;
    c.max_turns = 2;
    return c;
}

void validate(const LoopConfig& config) {
    if (config.max_turns < 1) throw ValidationError("max_turns", "must be positive");
    if (config.protocol == Protocol::hard && config.max_turns != 2) {
        throw ValidationError("max_turns", "the hard protocol uses exactly two turns");
    }
    if (config.protocol == Protocol::hard && config.reward_mode) {
        throw ValidationError("reward_mode", "reward-mode judging uses the standard protocol");
    }
    if (config.retry_budget < 0) throw ValidationError("retry_budget", "must be >= 0");
    if (!config.policy || !config.judge || !config.simulator) {
        throw ConfigError("policy, judge, and simulator backends must all be bound");
    }
    if (config.templates == nullptr) throw ConfigError("no template set");
}

ConfigSnapshot snapshot(const LoopConfig& config) {
    ConfigSnapshot s;
    s.protocol = config.protocol;
    s.guidance = config.guidance;
    s.prompt_mode = config.prompt_mode;
    s.max_turns = config.max_turns;
    s.reward_mode = config.reward_mode;
    s.seed = config.seed;
    s.policy = config.policy_params;
    s.judge = config.judge_params;
    s.simulator = config.simulator_params;
    return s;
}

std::string compose_first_message(const Instance& instance, const LoopConfig& config) {
    if (config.prompt_mode == PromptMode::fata) {
        return with_guidance(config.templates->render("fata", {{"degraded_question", instance.variant_query}}), config);
    }
    return with_guidance(instance.variant_query, config);
}

DialogueTrace run_dialogue(const Instance& instance, const LoopConfig& config) {
    validate(config);
    return DialogueRun(instance, config).run();
}

std::vector<DialogueTrace> run_batch(const std::vector<Instance>& instances, const LoopConfig& config,
                                     std::size_t parallelism, const ProgressFn& progress) {
    if (parallelism < 1) throw ValidationError("parallelism", "must be >= 1");
    validate(config);
    std::vector<DialogueTrace> traces(instances.size());
    std::mutex progress_mu;
    std::size_t finished = 0;
    parallel_for(instances.size(), parallelism, [&](std::size_t i) {
        try {
            traces[i] = run_dialogue(instances[i], config);
        } catch (const std::exception& e) {
            DialogueTrace t;
            t.instance_id = instances[i].id;
            t.dimension = instances[i].dimension;
            t.domain = instances[i].domain;
            t.label = instances[i].label;
            t.protocol = config.protocol;
            t.config = snapshot(config);
            t.outcome = Outcome::skipped;
            t.skip_cause = std::string("error: ") + e.what();
            traces[i] = std::move(t);
        }
        if (progress) {
            std::lock_guard lock(progress_mu);
            progress(++finished, instances.size());
        }
    });
    return traces;
}

}  // namespace askeval
