#include "askeval/reward.hpp"

#include <cstdio>

namespace askeval {

ScoredTurn score_intermediate(const TurnObservation& obs, const RewardWeights& w) {
    if (obs.rubric_size < 1) throw InvalidObservation("rubric size must be >= 1");
    if (obs.targeted > obs.rubric_size) {
        throw InvalidObservation("targeted count " + std::to_string(obs.targeted) + " exceeds rubric size " +
                                 std::to_string(obs.rubric_size));
    }
    // A final answer dominates whatever the turn targeted.
    if (obs.answered) return {w.premature_answer, "premature_answer"};
    if (obs.targeted == 0) return {w.untargeted_ask, "untargeted_ask"};
    if (obs.targeted < obs.rubric_size) return {w.partial_target, "partial_target"};
    return {w.full_target, "full_target"};
}

ScoredTurn score_terminal(Outcome decision, const RewardWeights& w) {
    switch (decision) {
        case Outcome::correct: return {w.terminal_correct, "terminal_correct"};
        case Outcome::wrong:
        case Outcome::protocol_violation: return {w.terminal_wrong, "terminal_wrong"};
        case Outcome::still_asking: return {w.terminal_still_asking, "terminal_still_asking"};
        case Outcome::skipped:
        case Outcome::ungraded: break;
    }
    throw InvalidObservation("no terminal reward for outcome " + std::string(to_string(decision)));
}

double intermediate_reward(const TurnObservation& obs, const RewardWeights& w) {
    return score_intermediate(obs, w).reward;
}

double terminal_reward(Outcome decision, const RewardWeights& w) {
    return score_terminal(decision, w).reward;
}

Outcome terminal_decision(const DialogueTrace& trace) {
    return trace.outcome == Outcome::protocol_violation ? Outcome::wrong : trace.outcome;
}

RewardTrajectory annotate_trajectory(const DialogueTrace& trace, const std::vector<JudgeVerdict>& reward_verdicts,
                                     std::size_t rubric_size, std::size_t trace_line, const RewardWeights& w) {
    if (trace.skipped()) throw SkippedTrace("trace for " + trace.instance_id + " was skipped");
    if (trace.dimension == Dimension::behavior) {
        throw SkippedTrace("behavior trace " + trace.instance_id + " has no rubric to reward against");
    }
    std::vector<int> assistant_indices;
    for (const auto& t : trace.turns) {
        if (t.role == Role::assistant) assistant_indices.push_back(t.index);
    }
    if (assistant_indices.empty()) throw AlignmentError("trace " + trace.instance_id + " has no assistant turn");
    if (reward_verdicts.size() != assistant_indices.size()) {
        throw AlignmentError("trace " + trace.instance_id + ": " + std::to_string(reward_verdicts.size()) +
                             " verdicts for " + std::to_string(assistant_indices.size()) + " assistant turns");
    }

    RewardTrajectory out;
    out.instance_id = trace.instance_id;
    out.trace_line = trace_line;
    out.rubric_size = rubric_size;
    out.terminal_decision = terminal_decision(trace);

    const std::size_t last = assistant_indices.size() - 1;
    for (std::size_t i = 0; i < last; ++i) {
        const JudgeVerdict& v = reward_verdicts[i];
        if (!v.targeted_checkpoints) {
            throw AlignmentError("verdict for turn " + std::to_string(assistant_indices[i]) +
                                 " lacks targeted checkpoints");
        }
        const ScoredTurn s = score_intermediate({v.is_final_answer, v.targeted_count(), rubric_size}, w);
        out.per_turn_rewards.push_back({assistant_indices[i], s.reward, s.case_tag});
    }
    const ScoredTurn t = score_terminal(out.terminal_decision, w);
    out.per_turn_rewards.push_back({assistant_indices[last], t.reward, t.case_tag});
    return out;
}

bool KeepRange::keeps(double p) const noexcept {
    const bool above = lo_inclusive ? p >= lo : p > lo;
    const bool below = hi_inclusive ? p <= hi : p < hi;
    return above && below;
}

std::vector<double> default_bucket_edges() {
    return {0.0, 0.125, 0.5, 0.875, 1.0};
}

namespace {

std::string format_edge(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

std::vector<PassRateBucket> bucket_by_pass_rate(const std::map<std::string, std::vector<Outcome>>& item_rollouts,
                                                const std::vector<double>& edges, const KeepRange& keep) {
    if (edges.size() < 2) throw BadEdges("need at least two bucket edges");
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (!(edges[i] > edges[i - 1])) throw BadEdges("bucket edges must be strictly increasing");
    }

    std::vector<PassRateBucket> out;
    out.reserve(item_rollouts.size());
    for (const auto& [id, outcomes] : item_rollouts) {
        if (outcomes.empty()) throw Error("item " + id + " has no rollout outcomes");
        PassRateBucket b;
        b.item_id = id;
        b.total = outcomes.size();
        for (Outcome o : outcomes) {
            if (o == Outcome::correct) ++b.correct;
        }
        b.pass_rate = static_cast<double>(b.correct) / static_cast<double>(b.total);

        const bool in_edges = b.pass_rate >= edges.front() && b.pass_rate <= edges.back();
        if (!keep.keeps(b.pass_rate) || !in_edges) {
            b.rejected = true;
            b.label = "rejected";
        } else {
            for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
                const bool last = i + 2 == edges.size();
                if (b.pass_rate < edges[i + 1] || (last && b.pass_rate <= edges[i + 1])) {
                    b.label = "[" + format_edge(edges[i]) + "," + format_edge(edges[i + 1]) + (last ? "]" : ")");
                    break;
                }
            }
        }
        out.push_back(std::move(b));
    }
    return out;
}

}  // namespace askeval
