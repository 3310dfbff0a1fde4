#include "askeval/metrics.hpp"

namespace askeval {
namespace {

bool graded_and_evaluated(const DialogueTrace& t) {
    return !t.skipped() && t.dimension != Dimension::behavior;
}

bool labeled_and_evaluated(const DialogueTrace& t, Clarity label) {
    return !t.skipped() && t.label == label;
}

std::string group_key(const DialogueTrace& t, GroupBy group_by) {
    switch (group_by) {
        case GroupBy::domain: return t.domain;
        case GroupBy::dimension: return std::string(to_string(t.dimension));
        case GroupBy::none: break;
    }
    return {};
}

}  // namespace

std::optional<double> Rate::value() const noexcept {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

double Rate::fraction(const std::string& metric) const {
    if (den == 0) throw EmptyDenominator(metric);
    return static_cast<double>(num) / static_cast<double>(den);
}

GroupBy parse_group_by(std::string_view s) {
    if (s == "domain") return GroupBy::domain;
    if (s == "dimension") return GroupBy::dimension;
    if (s == "none" || s.empty()) return GroupBy::none;
    throw ValidationError("group_by", "expected domain|dimension|none");
}

Rate accuracy(std::span<const DialogueTrace> traces) {
    Rate r;
    for (const auto& t : traces) {
        if (!graded_and_evaluated(t)) continue;
        ++r.den;
        if (t.outcome == Outcome::correct) ++r.num;
    }
    return r;
}

Rate coverage(std::span<const DialogueTrace> traces) {
    Rate r;
    for (const auto& t : traces) {
        if (!graded_and_evaluated(t) || !t.answered()) continue;
        ++r.den;
        if (t.resolved_all_before_answer) ++r.num;
    }
    return r;
}

Rate redundant_rate(std::span<const DialogueTrace> traces) {
    Rate r;
    for (const auto& t : traces) {
        if (!graded_and_evaluated(t)) continue;
        ++r.den;
        if (t.asked_after_all_resolved) ++r.num;
    }
    return r;
}

BehaviorRates behavior_rates(std::span<const DialogueTrace> traces) {
    BehaviorRates b;
    for (const auto& t : traces) {
        if (labeled_and_evaluated(t, Clarity::vague)) {
            ++b.ask.den;
            if (t.clarifying_turn_count() > 0) ++b.ask.num;
        } else if (labeled_and_evaluated(t, Clarity::clear)) {
            ++b.dir.den;
            if (t.clarifying_turn_count() == 0) ++b.dir.num;
        }
    }
    return b;
}

MetricsSummary summarize(std::span<const DialogueTrace> traces) {
    MetricsSummary s;
    s.n_total = traces.size();
    for (const auto& t : traces) {
        if (t.skipped()) ++s.n_skipped;
    }
    s.acc = accuracy(traces);
    s.cov = coverage(traces);
    s.unq = redundant_rate(traces);
    s.n_final_answered = s.cov.den;
    const BehaviorRates b = behavior_rates(traces);
    s.ask = b.ask;
    s.dir = b.dir;
    return s;
}

MetricsSummary split_report(std::span<const DialogueTrace> traces, GroupBy group_by) {
    MetricsSummary overall = summarize(traces);
    if (group_by == GroupBy::none) return overall;

    std::map<std::string, std::vector<DialogueTrace>> groups;
    for (const auto& t : traces) groups[group_key(t, group_by)].push_back(t);
    for (const auto& [key, members] : groups) overall.per_split.emplace(key, summarize(members));
    return overall;
}

}  // namespace askeval
