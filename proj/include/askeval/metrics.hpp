#pragma once

// Dialogue-level statistics with explicit denominators.
//
// Skipped traces are excluded from every denominator. still_asking and
// protocol_violation count against accuracy; only traces that produced a
// final answer (correct, wrong, protocol_violation) enter the coverage
// denominator. A rate with an empty denominator has no value; it is never
// reported as 0.

#include "askeval/core.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>

namespace askeval {

class EmptyDenominator : public Error {
  public:
    explicit EmptyDenominator(const std::string& metric) : Error(metric + ": empty denominator") {}
};

struct Rate {
    std::size_t num = 0;
    std::size_t den = 0;

    [[nodiscard]] bool defined() const noexcept { return den > 0; }
    [[nodiscard]] std::optional<double> value() const noexcept;
    /// Throws EmptyDenominator when undefined.
    [[nodiscard]] double fraction(const std::string& metric) const;

    Rate& operator+=(const Rate& other) noexcept {
        num += other.num;
        den += other.den;
        return *this;
    }
    bool operator==(const Rate&) const = default;
};

struct MetricsSummary {
    std::size_t n_total = 0;
    std::size_t n_skipped = 0;
    std::size_t n_final_answered = 0;
    Rate acc;
    Rate cov;
    Rate unq;
    Rate ask;
    Rate dir;
    std::map<std::string, MetricsSummary> per_split;

    [[nodiscard]] std::size_t n_evaluated() const noexcept { return n_total - n_skipped; }
    bool operator==(const MetricsSummary&) const = default;
};

enum class GroupBy { none, domain, dimension };
GroupBy parse_group_by(std::string_view s);

Rate accuracy(std::span<const DialogueTrace> traces);
Rate coverage(std::span<const DialogueTrace> traces);
Rate redundant_rate(std::span<const DialogueTrace> traces);

struct BehaviorRates {
    Rate ask;
    Rate dir;
};
BehaviorRates behavior_rates(std::span<const DialogueTrace> traces);

MetricsSummary summarize(std::span<const DialogueTrace> traces);
MetricsSummary split_report(std::span<const DialogueTrace> traces, GroupBy group_by);

}  // namespace askeval
