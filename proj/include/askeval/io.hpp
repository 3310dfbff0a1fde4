#pragma once

// Line-delimited record formats and atomic file output.
//
//   instance file    one Instance per line (id, dimension, domain, original_query,
//                    answer, variant_query, variant_summary, checkpoints[{text, kind}])
//   trace file       one DialogueTrace per line, tagged "format": "asktrace/1"
//   trajectory file  one RewardTrajectory per line, tagged "format": "asktraj/1"

#include "askeval/core.hpp"
#include "askeval/metrics.hpp"
#include "askeval/structured.hpp"

#include <string>
#include <vector>

namespace askeval {

inline constexpr const char* kTraceFormat = "asktrace/1";
inline constexpr const char* kTrajectoryFormat = "asktraj/1";

class IoError : public Error {
  public:
    using Error::Error;
};

/// A record that failed to decode, with its 1-based line number.
class RecordError : public Error {
  public:
    RecordError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

json to_json(const QAPair& pair);
json to_json(const Instance& instance);
json to_json(const JudgeVerdict& verdict);
json to_json(const ConfigSnapshot& config);
json to_json(const DialogueTrace& trace);
json to_json(const RewardTrajectory& trajectory);
json to_json(const MetricsSummary& summary);

QAPair qa_pair_from_json(const json& j);
Instance instance_from_json(const json& j);
JudgeVerdict verdict_from_json(const json& j);
DialogueTrace trace_from_json(const json& j);
RewardTrajectory trajectory_from_json(const json& j);
MetricsSummary summary_from_json(const json& j);

/// Writes `content` to a temporary sibling of `path`, then renames it into
/// place. On failure nothing is left at `path` and the temporary is removed.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

template <typename T>
std::string to_jsonl(const std::vector<T>& records) {
    std::string out;
    for (const auto& r : records) {
        out += to_json(r).dump();
        out += '\n';
    }
    return out;
}

/// Decoded records plus per-line failures; blank lines are ignored.
template <typename T>
struct LoadResult {
    std::vector<T> records;
    std::vector<RecordError> errors;
};

LoadResult<QAPair> load_qa_corpus(const std::string& path);

/// Strict loaders: the first bad line throws RecordError.
std::vector<Instance> read_instances(const std::string& path);
std::vector<DialogueTrace> read_traces(const std::string& path);
std::vector<RewardTrajectory> read_trajectories(const std::string& path);

std::size_t write_instances(const std::string& path, const std::vector<Instance>& instances);
std::size_t write_traces(const std::string& path, const std::vector<DialogueTrace>& traces);
std::size_t write_trajectories(const std::string& path, const std::vector<RewardTrajectory>& trajectories);

}  // namespace askeval
