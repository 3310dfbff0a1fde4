#pragma once

// Command-line surface: configuration, backend wiring, and the
// build / eval / score / reward / report commands.

#include "askeval/construct.hpp"
#include "askeval/dialogue.hpp"
#include "askeval/gateway.hpp"
#include "askeval/metrics.hpp"
#include "askeval/structured.hpp"

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace askeval::cli {

enum ExitCode : int {
    kSuccess = 0,
    kUsageError = 1,
    kRuntimeFailure = 2,
    kAllSkipped = 3,
};

struct BackendSpec {
    std::string kind = "http";  // http | scripted
    std::string endpoint;
    std::string api_key_env;
    std::string script;
    RoleParams params;
    RetryPolicy retry;
};

/// One declarative document; every field can be overridden on the command
/// line. Credentials are read from the environment only.
struct RunConfig {
    std::map<std::string, BackendSpec> backends;  // policy, judge, simulator, constructor
    Protocol protocol = Protocol::standard;
    Guidance guidance = Guidance::none;
    PromptMode prompt_mode = PromptMode::plain;
    std::optional<int> max_turns;
    bool reward_mode = false;
    int judge_retry_budget = 3;
    int construct_retry_budget = 3;
    std::size_t parallelism = 1;
    std::uint64_t seed = 0;
    std::optional<std::size_t> per_domain;
    std::optional<std::string> templates_dir;
};

RoleParams default_role_params(const std::string& role);

RunConfig parse_config(const json& doc);
RunConfig load_config(const std::string& path);

/// Instantiates backends on demand; scripted backends sharing a script file
/// share one instance.
class BackendFactory {
  public:
    explicit BackendFactory(const RunConfig& config) : config_(config) {}
    std::shared_ptr<ChatBackend> get(const std::string& role);
    [[nodiscard]] RoleParams params(const std::string& role) const;

  private:
    const RunConfig& config_;
    std::map<std::string, std::shared_ptr<ChatBackend>> by_role_;
    std::map<std::string, std::shared_ptr<ScriptedBackend>> scripts_;
};

struct BuildArgs {
    std::string source;
    Dimension dimension = Dimension::ask_mind;
    std::string out;
};

struct BuildOutcome {
    BuildReport report;
    std::size_t written = 0;
    std::size_t malformed_lines = 0;
};

BuildOutcome cmd_build(const BuildArgs& args, const RunConfig& config, std::ostream& log);

struct EvalArgs {
    std::string instances;
    std::string out;
};

std::vector<DialogueTrace> cmd_eval(const EvalArgs& args, const RunConfig& config, std::ostream& log);
LoopConfig make_loop_config(const RunConfig& config, BackendFactory& backends, const TemplateSet* templates);

struct ScoreArgs {
    std::string traces;
    GroupBy group_by = GroupBy::none;
    std::optional<std::string> out;
    std::optional<std::string> label;
};

MetricsSummary cmd_score(const ScoreArgs& args, std::ostream& out);

struct RewardArgs {
    std::string traces;
    std::string instances;
    std::string out;
};

struct RewardOutcome {
    std::vector<RewardTrajectory> trajectories;
    std::size_t skipped = 0;
    std::size_t readjudicated = 0;
};

RewardOutcome cmd_reward(const RewardArgs& args, const RunConfig& config, std::ostream& log);

struct ReportArgs {
    std::vector<std::string> summaries;
    std::optional<std::string> out;
};

std::string cmd_report(const ReportArgs& args, std::ostream& out);

std::string render_summary_table(const MetricsSummary& summary);

struct LabeledSummary {
    std::string label;
    MetricsSummary summary;
};
std::string render_comparison_table(const std::vector<LabeledSummary>& runs);

/// Parses argv and dispatches; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace askeval::cli
