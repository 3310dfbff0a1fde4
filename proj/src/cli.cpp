#include "askeval/cli.hpp"

#include "askeval/adjudicate.hpp"
#include "askeval/io.hpp"
#include "askeval/parallel.hpp"
#include "askeval/reward.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

namespace askeval::cli {
namespace {

namespace fs = std::filesystem;

const std::set<std::string> kRoles = {"policy", "judge", "simulator", "constructor"};

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (key == "api_key" || key == "apiKey" || key == "credential") {
            throw ConfigError(where + ": credentials are read from environment variables only (use api_key_env)");
        }
        if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <typename T>
T read_or(const json& obj, const char* key, T fallback) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config key '") + key + "' has the wrong type");
    }
}

BackendSpec parse_backend(const std::string& role, const json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw ConfigError("backends." + role + " must be an object");
    reject_unknown_keys(j,
                        {"kind", "endpoint", "api_key_env", "script", "model", "temperature", "max_tokens",
                         "retry_budget", "backoff_base_ms", "backoff_factor"},
                        "backends." + role);
    BackendSpec s;
    s.params = default_role_params(role);
    s.kind = read_or<std::string>(j, "kind", "http");
    if (s.kind != "http" && s.kind != "scripted") throw ConfigError("backends." + role + ".kind must be http|scripted");
    s.endpoint = read_or<std::string>(j, "endpoint", "");
    s.api_key_env = read_or<std::string>(j, "api_key_env", "");
    s.script = read_or<std::string>(j, "script", "");
    if (!s.script.empty() && fs::path(s.script).is_relative()) s.script = (base_dir / s.script).string();
    s.params.model = read_or<std::string>(j, "model", s.params.model);
    s.params.temperature = read_or<double>(j, "temperature", s.params.temperature);
    s.params.max_tokens = read_or<int>(j, "max_tokens", s.params.max_tokens);
    s.retry.budget = read_or<int>(j, "retry_budget", s.retry.budget);
    s.retry.base_delay = std::chrono::milliseconds(read_or<std::int64_t>(j, "backoff_base_ms", s.retry.base_delay.count()));
    s.retry.factor = read_or<double>(j, "backoff_factor", s.retry.factor);
    return s;
}

RunConfig parse_config_at(const json& doc, const fs::path& base_dir) {
    if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
    reject_unknown_keys(doc,
                        {"backends", "protocol", "guidance", "prompt_mode", "max_turns", "reward_mode",
                         "judge_retry_budget", "construct_retry_budget", "parallelism", "seed", "per_domain",
                         "templates_dir"},
                        "config");
    RunConfig c;
    try {
        if (auto it = doc.find("backends"); it != doc.end()) {
            for (const auto& [role, spec] : it->items()) {
                if (!kRoles.count(role)) throw ConfigError("unknown backend role '" + role + "'");
                c.backends[role] = parse_backend(role, spec, base_dir);
            }
        }
        c.protocol = parse_protocol(read_or<std::string>(doc, "protocol", "standard"));
        c.guidance = parse_guidance(read_or<std::string>(doc, "guidance", "none"));
        c.prompt_mode = parse_prompt_mode(read_or<std::string>(doc, "prompt_mode", "plain"));
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    }
    if (doc.contains("max_turns")) c.max_turns = read_or<int>(doc, "max_turns", 3);
    c.reward_mode = read_or<bool>(doc, "reward_mode", false);
    c.judge_retry_budget = read_or<int>(doc, "judge_retry_budget", 3);
    c.construct_retry_budget = read_or<int>(doc, "construct_retry_budget", 3);
    c.parallelism = read_or<std::size_t>(doc, "parallelism", 1);
    c.seed = read_or<std::uint64_t>(doc, "seed", 0);
    if (doc.contains("per_domain")) c.per_domain = read_or<std::size_t>(doc, "per_domain", 0);
    if (doc.contains("templates_dir")) {
        fs::path dir = read_or<std::string>(doc, "templates_dir", "");
        if (dir.is_relative()) dir = base_dir / dir;
        c.templates_dir = dir.string();
    }
    return c;
}

std::string fmt_rate(const Rate& r) {
    auto v = r.value();
    if (!v) return "-";
    std::ostringstream s;
    s << std::fixed << std::setprecision(3) << *v;
    return s.str();
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

std::unique_ptr<TemplateSet> load_templates(const RunConfig& config) {
    if (!config.templates_dir) return nullptr;
    return std::make_unique<TemplateSet>(TemplateSet::with_overrides(*config.templates_dir));
}

/// Reward-mode verdicts for every assistant turn, re-judging when the trace
/// was collected without targeting information.
std::optional<std::vector<JudgeVerdict>> reward_verdicts(const DialogueTrace& trace, const Instance& instance,
                                                         const CallContext& base, bool& readjudicated) {
    const bool complete_targets = std::all_of(trace.verdicts.begin(), trace.verdicts.end(),
                                              [](const JudgeVerdict& v) { return v.targeted_checkpoints.has_value(); });
    if (complete_targets && trace.verdicts.size() == trace.assistant_turn_count()) {
        readjudicated = false;
        return trace.verdicts;
    }
    readjudicated = true;
    CallCounter counter(instance.id);
    CallContext ctx = base;
    ctx.counter = &counter;
    std::vector<JudgeVerdict> out;
    std::vector<Turn> prefix;
    for (const auto& t : trace.turns) {
        prefix.push_back(t);
        if (t.role != Role::assistant) continue;
        JudgeResult r = judge_turn_reward(instance, prefix, ctx);
        if (std::holds_alternative<Skip>(r)) return std::nullopt;
        out.push_back(std::get<JudgeVerdict>(std::move(r)));
    }
    return out;
}

void apply_overrides(RunConfig& config, const std::map<std::string, std::string>& flags) {
    try {
        for (const auto& [key, value] : flags) {
            if (key == "protocol") config.protocol = parse_protocol(value);
            else if (key == "guidance") config.guidance = parse_guidance(value);
            else if (key == "prompt-mode") config.prompt_mode = parse_prompt_mode(value);
            else if (key == "max-turns") config.max_turns = std::stoi(value);
            else if (key == "parallelism") config.parallelism = std::stoul(value);
            else if (key == "seed") config.seed = std::stoull(value);
            else if (key == "retry-budget") config.judge_retry_budget = config.construct_retry_budget = std::stoi(value);
            else if (key == "per-domain") config.per_domain = std::stoul(value);
            else if (key == "templates") config.templates_dir = value;
            else if (key == "scripted") {
                for (const auto& role : kRoles) {
                    if (config.backends.count(role)) continue;
                    BackendSpec s;
                    s.kind = "scripted";
                    s.script = value;
                    s.params = default_role_params(role);
                    config.backends[role] = s;
                }
            }
        }
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    } catch (const std::logic_error& e) {
        throw ConfigError(std::string("bad numeric flag: ") + e.what());
    }
}

}  // namespace

RoleParams default_role_params(const std::string& role) {
    if (role == "policy") return {"policy", 0.7, 2048};
    if (role == "constructor") return {"constructor", 0.7, 2048};
    return {role, 0.0, 2048};
}

RunConfig parse_config(const json& doc) {
    return parse_config_at(doc, fs::current_path());
}

namespace {

json read_config_document(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
}

void apply_setting(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects path=value, got '" + assignment + "'");
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw ConfigError("--set has an empty path segment in '" + path + "'");
        if (!node->is_object()) throw ConfigError("--set cannot descend into '" + key + "'");
        if (dot == std::string::npos) {
            (*node)[key] = std::move(value);
            return;
        }
        node = &(*node)[key];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

}  // namespace

RunConfig load_config(const std::string& path) {
    return parse_config_at(read_config_document(path), fs::absolute(path).parent_path());
}

std::shared_ptr<ChatBackend> BackendFactory::get(const std::string& role) {
    if (auto it = by_role_.find(role); it != by_role_.end()) return it->second;
    auto spec = config_.backends.find(role);
    if (spec == config_.backends.end()) throw ConfigError("no backend configured for role '" + role + "'");
    std::shared_ptr<ChatBackend> backend;
    if (spec->second.kind == "scripted") {
        if (spec->second.script.empty()) throw ConfigError("scripted backend for '" + role + "' needs a script");
        auto& cached = scripts_[spec->second.script];
        if (!cached) cached = ScriptedBackend::load(spec->second.script);
        backend = cached;
    } else {
        backend = RemoteBackend::from_environment(spec->second.endpoint, spec->second.api_key_env, spec->second.retry);
    }
    by_role_[role] = backend;
    return backend;
}

RoleParams BackendFactory::params(const std::string& role) const {
    auto spec = config_.backends.find(role);
    return spec == config_.backends.end() ? default_role_params(role) : spec->second.params;
}

BuildOutcome cmd_build(const BuildArgs& args, const RunConfig& config, std::ostream& log) {
    if (args.dimension == Dimension::behavior) throw ConfigError("behavior corpora are not built; import them directly");
    BackendFactory backends(config);
    auto constructor = backends.get("constructor");
    auto templates = load_templates(config);

    BuildOutcome out;
    LoadResult<QAPair> corpus = load_qa_corpus(args.source);
    for (const auto& e : corpus.errors) log << "skipping malformed corpus record at " << e.what() << "\n";
    out.malformed_lines = corpus.errors.size();
    validate_unique_ids(corpus.records);

    ConstructOptions options;
    options.retry_budget = config.construct_retry_budget;
    options.params = backends.params("constructor");
    if (templates) options.templates = templates.get();
    out.report = build_instances(corpus.records, args.dimension, *constructor, options, config.parallelism);

    for (const auto& d : out.report.discarded) {
        log << "discarded " << d.pair_id << " (" << to_string(d.cause) << ") after " << d.attempts
            << " attempt(s): " << d.detail << "\n";
    }
    log << "domain\tattempted\tvalid\tdiscarded\n";
    for (const auto& [domain, s] : out.report.per_domain) {
        log << domain << "\t" << s.attempted << "\t" << s.valid << "\t" << s.discarded << "\n";
    }

    std::vector<Instance> selected = out.report.instances;
    if (config.per_domain) selected = sample_per_domain(selected, *config.per_domain, config.seed);
    out.written = export_instances(selected, args.out);
    log << "wrote " << out.written << " instances to " << args.out << "\n";
    return out;
}

LoopConfig make_loop_config(const RunConfig& config, BackendFactory& backends, const TemplateSet* templates) {
    LoopConfig loop = config.protocol == Protocol::hard ? LoopConfig::hard() : LoopConfig::standard();
    if (config.max_turns) loop.max_turns = *config.max_turns;
    loop.guidance = config.guidance;
    loop.prompt_mode = config.prompt_mode;
    loop.reward_mode = config.reward_mode;
    loop.retry_budget = config.judge_retry_budget;
    loop.seed = config.seed;
    loop.policy = backends.get("policy");
    loop.judge = backends.get("judge");
    loop.simulator = backends.get("simulator");
    loop.policy_params = backends.params("policy");
    loop.judge_params = backends.params("judge");
    loop.simulator_params = backends.params("simulator");
    if (templates) loop.templates = templates;
    try {
        validate(loop);
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    }
    return loop;
}

std::vector<DialogueTrace> cmd_eval(const EvalArgs& args, const RunConfig& config, std::ostream& log) {
    BackendFactory backends(config);
    auto templates = load_templates(config);
    // Backend configuration errors surface here, before any dialogue starts.
    const LoopConfig loop = make_loop_config(config, backends, templates.get());
    const std::vector<Instance> instances = read_instances(args.instances);
    log << "evaluating " << instances.size() << " dialogues (" << to_string(loop.protocol) << ", "
        << loop.max_turns << " turns, parallelism " << config.parallelism << ")\n";

    const std::size_t step = std::max<std::size_t>(1, instances.size() / 10);
    std::vector<DialogueTrace> traces =
        run_batch(instances, loop, config.parallelism, [&log, step](std::size_t done, std::size_t total) {
            if (done % step == 0 || done == total) log << "  " << done << "/" << total << " dialogues\n";
        });
    std::size_t skipped = 0;
    for (const auto& t : traces) {
        if (!t.skipped()) continue;
        ++skipped;
        log << "skipped " << t.instance_id << ": " << t.skip_cause.value_or("") << "\n";
    }
    write_traces(args.out, traces);
    log << "wrote " << traces.size() << " traces to " << args.out << " (" << skipped << " skipped)\n";
    return traces;
}

std::string render_summary_table(const MetricsSummary& summary) {
    std::ostringstream s;
    s << pad("split", 22) << pad("n", 6) << pad("skip", 6) << pad("acc", 8) << pad("cov", 8) << pad("unq", 8)
      << pad("ask", 8) << "dir\n";
    auto row = [&](const std::string& name, const MetricsSummary& m) {
        s << pad(name, 22) << pad(std::to_string(m.n_total), 6) << pad(std::to_string(m.n_skipped), 6)
          << pad(fmt_rate(m.acc), 8) << pad(fmt_rate(m.cov), 8) << pad(fmt_rate(m.unq), 8) << pad(fmt_rate(m.ask), 8)
          << fmt_rate(m.dir) << "\n";
    };
    row("overall", summary);
    for (const auto& [key, nested] : summary.per_split) row(key, nested);
    return s.str();
}

MetricsSummary cmd_score(const ScoreArgs& args, std::ostream& out) {
    const std::vector<DialogueTrace> traces = read_traces(args.traces);
    MetricsSummary summary = split_report(traces, args.group_by);
    out << render_summary_table(summary);
    if (args.out) {
        json j = to_json(summary);
        j["label"] = args.label.value_or(fs::path(args.traces).stem().string());
        write_file_atomic(*args.out, j.dump(2) + "\n");
    }
    return summary;
}

RewardOutcome cmd_reward(const RewardArgs& args, const RunConfig& config, std::ostream& log) {
    const std::vector<DialogueTrace> traces = read_traces(args.traces);
    std::map<std::string, Instance> by_id;
    for (auto& i : read_instances(args.instances)) by_id.emplace(i.id, std::move(i));

    BackendFactory backends(config);
    auto templates = load_templates(config);
    const bool needs_judge = std::any_of(traces.begin(), traces.end(), [](const DialogueTrace& t) {
        return !t.skipped() && std::any_of(t.verdicts.begin(), t.verdicts.end(), [](const JudgeVerdict& v) {
                   return !v.targeted_checkpoints.has_value();
               });
    });
    CallContext base;
    base.retry_budget = config.judge_retry_budget;
    base.params = backends.params("judge");
    if (templates) base.templates = templates.get();
    std::shared_ptr<ChatBackend> judge;
    if (needs_judge) {
        judge = backends.get("judge");
        base.backend = judge.get();
    }

    std::vector<std::optional<RewardTrajectory>> slots(traces.size());
    std::vector<char> rejudged(traces.size(), 0);
    std::vector<std::string> notes(traces.size());
    parallel_for(traces.size(), config.parallelism, [&](std::size_t i) {
        const DialogueTrace& t = traces[i];
        if (t.skipped()) {
            notes[i] = "trace was skipped during evaluation";
            return;
        }
        if (t.dimension == Dimension::behavior) {
            notes[i] = "behavior trace has no rubric";
            return;
        }
        auto it = by_id.find(t.instance_id);
        if (it == by_id.end()) {
            notes[i] = "instance not found";
            return;
        }
        CallContext ctx = base;
        ctx.seed = static_cast<std::int64_t>(derive_seed(config.seed, t.instance_id) & 0x7fffffff);
        bool again = false;
        auto verdicts = reward_verdicts(t, it->second, ctx, again);
        rejudged[i] = again ? 1 : 0;
        if (!verdicts) {
            notes[i] = "reward-mode judge output unparseable";
            return;
        }
        slots[i] = annotate_trajectory(t, *verdicts, it->second.rubric_size(), i + 1);
    });

    RewardOutcome out;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        if (rejudged[i]) ++out.readjudicated;
        if (slots[i]) {
            out.trajectories.push_back(std::move(*slots[i]));
        } else {
            ++out.skipped;
            log << "no trajectory for " << traces[i].instance_id << " (line " << i + 1 << "): " << notes[i] << "\n";
        }
    }
    write_trajectories(args.out, out.trajectories);
    log << "wrote " << out.trajectories.size() << " trajectories to " << args.out << " (" << out.readjudicated
        << " re-judged, " << out.skipped << " without trajectory)\n";
    return out;
}

std::string render_comparison_table(const std::vector<LabeledSummary>& runs) {
    // Column groups: every split seen in any run, or "overall" for unsplit runs.
    std::vector<std::string> groups;
    auto group_of = [](const MetricsSummary& s, const std::string& key) -> const MetricsSummary* {
        if (s.per_split.empty()) return key == "overall" ? &s : nullptr;
        auto it = s.per_split.find(key);
        return it == s.per_split.end() ? nullptr : &it->second;
    };
    for (const auto& r : runs) {
        if (r.summary.per_split.empty()) {
            if (std::find(groups.begin(), groups.end(), "overall") == groups.end()) groups.push_back("overall");
        }
        for (const auto& [key, _] : r.summary.per_split) {
            if (std::find(groups.begin(), groups.end(), key) == groups.end()) groups.push_back(key);
        }
    }

    struct Column {
        std::string group;
        std::string metric;
    };
    std::vector<Column> columns;
    for (const auto& g : groups) {
        bool graded = false;
        bool behavior = false;
        for (const auto& r : runs) {
            if (const auto* s = group_of(r.summary, g)) {
                graded = graded || s->acc.defined() || s->unq.defined();
                behavior = behavior || s->ask.defined() || s->dir.defined();
            }
        }
        if (graded) {
            for (const char* m : {"acc", "cov", "unq"}) columns.push_back({g, m});
        }
        if (behavior) {
            for (const char* m : {"ask", "dir"}) columns.push_back({g, m});
        }
    }

    std::size_t label_width = 8;
    for (const auto& r : runs) label_width = std::max(label_width, r.label.size() + 2);
    constexpr std::size_t kCell = 8;

    std::ostringstream s;
    s << pad("", label_width);
    for (std::size_t c = 0; c < columns.size(); ++c) {
        const bool first = c == 0 || columns[c - 1].group != columns[c].group;
        s << pad(first ? columns[c].group : "", kCell);
    }
    s << "\n" << pad("model", label_width);
    for (const auto& c : columns) s << pad(c.metric, kCell);
    s << "\n";
    for (const auto& r : runs) {
        s << pad(r.label, label_width);
        for (const auto& c : columns) {
            const MetricsSummary* m = group_of(r.summary, c.group);
            std::string cell = "-";
            if (m) {
                const Rate& rate = c.metric == "acc"   ? m->acc
                                   : c.metric == "cov" ? m->cov
                                   : c.metric == "unq" ? m->unq
                                   : c.metric == "ask" ? m->ask
                                                       : m->dir;
                cell = fmt_rate(rate);
            }
            s << pad(cell, kCell);
        }
        s << "\n";
    }
    return s.str();
}

std::string cmd_report(const ReportArgs& args, std::ostream& out) {
    std::vector<LabeledSummary> runs;
    for (const auto& path : args.summaries) {
        json j;
        try {
            j = json::parse(read_file(path));
        } catch (const json::exception& e) {
            throw IoError(path + ": " + e.what());
        }
        runs.push_back({j.value("label", fs::path(path).stem().string()), summary_from_json(j)});
    }
    const std::string table = render_comparison_table(runs);
    out << table;
    if (args.out) write_file_atomic(*args.out, table);
    return table;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Ask-before-answer evaluation harness"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> settings;
    std::map<std::string, std::string> flags;
    auto add_run_flags = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "configuration file (JSON)");
        sub->add_option("--set", settings, "override a configuration field, e.g. backends.judge.model=name");
        for (const char* name : {"protocol", "guidance", "prompt-mode", "max-turns", "parallelism", "seed",
                                 "retry-budget", "per-domain", "templates", "scripted"}) {
            sub->add_option_function<std::string>(std::string("--") + name,
                                                  [&flags, name](const std::string& v) { flags[name] = v; });
        }
    };

    BuildArgs build;
    std::string dimension = "mind";
    auto* build_cmd = app.add_subcommand("build", "construct instances from a QA corpus");
    build_cmd->add_option("corpus", build.source, "line-delimited QA pairs")->required();
    build_cmd->add_option("--dimension", dimension, "mind|overconfidence");
    build_cmd->add_option("-o,--out", build.out, "instance file")->required();
    add_run_flags(build_cmd);

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "run multi-turn dialogues");
    eval_cmd->add_option("instances", eval.instances, "instance file")->required();
    eval_cmd->add_option("-o,--out", eval.out, "trace file")->required();
    bool reward_mode = false;
    eval_cmd->add_flag("--reward-mode", reward_mode, "judge every turn in reward mode");
    add_run_flags(eval_cmd);

    ScoreArgs score;
    std::string group_by = "none";
    std::string score_out;
    std::string score_label;
    auto* score_cmd = app.add_subcommand("score", "compute metrics from a trace file");
    score_cmd->add_option("traces", score.traces, "trace file")->required();
    score_cmd->add_option("--group-by", group_by, "domain|dimension|none");
    score_cmd->add_option("-o,--out", score_out, "machine-readable summary");
    score_cmd->add_option("--label", score_label, "run label stored in the summary");

    RewardArgs reward;
    auto* reward_cmd = app.add_subcommand("reward", "annotate traces with turn rewards");
    reward_cmd->add_option("traces", reward.traces, "trace file")->required();
    reward_cmd->add_option("--instances", reward.instances, "instance file")->required();
    reward_cmd->add_option("-o,--out", reward.out, "trajectory file")->required();
    add_run_flags(reward_cmd);

    ReportArgs report;
    std::string report_out;
    auto* report_cmd = app.add_subcommand("report", "compare summary files side by side");
    report_cmd->add_option("summaries", report.summaries, "summary files")->required();
    report_cmd->add_option("-o,--out", report_out, "write the table to a file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsageError;
    }

    try {
        json doc = config_path.empty() ? json::object() : read_config_document(config_path);
        for (const auto& s : settings) apply_setting(doc, s);
        RunConfig config = parse_config_at(
            doc, config_path.empty() ? fs::current_path() : fs::absolute(config_path).parent_path());
        apply_overrides(config, flags);
        if (reward_mode) config.reward_mode = true;

        if (*build_cmd) {
            try {
                build.dimension = parse_dimension(dimension);
            } catch (const ValidationError& e) {
                throw ConfigError(e.what());
            }
            cmd_build(build, config, err);
        } else if (*eval_cmd) {
            const auto traces = cmd_eval(eval, config, err);
            const bool all_skipped = !traces.empty() && std::all_of(traces.begin(), traces.end(),
                                                                    [](const DialogueTrace& t) { return t.skipped(); });
            if (all_skipped) return kAllSkipped;
        } else if (*score_cmd) {
            try {
                score.group_by = parse_group_by(group_by);
            } catch (const ValidationError& e) {
                throw ConfigError(e.what());
            }
            if (!score_out.empty()) score.out = score_out;
            if (!score_label.empty()) score.label = score_label;
            const MetricsSummary s = cmd_score(score, out);
            if (s.n_total > 0 && s.n_skipped == s.n_total) return kAllSkipped;
        } else if (*reward_cmd) {
            const RewardOutcome r = cmd_reward(reward, config, err);
            if (r.trajectories.empty() && r.skipped > 0) return kAllSkipped;
        } else if (*report_cmd) {
            if (!report_out.empty()) report.out = report_out;
            cmd_report(report, out);
        }
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kRuntimeFailure;
    }
    return kSuccess;
}

}  // namespace askeval::cli
