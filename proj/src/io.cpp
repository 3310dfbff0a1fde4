#include "askeval/io.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace askeval {
namespace {

template <typename T>
T get_field(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw ValidationError(key, "missing");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ValidationError(key, "wrong type");
    }
}

std::string get_string(const json& j, const char* key) { return get_field<std::string>(j, key); }

std::optional<std::string> get_optional_string(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return get_field<std::string>(j, key);
}

json rate_value(const Rate& r) {
    if (auto v = r.value()) return *v;
    return nullptr;
}

json role_params(const RoleParams& p) {
    return {{"model", p.model}, {"temperature", p.temperature}, {"max_tokens", p.max_tokens}};
}

RoleParams role_params_from(const json& j) {
    return RoleParams{get_string(j, "model"), get_field<double>(j, "temperature"), get_field<int>(j, "max_tokens")};
}

ConfigSnapshot config_from_json(const json& j) {
    ConfigSnapshot c;
    c.protocol = parse_protocol(get_string(j, "protocol"));
    c.guidance = parse_guidance(get_string(j, "guidance"));
    c.prompt_mode = parse_prompt_mode(get_string(j, "prompt_mode"));
    c.max_turns = get_field<int>(j, "max_turns");
    c.reward_mode = get_field<bool>(j, "reward_mode");
    c.seed = get_field<std::uint64_t>(j, "seed");
    c.policy = role_params_from(j.at("policy"));
    c.judge = role_params_from(j.at("judge"));
    c.simulator = role_params_from(j.at("simulator"));
    return c;
}

void require_format(const json& j, const char* expected) {
    const std::string format = get_string(j, "format");
    if (format != expected) {
        throw ValidationError("format", "expected " + std::string(expected) + ", found " + format);
    }
}

template <typename T, typename Decode>
std::vector<T> read_strict(const std::string& path, Decode decode) {
    std::istringstream in(read_file(path));
    std::vector<T> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (normalize_whitespace(line).empty()) continue;
        try {
            out.push_back(decode(json::parse(line)));
        } catch (const std::exception& e) {
            throw RecordError(line_no, e.what());
        }
    }
    return out;
}

}  // namespace

json to_json(const QAPair& pair) {
    return {{"id", pair.id}, {"domain", pair.domain}, {"query", pair.query}, {"answer", pair.answer}};
}

json to_json(const Instance& instance) {
    json checkpoints = json::array();
    for (const auto& cp : instance.checkpoints) {
        checkpoints.push_back({{"text", cp.text}, {"kind", std::string(to_string(cp.kind))}});
    }
    json j = {
        {"id", instance.id},
        {"dimension", std::string(to_string(instance.dimension))},
        {"domain", instance.domain},
        {"original_query", instance.original_query},
        {"answer", instance.answer},
        {"variant_query", instance.variant_query},
        {"variant_summary", instance.variant_summary},
        {"checkpoints", std::move(checkpoints)},
    };
    if (instance.label) j["label"] = std::string(to_string(*instance.label));
    if (instance.reference_solution) j["reference_solution"] = *instance.reference_solution;
    return j;
}

json to_json(const JudgeVerdict& verdict) {
    json j = {
        {"is_final_answer", verdict.is_final_answer},
        {"correctness", std::string(to_string(verdict.correctness))},
        {"all_resolved", verdict.all_resolved},
        {"missing_checkpoints", verdict.missing_checkpoints},
    };
    if (verdict.targeted_checkpoints) j["targeted_checkpoints"] = *verdict.targeted_checkpoints;
    if (verdict.notes) j["notes"] = *verdict.notes;
    return j;
}

json to_json(const ConfigSnapshot& config) {
    return {
        {"protocol", std::string(to_string(config.protocol))},
        {"guidance", std::string(to_string(config.guidance))},
        {"prompt_mode", std::string(to_string(config.prompt_mode))},
        {"max_turns", config.max_turns},
        {"reward_mode", config.reward_mode},
        {"seed", config.seed},
        {"policy", role_params(config.policy)},
        {"judge", role_params(config.judge)},
        {"simulator", role_params(config.simulator)},
    };
}

json to_json(const DialogueTrace& trace) {
    json turns = json::array();
    for (const auto& t : trace.turns) {
        turns.push_back({{"index", t.index}, {"role", std::string(to_string(t.role))}, {"text", t.text}});
    }
    json verdicts = json::array();
    for (const auto& v : trace.verdicts) verdicts.push_back(to_json(v));

    json j = {
        {"format", kTraceFormat},
        {"instance_id", trace.instance_id},
        {"dimension", std::string(to_string(trace.dimension))},
        {"domain", trace.domain},
    };
    if (trace.label) j["label"] = std::string(to_string(*trace.label));
    j["protocol"] = std::string(to_string(trace.protocol));
    j["config"] = to_json(trace.config);
    j["turns"] = std::move(turns);
    j["verdicts"] = std::move(verdicts);
    j["outcome"] = std::string(to_string(trace.outcome));
    j["resolved_all_before_answer"] = trace.resolved_all_before_answer;
    j["asked_after_all_resolved"] = trace.asked_after_all_resolved;
    if (trace.skip_cause) j["skip_cause"] = *trace.skip_cause;
    return j;
}

json to_json(const RewardTrajectory& trajectory) {
    json rewards = json::array();
    for (const auto& r : trajectory.per_turn_rewards) {
        rewards.push_back({{"turn_index", r.turn_index}, {"reward", r.reward}, {"case", r.case_tag}});
    }
    return {
        {"format", kTrajectoryFormat},
        {"trace_ref", {{"instance_id", trajectory.instance_id}, {"line", trajectory.trace_line}}},
        {"rubric_size", trajectory.rubric_size},
        {"terminal_decision", std::string(to_string(trajectory.terminal_decision))},
        {"rewards", std::move(rewards)},
    };
}

json to_json(const MetricsSummary& summary) {
    json counts = json::object();
    for (const auto& [name, rate] : {std::pair<const char*, const Rate*>{"acc", &summary.acc},
                                     {"cov", &summary.cov},
                                     {"unq", &summary.unq},
                                     {"ask", &summary.ask},
                                     {"dir", &summary.dir}}) {
        counts[name] = {{"num", rate->num}, {"den", rate->den}};
    }
    json j = {
        {"n_total", summary.n_total},
        {"n_skipped", summary.n_skipped},
        {"n_evaluated", summary.n_evaluated()},
        {"n_final_answered", summary.n_final_answered},
        {"acc", rate_value(summary.acc)},
        {"cov", rate_value(summary.cov)},
        {"unq", rate_value(summary.unq)},
        {"ask", rate_value(summary.ask)},
        {"dir", rate_value(summary.dir)},
        {"counts", std::move(counts)},
    };
    json splits = json::object();
    for (const auto& [key, nested] : summary.per_split) splits[key] = to_json(nested);
    j["per_split"] = std::move(splits);
    return j;
}

QAPair qa_pair_from_json(const json& j) {
    QAPair p{get_string(j, "id"), j.contains("domain") ? get_string(j, "domain") : std::string(),
             get_string(j, "query"), get_string(j, "answer")};
    validate(p);
    return p;
}

Instance instance_from_json(const json& j) {
    Instance i;
    i.id = get_string(j, "id");
    i.dimension = parse_dimension(get_string(j, "dimension"));
    i.domain = get_string(j, "domain");
    i.original_query = get_string(j, "original_query");
    i.answer = get_string(j, "answer");
    i.variant_query = get_string(j, "variant_query");
    i.variant_summary = get_string(j, "variant_summary");
    const json& cps = j.at("checkpoints");
    if (!cps.is_array()) throw ValidationError("checkpoints", "must be an array");
    for (const auto& c : cps) {
        i.checkpoints.push_back({get_string(c, "text"), parse_checkpoint_kind(get_string(c, "kind"))});
    }
    if (auto label = get_optional_string(j, "label")) i.label = parse_clarity(*label);
    i.reference_solution = get_optional_string(j, "reference_solution");
    validate(i);
    return i;
}

JudgeVerdict verdict_from_json(const json& j) {
    JudgeVerdict v;
    v.is_final_answer = get_field<bool>(j, "is_final_answer");
    v.correctness = parse_correctness(get_string(j, "correctness"));
    v.all_resolved = get_field<bool>(j, "all_resolved");
    v.missing_checkpoints = get_field<std::vector<std::string>>(j, "missing_checkpoints");
    if (j.contains("targeted_checkpoints")) {
        v.targeted_checkpoints = get_field<std::vector<std::string>>(j, "targeted_checkpoints");
    }
    v.notes = get_optional_string(j, "notes");
    return v;
}

DialogueTrace trace_from_json(const json& j) {
    require_format(j, kTraceFormat);
    DialogueTrace t;
    t.instance_id = get_string(j, "instance_id");
    t.dimension = parse_dimension(get_string(j, "dimension"));
    t.domain = get_string(j, "domain");
    if (auto label = get_optional_string(j, "label")) t.label = parse_clarity(*label);
    t.protocol = parse_protocol(get_string(j, "protocol"));
    t.config = config_from_json(j.at("config"));
    for (const auto& turn : j.at("turns")) {
        t.turns.push_back({get_field<int>(turn, "index"), parse_role(get_string(turn, "role")),
                           get_string(turn, "text")});
    }
    for (const auto& v : j.at("verdicts")) t.verdicts.push_back(verdict_from_json(v));
    t.outcome = parse_outcome(get_string(j, "outcome"));
    t.resolved_all_before_answer = get_field<bool>(j, "resolved_all_before_answer");
    t.asked_after_all_resolved = get_field<bool>(j, "asked_after_all_resolved");
    t.skip_cause = get_optional_string(j, "skip_cause");
    validate(t);
    return t;
}

RewardTrajectory trajectory_from_json(const json& j) {
    require_format(j, kTrajectoryFormat);
    RewardTrajectory r;
    const json& ref = j.at("trace_ref");
    r.instance_id = get_string(ref, "instance_id");
    r.trace_line = get_field<std::size_t>(ref, "line");
    r.rubric_size = get_field<std::size_t>(j, "rubric_size");
    r.terminal_decision = parse_outcome(get_string(j, "terminal_decision"));
    for (const auto& item : j.at("rewards")) {
        r.per_turn_rewards.push_back(
            {get_field<int>(item, "turn_index"), get_field<double>(item, "reward"), get_string(item, "case")});
    }
    validate(r);
    return r;
}

MetricsSummary summary_from_json(const json& j) {
    MetricsSummary s;
    s.n_total = get_field<std::size_t>(j, "n_total");
    s.n_skipped = get_field<std::size_t>(j, "n_skipped");
    s.n_final_answered = get_field<std::size_t>(j, "n_final_answered");
    const json& counts = j.at("counts");
    auto rate = [&](const char* key) {
        const json& c = counts.at(key);
        return Rate{get_field<std::size_t>(c, "num"), get_field<std::size_t>(c, "den")};
    };
    s.acc = rate("acc");
    s.cov = rate("cov");
    s.unq = rate("unq");
    s.ask = rate("ask");
    s.dir = rate("dir");
    if (auto it = j.find("per_split"); it != j.end()) {
        for (const auto& [key, nested] : it->items()) s.per_split.emplace(key, summary_from_json(nested));
    }
    return s;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    static std::atomic<unsigned> sequence{0};
    const std::string tmp = path + ".tmp." + std::to_string(::getpid()) + "." + std::to_string(sequence++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            out.close();
            std::error_code ignored;
            fs::remove(tmp, ignored);
            throw IoError("failed writing " + tmp);
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        fs::remove(tmp, ignored);
        throw IoError("cannot move output into place at " + path + ": " + ec.message());
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

LoadResult<QAPair> load_qa_corpus(const std::string& path) {
    std::istringstream in(read_file(path));
    LoadResult<QAPair> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (normalize_whitespace(line).empty()) continue;
        try {
            out.records.push_back(qa_pair_from_json(json::parse(line)));
        } catch (const std::exception& e) {
            out.errors.emplace_back(line_no, e.what());
        }
    }
    return out;
}

std::vector<Instance> read_instances(const std::string& path) {
    auto out = read_strict<Instance>(path, instance_from_json);
    validate_unique_ids(out);
    return out;
}

std::vector<DialogueTrace> read_traces(const std::string& path) {
    return read_strict<DialogueTrace>(path, trace_from_json);
}

std::vector<RewardTrajectory> read_trajectories(const std::string& path) {
    return read_strict<RewardTrajectory>(path, trajectory_from_json);
}

std::size_t write_instances(const std::string& path, const std::vector<Instance>& instances) {
    write_file_atomic(path, to_jsonl(instances));
    return instances.size();
}

std::size_t write_traces(const std::string& path, const std::vector<DialogueTrace>& traces) {
    write_file_atomic(path, to_jsonl(traces));
    return traces.size();
}

std::size_t write_trajectories(const std::string& path, const std::vector<RewardTrajectory>& trajectories) {
    write_file_atomic(path, to_jsonl(trajectories));
    return trajectories.size();
}

}  // namespace askeval
