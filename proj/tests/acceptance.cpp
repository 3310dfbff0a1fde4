// Acceptance suite: one PASS/FAIL line per criterion, each under its time limit.

#include "askeval/cli.hpp"
#include "askeval/construct.hpp"
#include "askeval/dialogue.hpp"
#include "askeval/io.hpp"
#include "askeval/metrics.hpp"
#include "askeval/reward.hpp"
#include "pipeline_fixture.hpp"
#include "trace_oracle.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace askeval;
using namespace askeval::testing;

namespace {

class Failure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

void expect(bool ok, const std::string& what) {
    if (!ok) throw Failure(what);
}

template <typename T>
std::string show(const T& v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

std::shared_ptr<ScriptedBackend> shared_script() {
    return std::make_shared<ScriptedBackend>();
}

LoopConfig with_script(LoopConfig c, const std::shared_ptr<ScriptedBackend>& b) {
    c.policy = b;
    c.judge = b;
    c.simulator = b;
    return c;
}

// 1 -------------------------------------------------------------------------
void reward_table() {
    // Hand-written case table: rows are (m, c_t) for a non-answering turn.
    struct Row {
        std::size_t m, c;
        double r;
    };
    const Row rows[] = {
        {1, 0, -0.8}, {1, 1, 1.0},
        {2, 0, -0.8}, {2, 1, 0.8}, {2, 2, 1.0},
        {3, 0, -0.8}, {3, 1, 0.8}, {3, 2, 0.8}, {3, 3, 1.0},
        {4, 0, -0.8}, {4, 1, 0.8}, {4, 2, 0.8}, {4, 3, 0.8}, {4, 4, 1.0},
        {5, 0, -0.8}, {5, 1, 0.8}, {5, 2, 0.8}, {5, 3, 0.8}, {5, 4, 0.8}, {5, 5, 1.0},
    };
    std::size_t checked = 0;
    for (const auto& row : rows) {
        expect(intermediate_reward({false, row.c, row.m}) == row.r,
               "a=0 m=" + show(row.m) + " c=" + show(row.c) + " gave " + show(intermediate_reward({false, row.c, row.m})));
        expect(intermediate_reward({true, row.c, row.m}) == -2.0, "a=1 m=" + show(row.m) + " c=" + show(row.c));
        checked += 2;
    }
    expect(checked == 40, "admissible pair count");
    expect(terminal_reward(Outcome::correct) == 1.0, "terminal correct");
    expect(terminal_reward(Outcome::wrong) == -1.0, "terminal wrong");
    expect(terminal_reward(Outcome::still_asking) == -2.0, "terminal still asking");
}

// 2 -------------------------------------------------------------------------
void reward_bounds() {
    std::mt19937 rng(2024);
    const Outcome outcomes[] = {Outcome::correct, Outcome::wrong, Outcome::still_asking, Outcome::protocol_violation};
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t len = 1 + rng() % 5;
        const std::size_t m = 1 + rng() % 5;
        DialogueTrace t;
        t.instance_id = "rb" + show(trial);
        int idx = 0;
        std::vector<JudgeVerdict> verdicts;
        for (std::size_t k = 0; k < len; ++k) {
            t.turns.push_back({++idx, Role::user, "u"});
            t.turns.push_back({++idx, Role::assistant, "a"});
            JudgeVerdict v;
            v.is_final_answer = rng() % 3 == 0;
            v.targeted_checkpoints = std::vector<std::string>(rng() % (m + 1), "c");
            verdicts.push_back(v);
            t.verdicts.push_back(v);
        }
        t.outcome = outcomes[rng() % 4];
        const RewardTrajectory r = annotate_trajectory(t, verdicts, m);
        expect(r.per_turn_rewards.size() == len, "one reward per assistant turn");
        std::size_t terminals = 0;
        for (const auto& tr : r.per_turn_rewards) {
            expect(tr.reward >= -2.0 && tr.reward <= 1.0, "reward out of bounds: " + show(tr.reward));
            terminals += tr.case_tag.rfind("terminal_", 0) == 0;
        }
        expect(terminals == 1, "trial " + show(trial) + " has " + show(terminals) + " terminal rewards");
        expect(r.per_turn_rewards.back().case_tag.rfind("terminal_", 0) == 0, "terminal reward is last");
    }
}

// 3 -------------------------------------------------------------------------
void metric_oracle() {
    std::mt19937 rng(3);
    std::size_t empty_seen = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto traces = random_trace_set(rng, 200);
        const MetricsSummary s = summarize(traces);
        const OracleMetrics o = oracle_metrics(traces);
        expect(summary_matches(s, o, traces.size()), "trial " + show(trial) + " disagrees with the oracle");
        for (const Rate* r : {&s.acc, &s.cov, &s.unq, &s.ask, &s.dir}) {
            if (r->defined()) continue;
            ++empty_seen;
            bool raised = false;
            try {
                (void)r->fraction("metric");
            } catch (const EmptyDenominator&) {
                raised = true;
            }
            expect(raised, "empty denominator not surfaced");
        }
    }
    // Explicit all-skipped and empty sets.
    std::vector<DialogueTrace> none;
    const MetricsSummary empty = summarize(none);
    expect(!empty.acc.value() && !empty.cov.value() && !empty.unq.value(), "empty set must have no values");
    expect(empty_seen > 0, "generator never produced an empty denominator");
}

// 4 -------------------------------------------------------------------------
void protocol_standard() {
    const std::string force_final = TemplateSet::builtin().get("force_final");
    {
        Instance i = make_instance("ask", "math", 2);
        auto b = shared_script();
        const auto& cp = i.checkpoints;
        script_dialogue(*b, "ask", {{"Which value?", verdict_reply(false, std::nullopt, {cp[0].text, cp[1].text}), "It is 3."},
                                    {"And the other?", verdict_reply(false, std::nullopt, {cp[1].text}), "It is 4."},
                                    {"Anything else?", verdict_reply(false, std::nullopt, {})}});
        const DialogueTrace t = run_dialogue(i, with_script(LoopConfig::standard(), b));
        expect(t.outcome == Outcome::still_asking, "(a) outcome " + std::string(to_string(t.outcome)));
        expect(t.assistant_turn_count() == 3, "(a) assistant turns " + show(t.assistant_turn_count()));
        const std::vector<Role> shape = {Role::user, Role::assistant, Role::user, Role::assistant, Role::user, Role::assistant};
        expect(t.turns.size() == shape.size(), "(a) turn count");
        for (std::size_t k = 0; k < shape.size(); ++k) {
            expect(t.turns[k].role == shape[k] && t.turns[k].index == static_cast<int>(k + 1), "(a) turn shape");
        }
        expect(t.turns[4].text == "It is 4.\n\n" + force_final, "(a) force-final missing before turn 3");
        expect(t.turns[2].text.find(force_final) == std::string::npos, "(a) force-final too early");
        expect(t.verdicts.size() == 3, "(a) verdict count");
    }
    {
        Instance i = make_instance("direct", "math", 2);
        auto b = shared_script();
        script_dialogue(*b, "direct", {{"The answer is answer-direct.", verdict_reply(true, true, {i.checkpoints[0].text})}});
        const DialogueTrace t = run_dialogue(i, with_script(LoopConfig::standard(), b));
        expect(t.outcome == Outcome::correct, "(b) outcome " + std::string(to_string(t.outcome)));
        expect(t.assistant_turn_count() == 1 && t.turns.size() == 2, "(b) trace shape");
        expect(t.turns[0].role == Role::user && t.turns[1].role == Role::assistant, "(b) roles");
        expect(t.verdicts.size() == 1, "(b) verdict count");
    }
}

// 5 -------------------------------------------------------------------------
void protocol_hard() {
    auto b = shared_script();
    std::vector<Instance> instances;
    for (int n = 0; n < 20; ++n) {
        Instance i = make_instance("hard" + show(n), "math", 2);
        const bool resolved = n < 15;
        script_dialogue(*b, i.id,
                        {{"Final answer: 42.",
                          verdict_reply(true, n % 2 == 0, resolved ? std::vector<std::string>{} : std::vector<std::string>{i.checkpoints[1].text})}});
        instances.push_back(i);
    }
    const auto traces = run_batch(instances, with_script(LoopConfig::hard(), b), 4);
    std::size_t violations = 0;
    for (const auto& t : traces) violations += t.outcome == Outcome::protocol_violation;
    expect(violations == 20, "protocol violations " + show(violations) + "/20");

    const MetricsSummary s = summarize(traces);
    const OracleMetrics o = oracle_metrics(traces);
    expect(summary_matches(s, o, traces.size()), "summary disagrees with the counting oracle");
    expect(s.acc.num == 0 && s.acc.den == 20 && s.acc.value() == 0.0, "accuracy " + show(s.acc.num) + "/" + show(s.acc.den));
    expect(s.cov.num == 15 && s.cov.den == 20 && s.cov.value() == 0.75, "coverage " + show(s.cov.num) + "/" + show(s.cov.den));
}

// 6 -------------------------------------------------------------------------
void skip_semantics() {
    auto b = shared_script();
    std::vector<Instance> instances;
    for (int n = 0; n < 10; ++n) {
        Instance i = make_instance("skip" + show(n), "math", 1);
        if (n == 3 || n == 7) {
            b->set(i.id, "policy", 1, "The answer is 42.");
            for (int k = 1; k <= 4; ++k) b->set(i.id, "judge", k, "The assistant did well overall.");
        } else {
            script_dialogue(*b, i.id, {{"The answer is 42.", verdict_reply(true, n % 2 == 0, {})}});
        }
        instances.push_back(i);
    }
    const auto traces = run_batch(instances, with_script(LoopConfig::standard(), b), 1);
    const MetricsSummary s = summarize(traces);
    expect(s.n_skipped == 2, "n_skipped " + show(s.n_skipped));
    expect(s.acc.den == 8 && s.cov.den == 8 && s.unq.den == 8,
           "denominators " + show(s.acc.den) + "/" + show(s.cov.den) + "/" + show(s.unq.den));
    expect(traces[3].skipped() && traces[7].skipped(), "the unparseable dialogues are the skipped ones");
    expect(traces[3].verdicts.empty(), "a skipped turn records no verdict");
}

// 7 -------------------------------------------------------------------------
void construction_validation() {
    auto b = shared_script();
    std::vector<QAPair> pairs;
    std::map<std::string, DiscardCause> expected;
    for (int n = 0; n < 50; ++n) {
        QAPair p{"c" + show(n), n % 2 ? "law" : "math", "Original question " + show(n) + "?", "A" + show(n)};
        json payload = {{"degraded_info", "Blurred."},
                        {"rubric_criteria", {"Detail one", "Detail two"}},
                        {"degraded_question", "Vague question " + show(n) + "?"}};
        const int slot = n % 5 == 0 ? n / 5 : -1;  // ten malformed replies
        if (slot >= 0 && slot < 3) {
            payload.erase("rubric_criteria");
            expected[p.id] = DiscardCause::missing_key;
        } else if (slot >= 3 && slot < 6) {
            payload["rubric_criteria"] = json::array();
            expected[p.id] = DiscardCause::empty_list;
        } else if (slot >= 6 && slot < 8) {
            payload["rubric_criteria"] = {"Detail one", "  Detail   one "};
            expected[p.id] = DiscardCause::duplicate_entries;
        } else if (slot >= 8) {
            payload["degraded_question"] = p.query;
            expected[p.id] = DiscardCause::variant_unchanged;
        }
        for (int k = 1; k <= 4; ++k) b->set(p.id, "construct", k, payload.dump());
        pairs.push_back(p);
    }
    expect(expected.size() == 10, "fixture has ten malformed replies");
    const BuildReport report = build_instances(pairs, Dimension::ask_mind, *b, {}, 4);
    expect(report.instances.size() == 40, "valid instances " + show(report.instances.size()));
    expect(report.discarded.size() == 10, "discarded " + show(report.discarded.size()));
    for (const auto& d : report.discarded) {
        expect(expected.count(d.pair_id) && expected.at(d.pair_id) == d.cause,
               d.pair_id + " discarded as " + std::string(to_string(d.cause)));
    }

    TempDir dir;
    export_instances(report.instances, dir.file("a.jsonl"));
    const auto back = import_instances(dir.file("a.jsonl"));
    expect(back == report.instances, "imported instances differ");
    export_instances(back, dir.file("b.jsonl"));
    expect(read_file(dir.file("a.jsonl")) == read_file(dir.file("b.jsonl")), "re-export is not byte-identical");
}

// 8 -------------------------------------------------------------------------
void determinism() {
    TempDir dir;
    std::ofstream script(dir.file("script.jsonl"));
    std::vector<Instance> instances;
    auto line = [&](const std::string& id, const char* channel, int index, const std::string& text) {
        script << json{{"dialogue", id}, {"channel", channel}, {"index", index}, {"text", text}}.dump() << "\n";
    };
    for (int n = 0; n < 50; ++n) {
        Instance i = make_instance("det" + show(n), n % 3 ? "math" : "legal", 1 + n % 3);
        const int asks = n % 4;
        int index = 0;
        for (int k = 0; k < std::min(asks, 3); ++k) {
            ++index;
            line(i.id, "policy", index, "Question " + show(k));
            line(i.id, "judge", index, verdict_reply(false, std::nullopt, k == 0 ? std::vector<std::string>{i.checkpoints[0].text} : std::vector<std::string>{}));
            line(i.id, "simulator", index, "Reply " + show(k));
        }
        if (asks < 3) {
            ++index;
            line(i.id, "policy", index, "Final " + show(n));
            line(i.id, "judge", index, verdict_reply(true, n % 2 == 0, {}));
        }
        if (n == 13) {
            // One dialogue with an unparseable judge exercises the skip path too.
            for (int k = 1; k <= 8; ++k) line(i.id, "judge", k, "no verdict");
        }
        instances.push_back(i);
    }
    script.close();
    write_instances(dir.file("inst.jsonl"), instances);

    cli::RunConfig config;
    for (const char* role : {"policy", "judge", "simulator"}) {
        cli::BackendSpec spec;
        spec.kind = "scripted";
        spec.script = dir.file("script.jsonl");
        spec.params = cli::default_role_params(role);
        config.backends[role] = spec;
    }
    config.seed = 1234;
    std::ostringstream log;
    std::vector<std::string> outputs;
    for (std::size_t parallelism : {std::size_t{1}, std::size_t{8}, std::size_t{1}, std::size_t{8}}) {
        config.parallelism = parallelism;
        const std::string out = dir.file("traces" + show(outputs.size()) + ".jsonl");
        cli::cmd_eval({dir.file("inst.jsonl"), out}, config, log);
        outputs.push_back(read_file(out));
    }
    for (std::size_t k = 1; k < outputs.size(); ++k) expect(outputs[k] == outputs[0], "run " + show(k) + " differs");
    expect(std::count(outputs[0].begin(), outputs[0].end(), '\n') == 50, "trace count");
    expect(outputs[0].find("\"outcome\":\"skipped\"") != std::string::npos, "skip path not exercised");
}

// 9 -------------------------------------------------------------------------
int run_cli(std::vector<std::string> args, std::string* out = nullptr) {
    args.insert(args.begin(), "askeval");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream o, e;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), o, e);
    if (out) *out = o.str();
    if (code != 0) throw Failure(args[1] + " exited " + show(code) + ": " + e.str());
    return code;
}

void end_to_end() {
    TempDir dir;
    const PipelineFixture f = write_pipeline_fixture(dir);
    run_cli({"build", f.corpus, "--dimension", "mind", "-o", dir.file("inst.jsonl"), "--config", f.config});
    run_cli({"eval", dir.file("inst.jsonl"), "-o", dir.file("traces.jsonl"), "--config", f.config});
    run_cli({"score", dir.file("traces.jsonl"), "--group-by", "domain", "-o", dir.file("fixture.json"), "--label",
             "scripted-policy"});
    run_cli({"reward", dir.file("traces.jsonl"), "--instances", dir.file("inst.jsonl"), "-o", dir.file("traj.jsonl"),
             "--config", f.config});
    std::string report;
    run_cli({"report", dir.file("fixture.json")}, &report);

    std::istringstream lines(report);
    std::string groups, metrics, row;
    std::getline(lines, groups);
    std::getline(lines, metrics);
    std::getline(lines, row);
    for (const auto& d : fixture_domains()) expect(groups.find(d) != std::string::npos, "report lacks " + d);
    std::size_t acc_cols = 0;
    for (std::size_t p = metrics.find("acc"); p != std::string::npos; p = metrics.find("acc", p + 1)) ++acc_cols;
    expect(acc_cols == 4, "expected acc/cov/unq per domain");
    expect(metrics.find("cov") != std::string::npos && metrics.find("unq") != std::string::npos, "metric columns");
    expect(row.rfind("scripted-policy", 0) == 0, "model row");

    // Hand-computed rewards for five dialogues.
    struct Spot {
        std::string id;
        std::vector<double> rewards;
    };
    const std::vector<Spot> spots = {
        {"math-1", {1.0, 1.0}},            // asks all 2 items, then correct
        {"math-2", {-0.8, 0.8, -2.0}},     // untargeted, 1 of 3, still asking
        {"math-3", {1.0, -1.0}},           // 1 of 1 targeted, then wrong
        {"medical-8", {0.8, -1.0}},        // 1 of 3 targeted, then wrong
        {"coding-4", {-1.0}},              // wrong on turn 1
    };
    const auto trajectories = read_trajectories(dir.file("traj.jsonl"));
    expect(trajectories.size() == 36, "trajectory count " + show(trajectories.size()));
    for (const auto& spot : spots) {
        auto it = std::find_if(trajectories.begin(), trajectories.end(),
                               [&](const RewardTrajectory& r) { return r.instance_id == spot.id; });
        expect(it != trajectories.end(), "no trajectory for " + spot.id);
        expect(it->per_turn_rewards.size() == spot.rewards.size(), spot.id + " reward count");
        for (std::size_t k = 0; k < spot.rewards.size(); ++k) {
            expect(it->per_turn_rewards[k].reward == spot.rewards[k],
                   spot.id + " turn " + show(k + 1) + " reward " + show(it->per_turn_rewards[k].reward));
            expect(it->per_turn_rewards[k].turn_index == static_cast<int>(2 * k + 2), spot.id + " turn index");
        }
    }
}

struct Criterion {
    int number;
    std::string name;
    double limit_seconds;
    std::function<void()> body;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "reward-table exactness", 1.0, reward_table},
        {2, "reward bounds on 1000 random trajectories", 5.0, reward_bounds},
        {3, "metric-oracle equivalence on 100 random trace sets", 10.0, metric_oracle},
        {4, "protocol conformance, standard", 1.0, protocol_standard},
        {5, "protocol conformance, hard", 1.0, protocol_hard},
        {6, "skip semantics", 1.0, skip_semantics},
        {7, "construction validation and round-trip", 2.0, construction_validation},
        {8, "determinism across parallelism and runs", 5.0, determinism},
        {9, "end-to-end fixture pipeline", 10.0, end_to_end},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string problem;
        try {
            c.body();
        } catch (const std::exception& e) {
            problem = e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (problem.empty() && secs > c.limit_seconds) {
            problem = "took " + show(secs) + " s, limit " + show(c.limit_seconds) + " s";
        }
        std::ostringstream line;
        line << (problem.empty() ? "PASS" : "FAIL") << " criterion " << c.number << ": " << c.name << " ("
             << std::fixed << std::setprecision(3) << secs << " s)";
        if (!problem.empty()) line << ": " << problem;
        std::cout << line.str() << std::endl;
        failed += problem.empty() ? 0 : 1;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
