#pragma once

// A four-domain, ten-item corpus with one script file that drives
// construction, evaluation, and reward re-judging through the CLI.
//
// Item n of each domain has 1 + n % 3 checkpoints and follows pattern n % 5:
//   0  correct answer on turn 1
//   1  asks about every checkpoint, then answers correctly
//   2  untargeted question, a question about one checkpoint, still asking at the end
//   3  asks about one checkpoint, then answers wrongly
//   4  wrong answer on turn 1
// Item 9 of each domain never yields a valid construction payload.

#include "askeval/structured.hpp"
#include "support.hpp"

#include <fstream>
#include <string>
#include <vector>

namespace askeval::testing {

inline const std::vector<std::string>& fixture_domains() {
    static const std::vector<std::string> d = {"math", "medical", "legal", "coding"};
    return d;
}

inline std::string fixture_id(const std::string& domain, int n) {
    return domain + "-" + std::to_string(n);
}

inline std::vector<std::string> fixture_criteria(const std::string& id, int n) {
    std::vector<std::string> out;
    for (int k = 1; k <= 1 + n % 3; ++k) out.push_back("Criterion " + std::to_string(k) + " of " + id);
    return out;
}

struct PipelineFixture {
    std::string corpus;
    std::string script;
    std::string config;
};

inline PipelineFixture write_pipeline_fixture(const TempDir& dir) {
    PipelineFixture f{dir.file("corpus.jsonl"), dir.file("script.jsonl"), dir.file("config.json")};
    std::ofstream corpus(f.corpus);
    std::ofstream script(f.script);
    auto line = [&](const std::string& id, const char* channel, int index, const std::string& text) {
        script << json{{"dialogue", id}, {"channel", channel}, {"index", index}, {"text", text}}.dump() << "\n";
    };
    auto reply = [](bool final_answer, std::optional<bool> correct, const std::vector<std::string>& missing,
                    const std::vector<std::string>& targeted, bool reward) {
        return verdict_reply(final_answer, correct, missing,
                             reward ? std::optional<std::vector<std::string>>(targeted) : std::nullopt);
    };

    for (const auto& domain : fixture_domains()) {
        for (int n = 0; n < 10; ++n) {
            const std::string id = fixture_id(domain, n);
            corpus << json{{"id", id}, {"domain", domain}, {"query", "Original question " + id + " with all details."},
                           {"answer", "answer " + id}}
                          .dump()
                   << "\n";
            const auto crit = fixture_criteria(id, n);
            if (n == 9) {
                for (int k = 1; k <= 4; ++k) line(id, "construct", k, "I could not produce that.");
                continue;
            }
            line(id, "construct", 1,
                 "```json\n" +
                     json{{"degraded_info", "Details of " + id + " were blurred."},
                          {"rubric_criteria", crit},
                          {"degraded_question", "Vague question " + id + "."}}
                         .dump(2) +
                     "\n```");

            const std::vector<std::string> rest(crit.begin() + 1, crit.end());
            // Each step: policy text, then verdict builder, for eval (judge) and reward (reward_judge).
            struct Turn {
                std::string policy;
                bool final_answer;
                std::optional<bool> correct;
                std::vector<std::string> missing;
                std::vector<std::string> targeted;
            };
            std::vector<Turn> turns;
            switch (n % 5) {
                case 0: turns = {{"The answer is answer " + id + ".", true, true, crit, {}}}; break;
                case 1:
                    turns = {{"Please tell me every missing detail.", false, std::nullopt, crit, crit},
                             {"The answer is answer " + id + ".", true, true, {}, {}}};
                    break;
                case 2:
                    turns = {{"Can you say more?", false, std::nullopt, crit, {}},
                             {"What is the first detail?", false, std::nullopt, rest, {crit[0]}},
                             {"Anything else I should know?", false, std::nullopt, rest, {}}};
                    break;
                case 3:
                    turns = {{"What is the first detail?", false, std::nullopt, rest, {crit[0]}},
                             {"The answer is something else.", true, false, rest, {}}};
                    break;
                default: turns = {{"I guess the answer is wrong.", true, false, crit, {}}}; break;
            }
            int index = 0;
            for (const auto& t : turns) {
                ++index;
                line(id, "policy", index, t.policy);
                line(id, "judge", index, reply(t.final_answer, t.correct, t.missing, t.targeted, false));
                line(id, "reward_judge", index, reply(t.final_answer, t.correct, t.missing, t.targeted, true));
                line(id, "simulator", index, "Here is detail " + std::to_string(index) + " for " + id + ".");
            }
        }
    }

    const json cfg = {
        {"backends",
         {{"policy", {{"kind", "scripted"}, {"script", "script.jsonl"}, {"model", "fixture-policy"}}},
          {"judge", {{"kind", "scripted"}, {"script", "script.jsonl"}, {"model", "fixture-judge"}}},
          {"simulator", {{"kind", "scripted"}, {"script", "script.jsonl"}}},
          {"constructor", {{"kind", "scripted"}, {"script", "script.jsonl"}}}}},
        {"seed", 7},
        {"parallelism", 2},
    };
    std::ofstream(f.config) << cfg.dump(2) << "\n";
    return f;
}

}  // namespace askeval::testing
