#pragma once

#include "askeval/core.hpp"
#include "askeval/gateway.hpp"
#include "askeval/structured.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace askeval::testing {

inline std::string checkpoint_text(const std::string& id, std::size_t k) {
    return "detail " + std::to_string(k) + " of " + id;
}

inline Instance make_instance(const std::string& id, const std::string& domain = "math", std::size_t n_checkpoints = 2,
                              Dimension dimension = Dimension::ask_mind) {
    Instance i;
    i.id = id;
    i.dimension = dimension;
    i.domain = domain;
    i.original_query = "Full question " + id + " with every detail.";
    i.answer = "answer-" + id;
    i.variant_query = "Vague question " + id + ".";
    i.variant_summary = "Details were blurred in " + id + ".";
    const CheckpointKind kind = dimension == Dimension::ask_overconfidence ? CheckpointKind::misleading_claim
                                                                          : CheckpointKind::missing_info;
    for (std::size_t k = 1; k <= n_checkpoints; ++k) i.checkpoints.push_back({checkpoint_text(id, k), kind});
    return i;
}

inline Instance make_behavior_instance(const std::string& id, Clarity label, const std::string& domain = "in3") {
    Instance i;
    i.id = id;
    i.dimension = Dimension::behavior;
    i.domain = domain;
    i.original_query = "Task " + id;
    i.answer = "";
    i.variant_query = "Task " + id;
    i.label = label;
    return i;
}

/// Judge reply text in the standard (or reward, when `targeted` is set) schema.
inline std::string verdict_reply(bool final_answer, std::optional<bool> correct, const std::vector<std::string>& missing,
                                 const std::optional<std::vector<std::string>>& targeted = std::nullopt) {
    json j;
    j["is_final_answer"] = final_answer;
    j["is_correct"] = correct ? json(*correct) : json(nullptr);
    j["all_rubric_criteria_resolved"] = missing.empty();
    j["missing_rubric_criteria"] = missing;
    if (targeted) j["targeted_rubric_criteria"] = *targeted;
    j["notes"] = "scripted";
    return "```json\n" + j.dump(2) + "\n```";
}

/// One policy turn of a scripted dialogue. `simulator` is consumed only when
/// the dialogue continues past this turn.
struct Step {
    std::string policy;
    std::string judge;
    std::string simulator = "Here is the detail you asked for.";
};

inline void script_dialogue(ScriptedBackend& backend, const std::string& id, const std::vector<Step>& steps) {
    int n = 0;
    for (const auto& s : steps) {
        ++n;
        backend.set(id, "policy", n, s.policy);
        backend.set(id, "judge", n, s.judge);
        backend.set(id, "simulator", n, s.simulator);
    }
}

class TempDir {
  public:
    TempDir() {
        static std::mt19937_64 rng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() / ("askeval-test-" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] std::string file(const std::string& name) const { return (path_ / name).string(); }
    [[nodiscard]] const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
};

}  // namespace askeval::testing
