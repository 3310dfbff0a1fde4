#include "askeval/construct.hpp"

#include "askeval/io.hpp"
#include "askeval/parallel.hpp"
#include "askeval/structured.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace askeval {
namespace {

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    // Rejection sampling keeps the draw uniform on [0, n).
    const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

const std::string& require_text(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw MalformedPayload(DiscardCause::missing_key, key, "required key absent");
    if (!it->is_string()) throw MalformedPayload(DiscardCause::bad_structure, key, "must be a string");
    const auto& text = it->get_ref<const std::string&>();
    if (normalize_whitespace(text).empty()) throw MalformedPayload(DiscardCause::empty_list, key, "must be nonempty");
    return text;
}

}  // namespace

std::string_view to_string(DiscardCause cause) {
    switch (cause) {
        case DiscardCause::malformed: return "malformed";
        case DiscardCause::missing_key: return "missing_key";
        case DiscardCause::bad_structure: return "bad_structure";
        case DiscardCause::empty_list: return "empty_list";
        case DiscardCause::duplicate_entries: return "duplicate_entries";
        case DiscardCause::variant_unchanged: return "variant_unchanged";
        case DiscardCause::backend_failure: return "backend_failure";
    }
    return "?";
}

InsufficientPool::InsufficientPool(std::string domain, std::size_t available, std::size_t requested)
    : Error("domain '" + domain + "' has " + std::to_string(available) + " valid instances, " +
            std::to_string(requested) + " requested"),
      domain_(std::move(domain)),
      available_(available),
      requested_(requested) {}

PayloadKeys payload_keys(Dimension dimension) {
    switch (dimension) {
        case Dimension::ask_mind: return {"degraded_info", "rubric_criteria", "degraded_question"};
        case Dimension::ask_overconfidence:
            return {"overconfidence_info", "misleading_points", "overconfidence_question"};
        case Dimension::behavior: break;
    }
    throw ValidationError("dimension", "behavior items are not constructed");
}

ConstructionPayload parse_payload(std::string_view raw, Dimension dimension) {
    const PayloadKeys keys = payload_keys(dimension);
    auto obj = extract_json_object(raw);
    if (!obj) throw MalformedPayload(DiscardCause::malformed, "payload", "no structured block found");

    ConstructionPayload p;
    p.dimension = dimension;
    p.summary = require_text(*obj, keys.summary);
    p.question = require_text(*obj, keys.question);

    auto list = obj->find(keys.criteria);
    if (list == obj->end()) throw MalformedPayload(DiscardCause::missing_key, keys.criteria, "required key absent");
    if (!list->is_array()) throw MalformedPayload(DiscardCause::bad_structure, keys.criteria, "must be an array");
    if (list->empty()) throw MalformedPayload(DiscardCause::empty_list, keys.criteria, "must be nonempty");
    std::set<std::string> seen;
    for (const auto& item : *list) {
        if (!item.is_string()) {
            throw MalformedPayload(DiscardCause::bad_structure, keys.criteria, "entries must be strings");
        }
        const auto& text = item.get_ref<const std::string&>();
        const std::string norm = normalize_whitespace(text);
        if (norm.empty()) throw MalformedPayload(DiscardCause::empty_list, keys.criteria, "empty entry");
        if (!seen.insert(norm).second) {
            throw MalformedPayload(DiscardCause::duplicate_entries, keys.criteria, "duplicate entry '" + norm + "'");
        }
        p.criteria.push_back(text);
    }
    return p;
}

std::string serialize_payload(const ConstructionPayload& payload) {
    const PayloadKeys keys = payload_keys(payload.dimension);
    json j;
    j[keys.summary] = payload.summary;
    j[keys.criteria] = payload.criteria;
    j[keys.question] = payload.question;
    return j.dump();
}

BuildResult construct_instance(const QAPair& pair, Dimension dimension, ChatBackend& backend,
                               const ConstructOptions& options) {
    validate(pair);
    const char* template_name = dimension == Dimension::ask_mind ? "degrade" : "overconfidence";
    const std::string prompt = options.templates->render(
        template_name, {{"ori_question", pair.query}, {"ground_truth_answer", pair.answer}});

    CallCounter counter(pair.id);
    Discarded discard{pair.id, pair.domain, DiscardCause::malformed, {}, 0};
    for (int attempt = 0; attempt <= options.retry_budget; ++attempt) {
        ++discard.attempts;
        ChatRequest req;
        req.model_id = options.params.model;
        req.temperature = options.params.temperature;
        req.max_tokens = options.params.max_tokens;
        req.messages.push_back({Role::user, prompt});
        req.tag = counter.next(kConstructChannel);

        ChatResponse resp;
        try {
            resp = complete(req, backend);
        } catch (const RetryExhausted& e) {
            discard.cause = DiscardCause::backend_failure;
            discard.detail = e.what();
            return discard;
        }
        try {
            const ConstructionPayload payload = parse_payload(resp.text, dimension);
            if (normalize_whitespace(payload.question) == normalize_whitespace(pair.query)) {
                throw MalformedPayload(DiscardCause::variant_unchanged, payload_keys(dimension).question,
                                       "identical to the original query");
            }
            Instance inst;
            inst.id = pair.id;
            inst.dimension = dimension;
            inst.domain = pair.domain;
            inst.original_query = pair.query;
            inst.answer = pair.answer;
            inst.variant_query = payload.question;
            inst.variant_summary = payload.summary;
            const CheckpointKind kind = checkpoint_kind_for(dimension);
            for (const auto& text : payload.criteria) inst.checkpoints.push_back({text, kind});
            validate(inst);
            return inst;
        } catch (const MalformedPayload& e) {
            discard.cause = e.cause();
            discard.detail = e.what();
        } catch (const ValidationError& e) {
            discard.cause = DiscardCause::bad_structure;
            discard.detail = e.what();
        }
    }
    return discard;
}

BuildResult degrade(const QAPair& pair, ChatBackend& backend, const ConstructOptions& options) {
    return construct_instance(pair, Dimension::ask_mind, backend, options);
}

BuildResult inject_overconfidence(const QAPair& pair, ChatBackend& backend, const ConstructOptions& options) {
    return construct_instance(pair, Dimension::ask_overconfidence, backend, options);
}

BuildReport build_instances(const std::vector<QAPair>& pairs, Dimension dimension, ChatBackend& backend,
                            const ConstructOptions& options, std::size_t parallelism) {
    std::vector<std::optional<BuildResult>> results(pairs.size());
    parallel_for(pairs.size(), parallelism, [&](std::size_t i) {
        try {
            results[i] = construct_instance(pairs[i], dimension, backend, options);
        } catch (const ScriptMiss&) {
            throw;
        } catch (const std::exception& e) {
            results[i] = Discarded{pairs[i].id, pairs[i].domain, DiscardCause::backend_failure, e.what(), 0};
        }
    });

    BuildReport report;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        auto& stats = report.per_domain[pairs[i].domain];
        ++stats.attempted;
        if (auto* inst = std::get_if<Instance>(&*results[i])) {
            ++stats.valid;
            report.instances.push_back(std::move(*inst));
        } else {
            ++stats.discarded;
            report.discarded.push_back(std::get<Discarded>(std::move(*results[i])));
        }
    }
    return report;
}

std::vector<Instance> sample_per_domain(const std::vector<Instance>& instances, std::size_t k, std::uint64_t seed) {
    std::map<std::string, std::vector<std::size_t>> by_domain;
    for (std::size_t i = 0; i < instances.size(); ++i) by_domain[instances[i].domain].push_back(i);

    std::vector<std::size_t> chosen;
    for (auto& [domain, idx] : by_domain) {
        if (idx.size() < k) throw InsufficientPool(domain, idx.size(), k);
        std::mt19937_64 rng(derive_seed(seed, domain));
        // Partial Fisher-Yates: the first k slots end up a uniform k-subset.
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(bounded(rng, idx.size() - i));
            std::swap(idx[i], idx[j]);
        }
        chosen.insert(chosen.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
    }
    std::sort(chosen.begin(), chosen.end());

    std::vector<Instance> out;
    out.reserve(chosen.size());
    for (std::size_t i : chosen) out.push_back(instances[i]);
    return out;
}

std::size_t export_instances(const std::vector<Instance>& instances, const std::string& destination) {
    for (const auto& i : instances) validate(i);
    validate_unique_ids(instances);
    return write_instances(destination, instances);
}

std::vector<Instance> import_instances(const std::string& source) {
    return read_instances(source);
}

}  // namespace askeval
