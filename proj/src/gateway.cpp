#include "askeval/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

namespace askeval {

using json = nlohmann::json;

std::string CallTag::key() const {
    return dialogue_id + "/" + channel + "/" + std::to_string(index);
}

void validate(const ChatRequest& request) {
    if (request.messages.empty()) throw ValidationError("messages", "must be nonempty");
    if (!(request.temperature >= 0.0)) throw ValidationError("temperature", "must be >= 0");
    if (request.max_tokens <= 0) throw ValidationError("max_tokens", "must be positive");
}

ChatResponse complete(const ChatRequest& request, ChatBackend& backend) {
    validate(request);
    return backend.complete(request);
}

CallTag CallCounter::next(const std::string& channel) {
    return CallTag{dialogue_id_, channel, ++counts_[channel]};
}

void ScriptedBackend::set(const CallTag& tag, std::string text) {
    std::lock_guard lock(mu_);
    script_[tag.key()] = ScriptEntry{std::move(text), false};
}

void ScriptedBackend::set_failure(const CallTag& tag) {
    std::lock_guard lock(mu_);
    script_[tag.key()] = ScriptEntry{{}, true};
}

void ScriptedBackend::set(const std::string& dialogue_id, const std::string& channel, int index,
                          std::string text) {
    set(CallTag{dialogue_id, channel, index}, std::move(text));
}

ChatResponse ScriptedBackend::complete(const ChatRequest& request) {
    const std::string key = request.tag.key();
    std::lock_guard lock(mu_);
    auto it = script_.find(key);
    if (it == script_.end()) throw ScriptMiss("no scripted reply for " + key);
    ++calls_;
    if (it->second.fail) throw RetryExhausted("scripted transport failure for " + key, 1);
    return ChatResponse{it->second.text, FinishReason::stop, std::nullopt};
}

std::size_t ScriptedBackend::size() const {
    std::lock_guard lock(mu_);
    return script_.size();
}

std::size_t ScriptedBackend::calls() const {
    std::lock_guard lock(mu_);
    return calls_;
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open script file " + path);
    auto backend = std::make_shared<ScriptedBackend>();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (normalize_whitespace(line).empty()) continue;
        try {
            const json j = json::parse(line);
            CallTag tag{j.at("dialogue").get<std::string>(), j.at("channel").get<std::string>(),
                        j.at("index").get<int>()};
            if (j.value("fail", false)) {
                backend->set_failure(tag);
            } else {
                backend->set(tag, j.at("text").get<std::string>());
            }
        } catch (const json::exception& e) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return backend;
}

std::chrono::milliseconds RetryPolicy::delay_for(int retry) const {
    const double scaled = static_cast<double>(base_delay.count()) * std::pow(factor, retry - 1);
    const double capped = std::min(scaled, static_cast<double>(max_delay.count()));
    return std::chrono::milliseconds(static_cast<std::int64_t>(capped));
}

bool retryable_status(int status) noexcept {
    return status == 408 || status == 429 || status >= 500;
}

RemoteBackend::RemoteBackend(RemoteConfig config, std::shared_ptr<Transport> transport, Sleeper sleeper)
    : config_(std::move(config)), transport_(std::move(transport)), sleeper_(std::move(sleeper)) {
    if (config_.endpoint.empty()) throw ConfigError("remote backend endpoint is not configured");
    if (!transport_) throw ConfigError("remote backend has no transport");
    if (config_.retry.budget < 0) throw ConfigError("retry budget must be >= 0");
    if (!sleeper_) {
        sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }
}

std::shared_ptr<RemoteBackend> RemoteBackend::from_environment(const std::string& endpoint,
                                                               const std::string& api_key_env,
                                                               RetryPolicy retry) {
    if (endpoint.empty()) throw ConfigError("remote backend endpoint is not configured");
    if (api_key_env.empty()) throw ConfigError("remote backend needs api_key_env naming the credential variable");
    const char* key = std::getenv(api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
        throw ConfigError("environment variable " + api_key_env + " is not set");
    }
    return std::make_shared<RemoteBackend>(RemoteConfig{endpoint, key, retry}, std::make_shared<HttpTransport>());
}

json RemoteBackend::request_body(const ChatRequest& request) {
    json messages = json::array();
    for (const auto& m : request.messages) {
        messages.push_back({{"role", std::string(to_string(m.role))}, {"content", m.text}});
    }
    json body = {
        {"model", request.model_id},
        {"messages", std::move(messages)},
        {"temperature", request.temperature},
        {"max_tokens", request.max_tokens},
    };
    if (request.seed) body["seed"] = *request.seed;
    return body;
}

ChatResponse RemoteBackend::decode(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error& e) {
        throw BackendError(std::string("undecodable completion body: ") + e.what());
    }
    ChatResponse out;
    const auto choices = j.find("choices");
    if (choices == j.end() || !choices->is_array() || choices->empty()) {
        out.finish_reason = FinishReason::error;
        return out;
    }
    const json& choice = choices->front();
    const auto message = choice.find("message");
    if (message != choice.end() && message->contains("content") && (*message)["content"].is_string()) {
        out.text = (*message)["content"].get<std::string>();
    } else {
        out.finish_reason = FinishReason::error;
        return out;
    }
    const std::string reason = choice.value("finish_reason", std::string("stop"));
    out.finish_reason = reason == "length" ? FinishReason::length : FinishReason::stop;
    if (auto usage = j.find("usage"); usage != j.end() && usage->is_object()) {
        out.usage = TokenUsage{usage->value("prompt_tokens", 0), usage->value("completion_tokens", 0)};
    }
    return out;
}

ChatResponse RemoteBackend::complete(const ChatRequest& request) {
    const std::string body = request_body(request).dump();
    const std::map<std::string, std::string> headers = {
        {"Authorization", "Bearer " + config_.api_key},
        {"Content-Type", "application/json"},
    };
    std::string last_error;
    const int attempts = config_.retry.budget + 1;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        if (attempt > 1) sleeper_(config_.retry.delay_for(attempt - 1));
        try {
            TransportResponse resp = transport_->post(config_.endpoint, body, headers);
            if (resp.status >= 200 && resp.status < 300) return decode(resp.body);
            last_error = "HTTP " + std::to_string(resp.status);
            if (!retryable_status(resp.status)) {
                throw BackendError(last_error + ": " + resp.body.substr(0, 512));
            }
        } catch (const TransportError& e) {
            last_error = e.what();
        }
    }
    throw RetryExhausted("gave up after " + std::to_string(attempts) + " attempts: " + last_error, attempts);
}

}  // namespace askeval
