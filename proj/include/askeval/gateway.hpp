#pragma once

// Chat-completion backends: a remote HTTP backend that speaks the common
// chat-completions wire format, and a scripted backend for offline fixtures.

#include "askeval/core.hpp"

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace askeval {

/// Backend call failed after every permitted retry.
class RetryExhausted : public Error {
  public:
    RetryExhausted(const std::string& what, int attempts)
        : Error(what), attempts_(attempts) {}
    [[nodiscard]] int attempts() const noexcept { return attempts_; }

  private:
    int attempts_;
};

/// Missing endpoint, credential, or other unusable backend configuration.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Non-retryable API failure (4xx other than 408/429, undecodable body).
class BackendError : public Error {
  public:
    using Error::Error;
};

/// A scripted backend was asked for a call the fixture did not plan.
class ScriptMiss : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

struct ChatMessage {
    Role role = Role::user;
    std::string text;

    bool operator==(const ChatMessage&) const = default;
};

/// Identifies one planned call inside a dialogue or construction job. Remote
/// backends ignore it; the scripted backend keys its replies on it.
struct CallTag {
    std::string dialogue_id;
    std::string channel;
    int index = 0;

    [[nodiscard]] std::string key() const;
};

struct ChatRequest {
    std::string model_id;
    std::vector<ChatMessage> messages;
    double temperature = 0.7;
    int max_tokens = 2048;
    std::optional<std::int64_t> seed;
    CallTag tag;
};

enum class FinishReason { stop, length, error };

struct TokenUsage {
    int prompt_tokens = 0;
    int completion_tokens = 0;
};

struct ChatResponse {
    std::string text;
    FinishReason finish_reason = FinishReason::stop;
    std::optional<TokenUsage> usage;
};

void validate(const ChatRequest& request);

/// Backends are shared by many dialogue workers and must be safe for
/// concurrent calls.
class ChatBackend {
  public:
    virtual ~ChatBackend() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
};

/// Validates the request, then forwards to the backend.
ChatResponse complete(const ChatRequest& request, ChatBackend& backend);

/// Issues sequential per-channel call indices for one dialogue or job.
class CallCounter {
  public:
    explicit CallCounter(std::string dialogue_id) : dialogue_id_(std::move(dialogue_id)) {}
    CallTag next(const std::string& channel);

  private:
    std::string dialogue_id_;
    std::map<std::string, int> counts_;
};

struct ScriptEntry {
    std::string text;
    // Simulates a transport that exhausted its retries.
    bool fail = false;
};

class ScriptedBackend final : public ChatBackend {
  public:
    ScriptedBackend() = default;
    explicit ScriptedBackend(std::map<std::string, ScriptEntry> script) : script_(std::move(script)) {}

    void set(const CallTag& tag, std::string text);
    void set_failure(const CallTag& tag);
    void set(const std::string& dialogue_id, const std::string& channel, int index, std::string text);

    ChatResponse complete(const ChatRequest& request) override;

    [[nodiscard]] std::size_t size() const;
    /// Number of completed lookups so far.
    [[nodiscard]] std::size_t calls() const;

    /// Loads a line-delimited script: {"dialogue", "channel", "index", "text"|"fail"}.
    static std::shared_ptr<ScriptedBackend> load(const std::string& path);

  private:
    mutable std::mutex mu_;
    std::map<std::string, ScriptEntry> script_;
    std::size_t calls_ = 0;
};

struct TransportResponse {
    int status = 0;
    std::string body;
    std::map<std::string, std::string> headers;
};

/// Network or socket level failure; always retryable.
class TransportError : public Error {
  public:
    using Error::Error;
};

class Transport {
  public:
    virtual ~Transport() = default;
    virtual TransportResponse post(const std::string& url, const std::string& body,
                                   const std::map<std::string, std::string>& headers) = 0;
};

/// cpp-httplib backed transport; https requires OpenSSL at build time.
class HttpTransport final : public Transport {
  public:
    explicit HttpTransport(std::chrono::seconds timeout = std::chrono::seconds(120)) : timeout_(timeout) {}
    TransportResponse post(const std::string& url, const std::string& body,
                           const std::map<std::string, std::string>& headers) override;

  private:
    std::chrono::seconds timeout_;
};

struct RetryPolicy {
    int budget = 3;
    std::chrono::milliseconds base_delay{1000};
    double factor = 2.0;
    std::chrono::milliseconds max_delay{60'000};

    /// Delay before retry number `retry` (1-based).
    [[nodiscard]] std::chrono::milliseconds delay_for(int retry) const;
};

struct RemoteConfig {
    std::string endpoint;
    std::string api_key;
    RetryPolicy retry;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

class RemoteBackend final : public ChatBackend {
  public:
    RemoteBackend(RemoteConfig config, std::shared_ptr<Transport> transport, Sleeper sleeper = {});

    /// Builds a backend from an endpoint and the name of the environment
    /// variable holding the credential. Throws ConfigError when either is missing.
    static std::shared_ptr<RemoteBackend> from_environment(const std::string& endpoint,
                                                           const std::string& api_key_env, RetryPolicy retry);

    ChatResponse complete(const ChatRequest& request) override;

    static nlohmann::json request_body(const ChatRequest& request);
    static ChatResponse decode(const std::string& body);

  private:
    RemoteConfig config_;
    std::shared_ptr<Transport> transport_;
    Sleeper sleeper_;
};

bool retryable_status(int status) noexcept;

}  // namespace askeval
