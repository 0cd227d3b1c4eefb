#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace promptforge::backend {

/// Context window of the completion models, in tokens.
inline constexpr std::size_t kContextTokens = 2048;

/// Conservative token estimate: ceil(bytes / 4).
constexpr std::size_t estimate_tokens(std::string_view text) noexcept { return (text.size() + 3) / 4; }

struct CompletionParams {
    std::string prompt;
    std::size_t max_tokens = 16;
    double temperature = 0.0;
    /// When set, the completion must be exactly one of these strings.
    std::optional<std::vector<std::string>> allowed_tokens;
    std::vector<std::string> stop_sequences;
    /// Caller-chosen sampling seed, so repeated sampling calls on one prompt
    /// can differ while every call stays reproducible.
    std::uint64_t sampling_seed = 0;
};

/// A validated completion request. Construction throws ConfigError on
/// max_tokens == 0, a negative temperature or an empty allowed_tokens list,
/// and TokenBudgetError when the prompt exceeds kContextTokens.
class CompletionRequest {
  public:
    explicit CompletionRequest(CompletionParams params);

    [[nodiscard]] const std::string& prompt() const noexcept { return p_.prompt; }
    [[nodiscard]] std::size_t max_tokens() const noexcept { return p_.max_tokens; }
    [[nodiscard]] double temperature() const noexcept { return p_.temperature; }
    [[nodiscard]] const std::optional<std::vector<std::string>>& allowed_tokens() const noexcept {
        return p_.allowed_tokens;
    }
    [[nodiscard]] const std::vector<std::string>& stop_sequences() const noexcept { return p_.stop_sequences; }
    [[nodiscard]] std::uint64_t sampling_seed() const noexcept { return p_.sampling_seed; }

    /// Stable 64-bit digest of every field.
    [[nodiscard]] std::uint64_t digest() const;

  private:
    CompletionParams p_;
};

enum class FinishReason { Stop, Length, Restricted };

std::string_view to_string(FinishReason reason);

struct CompletionResponse {
    std::string text;
    FinishReason finish_reason = FinishReason::Stop;

    friend bool operator==(const CompletionResponse&, const CompletionResponse&) = default;
};

/// Text-generation service. complete() is thread-safe for every implementation.
class CompletionBackend {
  public:
    virtual ~CompletionBackend() = default;

    /// Issues one request. When the request restricts its output, the returned
    /// text is guaranteed to be one of the allowed tokens; a backend that
    /// answers anything else raises BackendError.
    CompletionResponse complete(const CompletionRequest& request);

    /// Requests issued through complete(), including failed ones.
    [[nodiscard]] std::uint64_t call_count() const noexcept { return calls_.load(std::memory_order_relaxed); }

  protected:
    virtual CompletionResponse do_complete(const CompletionRequest& request) = 0;

  private:
    std::atomic<std::uint64_t> calls_{0};
};

enum class BackendKind { Simulated, Remote };

std::string_view to_string(BackendKind kind);
std::optional<BackendKind> parse_backend_kind(std::string_view text);

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{1000};
    double backoff_multiplier = 2.0;
};

struct BackendConfig {
    BackendKind kind = BackendKind::Simulated;
    /// Model tag, e.g. "ada" for classification and "davinci" for generation.
    /// A "{engine}" placeholder in endpoint_url is replaced by it.
    std::string engine = "ada";
    std::optional<std::string> endpoint_url;
    std::string api_key_env = "OPENAI_API_KEY";
    /// Maximum requests per second for the remote client.
    double rate_limit = 1.0;
    std::optional<std::uint64_t> seed;
    RetryPolicy retry;
    std::chrono::seconds timeout{60};

    /// Throws ConfigError: Remote needs endpoint_url and a positive rate
    /// limit, Simulated needs a seed.
    void validate() const;
};

std::unique_ptr<CompletionBackend> make_backend(const BackendConfig& config);

/// One-shot call through a freshly built backend.
CompletionResponse complete(const BackendConfig& config, const CompletionRequest& request);

} // namespace promptforge::backend
