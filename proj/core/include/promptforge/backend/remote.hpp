#pragma once

#include "promptforge/backend/completion.hpp"

#include <chrono>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace promptforge::backend {

/// Time source for rate limiting and backoff; tests substitute a virtual clock.
class Clock {
  public:
    using duration = std::chrono::nanoseconds;
    using time_point = std::chrono::time_point<std::chrono::steady_clock, duration>;

    virtual ~Clock() = default;
    virtual time_point now() = 0;
    virtual void sleep_for(duration d) = 0;
};

class SteadyClock final : public Clock {
  public:
    time_point now() override;
    void sleep_for(duration d) override;
};

/// Sliding-window limiter: at most `per_second` acquisitions in any trailing
/// one-second window (for rates below 1, one acquisition per 1/rate seconds).
class RateLimiter {
  public:
    RateLimiter(double per_second, Clock& clock);

    /// Blocks (via the clock) until a slot is free, then records the acquisition.
    Clock::time_point acquire();

  private:
    std::size_t capacity_;
    Clock::duration window_;
    Clock& clock_;
    std::mutex mutex_;
    std::deque<Clock::time_point> issued_;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

/// POSTs JSON; throws BackendError with status 0 on transport failure.
class HttpTransport {
  public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse post(const std::string& url, const std::string& body, const HttpHeaders& headers) = 0;
};

/// cpp-httplib backed transport (http and https).
class HttplibTransport final : public HttpTransport {
  public:
    explicit HttplibTransport(std::chrono::seconds timeout) : timeout_(timeout) {}
    HttpResponse post(const std::string& url, const std::string& body, const HttpHeaders& headers) override;

  private:
    std::chrono::seconds timeout_;
};

/// JSON body: {prompt, max_tokens, temperature, logit_restriction?, stop?}.
std::string encode_request(const CompletionRequest& request);

/// Accepts {text, finish_reason} or an OpenAI-style {choices:[{text, finish_reason}]}.
CompletionResponse decode_response(const std::string& body, const CompletionRequest& request);

/// Generic HTTP/JSON completion client with rate limiting and retries on
/// transport errors and HTTP 429.
class RemoteBackend final : public CompletionBackend {
  public:
    /// Uses HttplibTransport and SteadyClock.
    explicit RemoteBackend(BackendConfig config);
    RemoteBackend(BackendConfig config, std::shared_ptr<HttpTransport> transport, std::shared_ptr<Clock> clock);

    [[nodiscard]] const std::string& url() const noexcept { return url_; }

  protected:
    CompletionResponse do_complete(const CompletionRequest& request) override;

  private:
    BackendConfig config_;
    std::string url_;
    std::shared_ptr<HttpTransport> transport_;
    std::shared_ptr<Clock> clock_;
    RateLimiter limiter_;
};

} // namespace promptforge::backend
