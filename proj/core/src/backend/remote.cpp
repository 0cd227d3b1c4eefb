#include "promptforge/backend/remote.hpp"

#include "promptforge/core/errors.hpp"
#include "promptforge/core/label.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace promptforge::backend {

using nlohmann::json;

Clock::time_point SteadyClock::now() { return std::chrono::steady_clock::now(); }

void SteadyClock::sleep_for(duration d) { std::this_thread::sleep_for(d); }

RateLimiter::RateLimiter(double per_second, Clock& clock) : clock_(clock) {
    if (!(per_second > 0.0)) throw ConfigError("rate limit must be positive");
    capacity_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(per_second)));
    window_ = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(static_cast<double>(capacity_) / per_second));
}

Clock::time_point RateLimiter::acquire() {
    std::lock_guard lock(mutex_);
    auto now = clock_.now();
    while (!issued_.empty() && issued_.front() + window_ <= now) issued_.pop_front();
    if (issued_.size() >= capacity_) {
        clock_.sleep_for(issued_.front() + window_ - now);
        now = clock_.now();
        while (!issued_.empty() && issued_.front() + window_ <= now) issued_.pop_front();
    }
    issued_.push_back(now);
    return now;
}

namespace {

struct ParsedUrl {
    std::string origin; // scheme://host[:port]
    std::string path;
};

ParsedUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint URL needs a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::string substitute_engine(std::string url, const std::string& engine) {
    constexpr std::string_view placeholder = "{engine}";
    for (auto pos = url.find(placeholder); pos != std::string::npos; pos = url.find(placeholder)) {
        url.replace(pos, placeholder.size(), engine);
    }
    return url;
}

FinishReason parse_finish_reason(const json& value) {
    if (!value.is_string()) return FinishReason::Stop;
    auto s = value.get<std::string>();
    if (s == "length") return FinishReason::Length;
    if (s == "restricted") return FinishReason::Restricted;
    return FinishReason::Stop;
}

} // namespace

HttpResponse HttplibTransport::post(const std::string& url, const std::string& body, const HttpHeaders& headers) {
    auto parts = split_url(url);
    httplib::Client client(parts.origin);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);

    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto result = client.Post(parts.path, h, body, "application/json");
    if (!result) throw BackendError("transport failure: " + httplib::to_string(result.error()));
    return {result->status, result->body};
}

std::string encode_request(const CompletionRequest& request) {
    json body = {
        {"prompt", request.prompt()},
        {"max_tokens", request.max_tokens()},
        {"temperature", request.temperature()},
    };
    if (request.allowed_tokens()) body["logit_restriction"] = *request.allowed_tokens();
    if (!request.stop_sequences().empty()) body["stop"] = request.stop_sequences();
    return body.dump();
}

CompletionResponse decode_response(const std::string& body, const CompletionRequest& request) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        throw BackendError(std::string("malformed response body: ") + e.what());
    }
    const json* choice = &doc;
    if (auto it = doc.find("choices"); it != doc.end() && it->is_array() && !it->empty()) choice = &it->front();
    auto text = choice->find("text");
    if (text == choice->end() || !text->is_string()) throw BackendError("response has no string 'text'");

    CompletionResponse response{text->get<std::string>(), FinishReason::Stop};
    if (auto fr = choice->find("finish_reason"); fr != choice->end()) response.finish_reason = parse_finish_reason(*fr);

    if (const auto& allowed = request.allowed_tokens()) {
        auto token = trim(response.text);
        if (std::find(allowed->begin(), allowed->end(), token) == allowed->end()) {
            throw BackendError("remote completion '" + response.text + "' is outside the allowed tokens");
        }
        response.text = std::move(token);
        response.finish_reason = FinishReason::Restricted;
    }
    return response;
}

RemoteBackend::RemoteBackend(BackendConfig config)
    : RemoteBackend(config, std::make_shared<HttplibTransport>(config.timeout), std::make_shared<SteadyClock>()) {}

RemoteBackend::RemoteBackend(BackendConfig config, std::shared_ptr<HttpTransport> transport,
                             std::shared_ptr<Clock> clock)
    : config_(std::move(config)), transport_(std::move(transport)), clock_(std::move(clock)),
      limiter_((config_.validate(), config_.rate_limit), *clock_) {
    url_ = substitute_engine(*config_.endpoint_url, config_.engine);
}

CompletionResponse RemoteBackend::do_complete(const CompletionRequest& request) {
    HttpHeaders headers{{"Content-Type", "application/json"}};
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (key == nullptr || *key == '\0') {
            throw BackendError("environment variable " + config_.api_key_env + " holds no API key");
        }
        headers.emplace_back("Authorization", std::string("Bearer ") + key);
    }
    const auto body = encode_request(request);

    auto backoff = std::chrono::duration_cast<Clock::duration>(config_.retry.initial_backoff);
    for (int attempt = 0;; ++attempt) {
        const bool can_retry = attempt < config_.retry.max_retries;
        limiter_.acquire();
        HttpResponse response;
        try {
            response = transport_->post(url_, body, headers);
        } catch (const BackendError&) {
            if (!can_retry) throw;
            clock_->sleep_for(backoff);
            backoff = std::chrono::duration_cast<Clock::duration>(backoff * config_.retry.backoff_multiplier);
            continue;
        }
        if (response.status == 429 && can_retry) {
            clock_->sleep_for(backoff);
            backoff = std::chrono::duration_cast<Clock::duration>(backoff * config_.retry.backoff_multiplier);
            continue;
        }
        if (response.status < 200 || response.status >= 300) {
            throw BackendError("HTTP " + std::to_string(response.status) + ": " + response.body.substr(0, 200),
                               response.status);
        }
        return decode_response(response.body, request);
    }
}

} // namespace promptforge::backend
