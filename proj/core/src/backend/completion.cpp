#include "promptforge/backend/completion.hpp"

#include "promptforge/backend/remote.hpp"
#include "promptforge/backend/simulator.hpp"
#include "promptforge/core/errors.hpp"
#include "promptforge/core/label.hpp"
#include "promptforge/core/rng.hpp"

#include <algorithm>
#include <bit>

namespace promptforge::backend {

CompletionRequest::CompletionRequest(CompletionParams params) : p_(std::move(params)) {
    if (p_.max_tokens == 0) throw ConfigError("max_tokens must be positive");
    if (!(p_.temperature >= 0.0)) throw ConfigError("temperature must be non-negative");
    if (p_.allowed_tokens && p_.allowed_tokens->empty()) throw ConfigError("allowed_tokens must not be empty");
    if (auto n = estimate_tokens(p_.prompt); n > kContextTokens) throw TokenBudgetError(n, kContextTokens);
}

std::uint64_t CompletionRequest::digest() const {
    auto field = [](std::uint64_t h, std::string_view s) { return fnv1a("\x1f", fnv1a(s, h)); };
    std::uint64_t h = fnv1a(p_.prompt);
    h = mix64(h ^ p_.max_tokens);
    h = mix64(h ^ std::bit_cast<std::uint64_t>(p_.temperature));
    if (p_.allowed_tokens) {
        h = field(h, "allowed");
        for (const auto& t : *p_.allowed_tokens) h = field(h, t);
    }
    h = field(h, "stop");
    for (const auto& s : p_.stop_sequences) h = field(h, s);
    return mix64(h ^ p_.sampling_seed);
}

std::string_view to_string(FinishReason reason) {
    switch (reason) {
    case FinishReason::Stop: return "stop";
    case FinishReason::Length: return "length";
    case FinishReason::Restricted: return "restricted";
    }
    return "stop";
}

CompletionResponse CompletionBackend::complete(const CompletionRequest& request) {
    calls_.fetch_add(1, std::memory_order_relaxed);
    auto response = do_complete(request);
    if (const auto& allowed = request.allowed_tokens()) {
        if (std::find(allowed->begin(), allowed->end(), response.text) == allowed->end()) {
            throw BackendError("completion '" + response.text + "' is outside the allowed tokens");
        }
    }
    return response;
}

std::string_view to_string(BackendKind kind) { return kind == BackendKind::Remote ? "remote" : "simulated"; }

std::optional<BackendKind> parse_backend_kind(std::string_view text) {
    if (text == "simulated") return BackendKind::Simulated;
    if (text == "remote") return BackendKind::Remote;
    return std::nullopt;
}

void BackendConfig::validate() const {
    if (kind == BackendKind::Remote) {
        if (!endpoint_url || endpoint_url->empty()) throw ConfigError("remote backend needs an endpoint URL");
        if (!(rate_limit > 0.0)) throw ConfigError("rate limit must be positive");
        if (retry.max_retries < 0) throw ConfigError("max_retries must be non-negative");
    } else if (!seed) {
        throw ConfigError("simulated backend needs a seed");
    }
}

std::unique_ptr<CompletionBackend> make_backend(const BackendConfig& config) {
    config.validate();
    if (config.kind == BackendKind::Remote) return std::make_unique<RemoteBackend>(config);
    return std::make_unique<SimulatedBackend>(*config.seed);
}

CompletionResponse complete(const BackendConfig& config, const CompletionRequest& request) {
    return make_backend(config)->complete(request);
}

} // namespace promptforge::backend
