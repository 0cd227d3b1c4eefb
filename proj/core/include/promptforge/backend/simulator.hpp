#pragma once

#include "promptforge/backend/completion.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace promptforge::backend {

/// Deterministic offline stand-in for a completion model.
///
/// The response is a pure function of (seed, request):
///  - restricted requests are treated as a few-shot classification prompt.
///    Every "<Prefix>: <token>" line labels the line above it as an in-context
///    example; the line above the final bare "<Prefix>:" is the query. Each
///    allowed token scores the summed bag-of-words cosine between the query and
///    its examples; temperature 0 takes the argmax, otherwise softmax sampling.
///  - unrestricted requests are treated as a generation prompt. Lines starting
///    with "Q:" are seed questions; a word-bigram Markov chain over them emits a
///    5 to 15 word question ending in "?".
class SimulatedBackend final : public CompletionBackend {
  public:
    explicit SimulatedBackend(std::uint64_t seed) : seed_(seed) {}

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

  protected:
    CompletionResponse do_complete(const CompletionRequest& request) override;

  private:
    std::uint64_t seed_;
};

/// Parsed view of a few-shot classification prompt, as the simulator reads it.
struct FewShotPrompt {
    struct Shot {
        std::string text;
        std::string label;
    };
    std::vector<Shot> shots;
    std::string query;
};

FewShotPrompt parse_few_shot_prompt(std::string_view prompt, const std::vector<std::string>& labels);

/// Seed questions of a generation prompt (lines starting with "Q:").
std::vector<std::string> parse_generation_seeds(std::string_view prompt);

} // namespace promptforge::backend
