#pragma once

#include "promptforge/backend/completion.hpp"
#include "promptforge/core/example.hpp"
#include "promptforge/core/label.hpp"
#include "promptforge/prompt/candidate.hpp"

#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>

namespace promptforge::prompt {

/// "Decide whether the topic of the question is 'A' or 'B'" for the given labels.
std::string default_header(const LabelSet& labels);

struct PromptTemplate {
    LabelSet labels = default_label_set();
    bool use_header = true;
    std::string header = default_header(default_label_set());
    std::string question_prefix = "Question:";
    std::string label_prefix = "Topic:";

    /// Throws ConfigError on an empty header while use_header is set, or empty prefixes.
    void validate() const;
};

/// Header line, one "Question: <text>" / "Topic: <label>" pair per allele,
/// then "Question: <query>" and a bare "Topic:". Newlines inside texts are
/// flattened to spaces. Throws TokenBudgetError when the prompt does not fit
/// the context window.
std::string build_prompt(const PromptTemplate& tmpl, const Candidate& candidate, std::string_view query);

struct ClassifySettings {
    double temperature = 0.0;
};

/// Restricted-decode classification: the backend may only answer a label name.
Label classify(backend::CompletionBackend& backend, const PromptTemplate& tmpl, const Candidate& candidate,
               std::string_view query, const ClassifySettings& settings = {});

/// Fraction of `eval_set` classified correctly. Throws ConfigError on an empty set.
double accuracy(backend::CompletionBackend& backend, const PromptTemplate& tmpl, const Candidate& candidate,
                std::span<const LabeledExample> eval_set, const ClassifySettings& settings = {});

/// Validation-accuracy fitness with a cache keyed by Candidate::key(), so a
/// candidate that survives across generations is scored once.
class ValidationFitness {
  public:
    ValidationFitness(backend::CompletionBackend& backend, PromptTemplate tmpl, Examples validation,
                      ClassifySettings settings = {});

    /// Cached or freshly computed accuracy; also stored into the candidate.
    double operator()(Candidate& candidate);
    double operator()(const Candidate& candidate);

    [[nodiscard]] std::uint64_t evaluations() const noexcept { return evaluations_; }
    [[nodiscard]] std::uint64_t cache_hits() const noexcept { return cache_hits_; }
    [[nodiscard]] std::span<const LabeledExample> validation() const noexcept { return validation_; }

  private:
    backend::CompletionBackend& backend_;
    PromptTemplate template_;
    Examples validation_;
    ClassifySettings settings_;
    std::mutex mutex_;
    std::unordered_map<std::string, double> cache_;
    std::uint64_t evaluations_ = 0;
    std::uint64_t cache_hits_ = 0;
};

} // namespace promptforge::prompt
