#pragma once

#include "promptforge/backend/completion.hpp"
#include "promptforge/core/example.hpp"
#include "promptforge/core/label.hpp"
#include "promptforge/core/rng.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace promptforge::augment {

inline constexpr std::string_view kGenerationInstruction = "Generate a similar question:";

/// "Generate a similar question:", one "Q: <text>" line per seed, then a bare "Q:".
/// Throws ConfigError unless there are exactly three seeds sharing one label.
std::string build_generation_prompt(std::span<const LabeledExample> seeds);

/// Strips everything after the first newline, a leading echoed "Q:", and surrounding whitespace.
std::string clean_completion(std::string_view completion);

struct GenerationSettings {
    std::size_t max_tokens = 64;
    double temperature = 0.7;
};

/// A generated example together with the seed triplet it came from.
struct Generated {
    LabeledExample example;
    std::array<std::string, 3> seed_texts;
};

/// Samples three distinct training examples of `label`, asks the backend for
/// a similar question and labels it `label` (origin Generated). An empty
/// completion is retried once with a fresh sampling seed.
/// Throws DataError when fewer than three examples carry `label`.
Generated generate_example(backend::CompletionBackend& backend, std::span<const LabeledExample> train,
                           const Label& label, Rng& rng, const GenerationSettings& settings = {});

struct AugmentationSpec {
    std::size_t n_to_add = 0;
    /// Split n_to_add evenly across the labels present in the label set.
    bool per_label = true;
    std::uint64_t seed = 0;
    /// Regenerate texts that duplicate an existing one, up to max_dedup_attempts.
    bool dedup = true;
    std::size_t max_dedup_attempts = 20;
    GenerationSettings generation;

    void validate(std::size_t n_labels) const;
};

struct AugmentationResult {
    /// The original examples in order, followed by the generated ones.
    Examples examples;
    /// Seed triplet of each generated example, aligned with examples[train.size() + i].
    std::vector<std::array<std::string, 3>> provenance;
    /// Generated examples kept as duplicates after exhausting the dedup attempts.
    std::size_t dedup_exhausted = 0;
};

/// Appends spec.n_to_add generated examples to `train`. Generated example i
/// targets label i mod |labels| when per_label is set, otherwise a uniformly
/// drawn label; each uses its own generator stream forked from spec.seed.
AugmentationResult augment_training_set(backend::CompletionBackend& backend, std::span<const LabeledExample> train,
                                        const LabelSet& labels, const AugmentationSpec& spec);

} // namespace promptforge::augment
