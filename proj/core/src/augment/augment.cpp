#include "promptforge/augment/augment.hpp"

#include "promptforge/core/errors.hpp"

#include <unordered_set>

namespace promptforge::augment {

std::string build_generation_prompt(std::span<const LabeledExample> seeds) {
    if (seeds.size() != 3) {
        throw ConfigError("generation prompt needs exactly 3 seeds, got " + std::to_string(seeds.size()));
    }
    for (const auto& s : seeds) {
        if (s.label() != seeds.front().label()) throw ConfigError("generation seeds mix labels");
    }
    std::string prompt(kGenerationInstruction);
    for (const auto& s : seeds) {
        prompt += "\nQ: ";
        prompt += s.text();
    }
    prompt += "\nQ:";
    return prompt;
}

std::string clean_completion(std::string_view completion) {
    auto text = completion.substr(0, completion.find('\n'));
    auto cleaned = trim(text);
    if (cleaned.rfind("Q:", 0) == 0) cleaned = trim(std::string_view(cleaned).substr(2));
    return cleaned;
}

Generated generate_example(backend::CompletionBackend& backend, std::span<const LabeledExample> train,
                           const Label& label, Rng& rng, const GenerationSettings& settings) {
    std::vector<const LabeledExample*> candidates;
    for (const auto& e : train) {
        if (e.label() == label) candidates.push_back(&e);
    }
    if (candidates.size() < 3) {
        throw DataError("label '" + label.name() + "' has " + std::to_string(candidates.size()) +
                        " training examples, generation needs 3");
    }

    // Partial Fisher-Yates: three distinct seeds.
    for (std::size_t i = 0; i < 3; ++i) {
        std::swap(candidates[i], candidates[i + rng.uniform_index(candidates.size() - i)]);
    }
    Examples seeds{*candidates[0], *candidates[1], *candidates[2]};
    const auto prompt = build_generation_prompt(seeds);

    for (int attempt = 0; attempt < 2; ++attempt) {
        backend::CompletionRequest request({.prompt = prompt,
                                            .max_tokens = settings.max_tokens,
                                            .temperature = settings.temperature,
                                            .allowed_tokens = std::nullopt,
                                            .stop_sequences = {"\n"},
                                            .sampling_seed = rng()});
        auto text = clean_completion(backend.complete(request).text);
        if (!text.empty()) {
            return {LabeledExample(std::move(text), label, Origin::Generated),
                    {seeds[0].text(), seeds[1].text(), seeds[2].text()}};
        }
    }
    throw BackendError("backend returned an empty completion twice for label '" + label.name() + "'");
}

void AugmentationSpec::validate(std::size_t n_labels) const {
    if (n_labels == 0) throw ConfigError("label set is empty");
    if (per_label && n_to_add % n_labels != 0) {
        throw ConfigError("n_to_add " + std::to_string(n_to_add) + " is not divisible by " +
                          std::to_string(n_labels) + " labels");
    }
}

AugmentationResult augment_training_set(backend::CompletionBackend& backend, std::span<const LabeledExample> train,
                                        const LabelSet& labels, const AugmentationSpec& spec) {
    spec.validate(labels.size());

    AugmentationResult result;
    result.examples.assign(train.begin(), train.end());
    result.examples.reserve(train.size() + spec.n_to_add);
    result.provenance.reserve(spec.n_to_add);

    std::unordered_set<std::string> seen;
    if (spec.dedup) {
        for (const auto& e : train) seen.insert(e.text());
    }

    const Rng root(spec.seed);
    for (std::size_t i = 0; i < spec.n_to_add; ++i) {
        Rng rng = root.fork(i);
        const Label& label = spec.per_label ? labels[i % labels.size()] : labels[rng.uniform_index(labels.size())];

        auto generated = generate_example(backend, train, label, rng, spec.generation);
        if (spec.dedup) {
            std::size_t attempts = 1;
            while (seen.contains(generated.example.text()) && attempts < spec.max_dedup_attempts) {
                generated = generate_example(backend, train, label, rng, spec.generation);
                ++attempts;
            }
            if (!seen.insert(generated.example.text()).second) ++result.dedup_exhausted;
        }
        result.examples.push_back(std::move(generated.example));
        result.provenance.push_back(std::move(generated.seed_texts));
    }
    return result;
}

} // namespace promptforge::augment
