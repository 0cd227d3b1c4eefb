#include "promptforge/prompt/prompt_classifier.hpp"

#include "promptforge/core/errors.hpp"

#include <algorithm>

namespace promptforge::prompt {

namespace {
std::string one_line(std::string_view text) {
    std::string out(text);
    std::replace(out.begin(), out.end(), '\n', ' ');
    std::replace(out.begin(), out.end(), '\r', ' ');
    return out;
}
} // namespace

std::string default_header(const LabelSet& labels) {
    std::string header = "Decide whether the topic of the question is ";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i > 0) header += i + 1 == labels.size() ? " or " : ", ";
        header += "'" + labels[i].name() + "'";
    }
    return header;
}

void PromptTemplate::validate() const {
    if (labels.empty()) throw ConfigError("prompt template has no labels");
    if (use_header && trim(header).empty()) throw ConfigError("prompt header is empty");
    if (question_prefix.empty() || label_prefix.empty()) throw ConfigError("prompt prefixes must be non-empty");
}

std::string build_prompt(const PromptTemplate& tmpl, const Candidate& candidate, std::string_view query) {
    tmpl.validate();
    std::string prompt;
    if (tmpl.use_header) {
        prompt += one_line(tmpl.header);
        prompt.push_back('\n');
    }
    for (const auto& allele : candidate.alleles()) {
        prompt += tmpl.question_prefix + " " + one_line(allele.text()) + "\n";
        prompt += tmpl.label_prefix + " " + allele.label().name() + "\n";
    }
    prompt += tmpl.question_prefix + " " + one_line(query) + "\n";
    prompt += tmpl.label_prefix;

    if (auto n = backend::estimate_tokens(prompt); n > backend::kContextTokens) {
        throw TokenBudgetError(n, backend::kContextTokens);
    }
    return prompt;
}

Label classify(backend::CompletionBackend& backend, const PromptTemplate& tmpl, const Candidate& candidate,
               std::string_view query, const ClassifySettings& settings) {
    backend::CompletionRequest request({.prompt = build_prompt(tmpl, candidate, query),
                                        .max_tokens = 1,
                                        .temperature = settings.temperature,
                                        .allowed_tokens = tmpl.labels.names(),
                                        .stop_sequences = {},
                                        .sampling_seed = 0});
    auto response = backend.complete(request);
    Label label(response.text);
    if (!tmpl.labels.contains(label)) throw BackendError("unparseable label '" + response.text + "'");
    return label;
}

double accuracy(backend::CompletionBackend& backend, const PromptTemplate& tmpl, const Candidate& candidate,
                std::span<const LabeledExample> eval_set, const ClassifySettings& settings) {
    if (eval_set.empty()) throw ConfigError("evaluation set is empty");
    std::size_t correct = 0;
    for (const auto& e : eval_set) {
        if (classify(backend, tmpl, candidate, e.text(), settings) == e.label()) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(eval_set.size());
}

ValidationFitness::ValidationFitness(backend::CompletionBackend& backend, PromptTemplate tmpl, Examples validation,
                                     ClassifySettings settings)
    : backend_(backend), template_(std::move(tmpl)), validation_(std::move(validation)), settings_(settings) {
    template_.validate();
    if (validation_.empty()) throw ConfigError("validation set is empty");
}

double ValidationFitness::operator()(const Candidate& candidate) {
    auto key = candidate.key();
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) {
            ++cache_hits_;
            return it->second;
        }
    }
    double value = accuracy(backend_, template_, candidate, validation_, settings_);
    std::lock_guard lock(mutex_);
    ++evaluations_;
    cache_.emplace(std::move(key), value);
    return value;
}

double ValidationFitness::operator()(Candidate& candidate) {
    double value = (*this)(static_cast<const Candidate&>(candidate));
    candidate.set_fitness(value);
    return value;
}

} // namespace promptforge::prompt
