#include "promptforge/prompt/candidate.hpp"

#include "promptforge/core/errors.hpp"

#include <algorithm>
#include <unordered_set>

namespace promptforge::prompt {

Candidate::Candidate(Examples alleles, std::optional<double> fitness)
    : alleles_(std::move(alleles)), fitness_(fitness) {
    std::unordered_set<std::string_view> texts;
    for (const auto& a : alleles_) {
        if (!texts.insert(a.text()).second) throw DataError("duplicate allele in candidate: " + a.text());
    }
}

bool Candidate::contains_text(std::string_view text) const {
    return std::any_of(alleles_.begin(), alleles_.end(), [&](const LabeledExample& a) { return a.text() == text; });
}

std::string Candidate::key() const {
    std::string key;
    for (const auto& a : alleles_) {
        key += a.text();
        key.push_back('\x1f');
        key += a.label().name();
        key.push_back('\x1e');
    }
    return key;
}

} // namespace promptforge::prompt
