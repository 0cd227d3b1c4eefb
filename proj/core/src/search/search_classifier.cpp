#include "promptforge/search/search_classifier.hpp"

#include "promptforge/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace promptforge::search {

SearchIndex::SearchIndex(Examples examples) : examples_(std::move(examples)) {
    vectors_.reserve(examples_.size());
    for (const auto& e : examples_) vectors_.push_back(vectorize(e.text()));
}

std::vector<double> SearchIndex::relevances(std::string_view query) const {
    auto q = vectorize(query);
    std::vector<double> out(vectors_.size());
    for (std::size_t i = 0; i < vectors_.size(); ++i) out[i] = cosine(q, vectors_[i]);
    return out;
}

SearchClassifierModel::SearchClassifierModel(Examples examples, std::size_t max_examples, double temperature,
                                             LabelSet label_set)
    : SearchClassifierModel(std::make_shared<const SearchIndex>(std::move(examples)), max_examples, temperature,
                            std::move(label_set)) {}

SearchClassifierModel::SearchClassifierModel(std::shared_ptr<const SearchIndex> index, std::size_t max_examples,
                                             double temperature, LabelSet label_set)
    : index_(std::move(index)), max_examples_(max_examples), temperature_(temperature),
      label_set_(std::move(label_set)) {
    if (!index_ || index_->size() == 0) throw ConfigError("search model needs at least one example");
    if (max_examples_ == 0) throw ConfigError("max_examples must be positive");
    if (!(temperature_ >= 0.0)) throw ConfigError("temperature must be non-negative");
    if (label_set_.empty()) throw ConfigError("label set is empty");
}

std::vector<RankedNeighbor> SearchClassifierModel::rank_neighbors(std::string_view query) const {
    auto rel = index_->relevances(query);
    std::vector<std::size_t> order(rel.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t k = std::min(max_examples_, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) { return rel[a] > rel[b] || (rel[a] == rel[b] && a < b); });

    std::vector<RankedNeighbor> out;
    out.reserve(k);
    auto examples = index_->examples();
    for (std::size_t i = 0; i < k; ++i) out.push_back({examples[order[i]], rel[order[i]], order[i]});
    return out;
}

Label SearchClassifierModel::classify(std::string_view query, Rng& rng) const {
    return decide_label(rank_neighbors(query), label_set_, temperature_, rng);
}

std::vector<double> label_scores(std::span<const RankedNeighbor> neighbors, const LabelSet& labels) {
    std::vector<double> scores(labels.size(), 0.0);
    for (const auto& n : neighbors) {
        if (auto i = labels.index_of(n.example.label())) scores[*i] += n.relevance;
    }
    return scores;
}

std::size_t softmax_choice(std::span<const double> scores, double temperature, Rng& rng) {
    const auto best = static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
    if (temperature <= 0.0) return best;

    std::vector<double> weights(scores.size());
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        weights[i] = std::exp((scores[i] - scores[best]) / temperature);
        total += weights[i];
    }
    double u = rng.uniform01() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (u < weights[i]) return i;
        u -= weights[i];
    }
    return best;
}

Label decide_label(std::span<const RankedNeighbor> neighbors, const LabelSet& labels, double temperature, Rng& rng) {
    auto scores = label_scores(neighbors, labels);
    if (std::all_of(scores.begin(), scores.end(), [](double s) { return s == 0.0; })) {
        if (neighbors.empty()) return labels[0];
        auto counts = std::vector<std::size_t>(labels.size(), 0);
        for (const auto& n : neighbors) {
            if (auto i = labels.index_of(n.example.label())) ++counts[*i];
        }
        return labels[static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin())];
    }
    return labels[softmax_choice(scores, temperature, rng)];
}

} // namespace promptforge::search
