#pragma once

#include "promptforge/core/example.hpp"
#include "promptforge/core/label.hpp"
#include "promptforge/core/rng.hpp"
#include "promptforge/search/text_vector.hpp"

#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace promptforge::search {

/// Vectorized training file; shared by every model built over the same examples.
class SearchIndex {
  public:
    explicit SearchIndex(Examples examples);

    [[nodiscard]] std::span<const LabeledExample> examples() const noexcept { return examples_; }
    [[nodiscard]] std::size_t size() const noexcept { return examples_.size(); }

    /// Cosine relevance of every example to `query`, in example order.
    [[nodiscard]] std::vector<double> relevances(std::string_view query) const;

  private:
    Examples examples_;
    std::vector<TermVector> vectors_;
};

struct RankedNeighbor {
    LabeledExample example;
    double relevance; // cosine similarity, in [0, 1]
    std::size_t index; // position in the training file
};

/// Local stand-in for a search-based classification endpoint: rank the
/// training file by relevance to the query, keep the top `max_examples`,
/// and pick a label from the summed relevance per label.
class SearchClassifierModel {
  public:
    /// Throws ConfigError on an empty example list, max_examples == 0 or a negative temperature.
    SearchClassifierModel(Examples examples, std::size_t max_examples, double temperature, LabelSet label_set);
    SearchClassifierModel(std::shared_ptr<const SearchIndex> index, std::size_t max_examples, double temperature,
                          LabelSet label_set);

    [[nodiscard]] std::size_t max_examples() const noexcept { return max_examples_; }
    [[nodiscard]] double temperature() const noexcept { return temperature_; }
    [[nodiscard]] const LabelSet& label_set() const noexcept { return label_set_; }
    [[nodiscard]] const SearchIndex& index() const noexcept { return *index_; }

    /// Top min(max_examples, |examples|) examples by relevance, descending;
    /// equal relevances keep training-file order.
    [[nodiscard]] std::vector<RankedNeighbor> rank_neighbors(std::string_view query) const;

    [[nodiscard]] Label classify(std::string_view query, Rng& rng) const;

  private:
    std::shared_ptr<const SearchIndex> index_;
    std::size_t max_examples_;
    double temperature_;
    LabelSet label_set_;
};

/// Label decision from an already-ranked neighbor list.
///
/// Scores are summed relevance per label. Temperature 0 takes the argmax with
/// ties going to the earlier label in `labels`; a positive temperature samples
/// from softmax(score / temperature). When every relevance is zero the
/// majority label of the neighbors is used, and label 0 if there are none.
Label decide_label(std::span<const RankedNeighbor> neighbors, const LabelSet& labels, double temperature, Rng& rng);

/// Per-label summed relevance, in label-set order.
std::vector<double> label_scores(std::span<const RankedNeighbor> neighbors, const LabelSet& labels);

/// Index of the sampled entry under softmax(scores / temperature); argmax
/// (first maximum) when temperature is 0.
std::size_t softmax_choice(std::span<const double> scores, double temperature, Rng& rng);

} // namespace promptforge::search
