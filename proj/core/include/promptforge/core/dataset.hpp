#pragma once

#include "promptforge/core/example.hpp"
#include "promptforge/core/label.hpp"

#include <cstdint>
#include <filesystem>
#include <span>

namespace promptforge {

struct SplitSizes {
    std::size_t train = 26;
    std::size_t validation = 26;
    std::size_t test = 20;

    [[nodiscard]] std::size_t total() const noexcept { return train + validation + test; }
};

/// Train/validation/test splits. Each split is class-balanced and no text
/// appears in more than one split.
struct DatasetBundle {
    Examples train;
    Examples validation;
    Examples test;
    LabelSet label_set;

    /// Throws DataError if a split is unbalanced or splits share a text.
    void validate() const;
};

/// Deterministic class-balanced split: each label's examples are shuffled with
/// the seeded generator and consecutive prefixes go to train, validation, test.
/// Within a split, labels are interleaved in label-set order.
DatasetBundle make_splits(std::span<const LabeledExample> pool, SplitSizes sizes, std::uint64_t seed,
                          const LabelSet& label_set);

/// Same, with the label set taken from the pool in order of first appearance.
DatasetBundle make_splits(std::span<const LabeledExample> pool, SplitSizes sizes, std::uint64_t seed);

/// Directory layout: train.jsonl, validation.jsonl, test.jsonl.
DatasetBundle load_bundle(const std::filesystem::path& dir, const LabelSet& label_set);
void save_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir);

} // namespace promptforge
