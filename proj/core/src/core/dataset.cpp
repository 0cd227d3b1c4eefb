#include "promptforge/core/dataset.hpp"

#include "promptforge/core/errors.hpp"
#include "promptforge/core/jsonl.hpp"
#include "promptforge/core/rng.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace promptforge {

namespace {

void check_balanced(std::span<const LabeledExample> split, const LabelSet& labels, std::string_view name) {
    auto counts = count_by_label(split, labels);
    std::size_t known = 0;
    for (auto c : counts) known += c;
    if (known != split.size()) throw DataError(std::string(name) + " split has labels outside the label set");
    for (auto c : counts) {
        if (c != counts.front()) throw DataError(std::string(name) + " split is not class-balanced");
    }
}

Examples interleave(std::vector<Examples>& per_label, std::size_t per_label_count) {
    Examples out;
    for (std::size_t i = 0; i < per_label_count; ++i) {
        for (auto& bucket : per_label) out.push_back(bucket[i]);
    }
    return out;
}

} // namespace

void DatasetBundle::validate() const {
    check_balanced(train, label_set, "train");
    check_balanced(validation, label_set, "validation");
    check_balanced(test, label_set, "test");

    std::unordered_map<std::string_view, std::string_view> owner;
    auto claim = [&](const Examples& split, std::string_view name) {
        for (const auto& e : split) {
            auto [it, inserted] = owner.emplace(e.text(), name);
            if (!inserted && it->second != name) {
                throw DataError("text appears in both " + std::string(it->second) + " and " + std::string(name) +
                                " splits: " + e.text());
            }
        }
    };
    claim(train, "train");
    claim(validation, "validation");
    claim(test, "test");
}

DatasetBundle make_splits(std::span<const LabeledExample> pool, SplitSizes sizes, std::uint64_t seed,
                          const LabelSet& label_set) {
    if (label_set.empty()) throw ConfigError("label set is empty");
    const std::size_t n_labels = label_set.size();
    for (auto [size, name] : {std::pair{sizes.train, "train"}, std::pair{sizes.validation, "validation"},
                              std::pair{sizes.test, "test"}}) {
        if (size % n_labels != 0) {
            throw DataError(std::string(name) + " size " + std::to_string(size) + " is not divisible by " +
                            std::to_string(n_labels) + " labels");
        }
    }

    std::unordered_set<std::string_view> seen;
    for (const auto& e : pool) {
        if (!seen.insert(e.text()).second) throw DataError("duplicate text in pool: " + e.text());
        if (!label_set.contains(e.label())) throw DataError("unknown label '" + e.label().name() + "'");
    }

    const std::size_t n_train = sizes.train / n_labels;
    const std::size_t n_val = sizes.validation / n_labels;
    const std::size_t n_test = sizes.test / n_labels;
    const std::size_t needed = n_train + n_val + n_test;

    Rng rng(seed);
    std::vector<Examples> train(n_labels), val(n_labels), test(n_labels);
    for (std::size_t li = 0; li < n_labels; ++li) {
        Examples bucket = filter_by_label(pool, label_set[li]);
        if (bucket.size() < needed) {
            throw DataError("label '" + label_set[li].name() + "' has " + std::to_string(bucket.size()) +
                            " examples, splits need " + std::to_string(needed));
        }
        rng.shuffle(std::span(bucket));
        auto first = bucket.begin();
        train[li].assign(first, first + static_cast<std::ptrdiff_t>(n_train));
        first += static_cast<std::ptrdiff_t>(n_train);
        val[li].assign(first, first + static_cast<std::ptrdiff_t>(n_val));
        first += static_cast<std::ptrdiff_t>(n_val);
        test[li].assign(first, first + static_cast<std::ptrdiff_t>(n_test));
    }

    return DatasetBundle{interleave(train, n_train), interleave(val, n_val), interleave(test, n_test), label_set};
}

DatasetBundle make_splits(std::span<const LabeledExample> pool, SplitSizes sizes, std::uint64_t seed) {
    std::vector<Label> labels;
    for (const auto& e : pool) {
        if (std::find(labels.begin(), labels.end(), e.label()) == labels.end()) labels.push_back(e.label());
    }
    return make_splits(pool, sizes, seed, LabelSet(std::move(labels)));
}

DatasetBundle load_bundle(const std::filesystem::path& dir, const LabelSet& label_set) {
    DatasetBundle bundle{load_jsonl(dir / "train.jsonl", label_set), load_jsonl(dir / "validation.jsonl", label_set),
                         load_jsonl(dir / "test.jsonl", label_set), label_set};
    bundle.validate();
    return bundle;
}

void save_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    save_jsonl(bundle.train, dir / "train.jsonl");
    save_jsonl(bundle.validation, dir / "validation.jsonl");
    save_jsonl(bundle.test, dir / "test.jsonl");
}

} // namespace promptforge
