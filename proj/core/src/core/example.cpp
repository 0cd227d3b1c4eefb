#include "promptforge/core/example.hpp"

#include "promptforge/core/errors.hpp"

#include <algorithm>

namespace promptforge {

std::string_view to_string(Origin origin) {
    switch (origin) {
    case Origin::Seed: return "seed";
    case Origin::Generated: return "generated";
    case Origin::Immigrant: return "immigrant";
    }
    return "seed";
}

std::optional<Origin> parse_origin(std::string_view text) {
    if (text == "seed") return Origin::Seed;
    if (text == "generated") return Origin::Generated;
    if (text == "immigrant") return Origin::Immigrant;
    return std::nullopt;
}

LabeledExample::LabeledExample(std::string text, Label label, Origin origin)
    : text_(std::move(text)), label_(std::move(label)), origin_(origin) {
    if (trim(text_).empty()) {
        throw DataError("example text is empty");
    }
}

Examples filter_by_label(std::span<const LabeledExample> examples, const Label& label) {
    Examples out;
    std::copy_if(examples.begin(), examples.end(), std::back_inserter(out),
                 [&](const LabeledExample& e) { return e.label() == label; });
    return out;
}

std::vector<std::size_t> count_by_label(std::span<const LabeledExample> examples, const LabelSet& labels) {
    std::vector<std::size_t> counts(labels.size(), 0);
    for (const auto& e : examples) {
        if (auto i = labels.index_of(e.label())) ++counts[*i];
    }
    return counts;
}

} // namespace promptforge
