#include "promptforge/core/label.hpp"

#include "promptforge/core/errors.hpp"

#include <algorithm>

namespace promptforge {

namespace {
bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
} // namespace

std::string trim(std::string_view text) {
    auto first = std::find_if_not(text.begin(), text.end(), is_space);
    auto last = std::find_if_not(text.rbegin(), text.rend(), is_space).base();
    return first < last ? std::string(first, last) : std::string();
}

LabelSet::LabelSet(std::vector<Label> labels) : labels_(std::move(labels)) {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i].name().empty()) {
            throw ConfigError("label names must be non-empty");
        }
        if (std::find(labels_.begin(), labels_.begin() + static_cast<std::ptrdiff_t>(i), labels_[i]) !=
            labels_.begin() + static_cast<std::ptrdiff_t>(i)) {
            throw ConfigError("duplicate label '" + labels_[i].name() + "'");
        }
    }
}

LabelSet::LabelSet(std::initializer_list<std::string_view> names)
    : LabelSet([&] {
          std::vector<Label> labels;
          for (auto n : names) labels.emplace_back(n);
          return labels;
      }()) {}

LabelSet LabelSet::parse(std::string_view comma_separated) {
    std::vector<Label> labels;
    std::size_t start = 0;
    while (start <= comma_separated.size()) {
        auto end = comma_separated.find(',', start);
        if (end == std::string_view::npos) end = comma_separated.size();
        labels.emplace_back(comma_separated.substr(start, end - start));
        start = end + 1;
    }
    return LabelSet(std::move(labels));
}

bool LabelSet::contains(const Label& label) const { return index_of(label).has_value(); }

std::optional<std::size_t> LabelSet::index_of(const Label& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - labels_.begin());
}

std::vector<std::string> LabelSet::names() const {
    std::vector<std::string> out;
    out.reserve(labels_.size());
    for (const auto& l : labels_) out.push_back(l.name());
    return out;
}

LabelSet default_label_set() { return LabelSet{"Data", "Other"}; }

} // namespace promptforge
