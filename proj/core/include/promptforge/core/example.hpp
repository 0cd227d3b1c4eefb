#pragma once

#include "promptforge/core/label.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace promptforge {

enum class Origin { Seed, Generated, Immigrant };

std::string_view to_string(Origin origin);
std::optional<Origin> parse_origin(std::string_view text);

/// One short text with its class label; the unit every other module works on.
class LabeledExample {
  public:
    /// Throws DataError when the trimmed text is empty.
    LabeledExample(std::string text, Label label, Origin origin = Origin::Seed);

    [[nodiscard]] const std::string& text() const noexcept { return text_; }
    [[nodiscard]] const Label& label() const noexcept { return label_; }
    [[nodiscard]] Origin origin() const noexcept { return origin_; }

    /// Equality on (text, label); origin is provenance, not identity.
    friend bool operator==(const LabeledExample& a, const LabeledExample& b) {
        return a.text_ == b.text_ && a.label_ == b.label_;
    }

  private:
    std::string text_;
    Label label_;
    Origin origin_;
};

using Examples = std::vector<LabeledExample>;

/// Examples of one label, in input order.
Examples filter_by_label(std::span<const LabeledExample> examples, const Label& label);

/// Count per label, in label-set order.
std::vector<std::size_t> count_by_label(std::span<const LabeledExample> examples, const LabelSet& labels);

} // namespace promptforge
