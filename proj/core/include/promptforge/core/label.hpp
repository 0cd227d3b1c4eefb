#pragma once

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace promptforge {

/// Trims ASCII whitespace from both ends.
std::string trim(std::string_view text);

/// A class label. Names are canonicalized by trimming only; case is preserved,
/// so "data" and "Data" are different labels.
class Label {
  public:
    Label() = default;
    explicit Label(std::string_view name) : name_(trim(name)) {}

    [[nodiscard]] const std::string& name() const noexcept { return name_; }

    friend auto operator<=>(const Label&, const Label&) = default;

  private:
    std::string name_;
};

/// Ordered, duplicate-free set of labels. Order matters: it is the tie-break
/// order for every argmax over labels.
class LabelSet {
  public:
    LabelSet() = default;
    explicit LabelSet(std::vector<Label> labels);
    LabelSet(std::initializer_list<std::string_view> names);

    /// Parses "Data,Other".
    static LabelSet parse(std::string_view comma_separated);

    [[nodiscard]] bool contains(const Label& label) const;
    [[nodiscard]] std::optional<std::size_t> index_of(const Label& label) const;
    [[nodiscard]] std::size_t size() const noexcept { return labels_.size(); }
    [[nodiscard]] bool empty() const noexcept { return labels_.empty(); }
    [[nodiscard]] const Label& operator[](std::size_t i) const { return labels_[i]; }
    [[nodiscard]] std::span<const Label> labels() const noexcept { return labels_; }
    [[nodiscard]] std::vector<std::string> names() const;

    auto begin() const noexcept { return labels_.begin(); }
    auto end() const noexcept { return labels_.end(); }

    friend bool operator==(const LabelSet&, const LabelSet&) = default;

  private:
    std::vector<Label> labels_;
};

/// The case-study label set {Data, Other}.
LabelSet default_label_set();

} // namespace promptforge
