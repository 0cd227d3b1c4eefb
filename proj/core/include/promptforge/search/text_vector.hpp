#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace promptforge::search {

/// Lowercased alphanumeric word tokens; everything else separates words.
std::vector<std::string> tokenize(std::string_view text);

/// Sparse bag-of-words vector, sorted by term, L2-normalized.
class TermVector {
  public:
    using Entry = std::pair<std::string, double>;

    TermVector() = default;

    [[nodiscard]] const std::vector<Entry>& entries() const noexcept { return entries_; }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }

    /// Weight of `term`, 0 when absent.
    [[nodiscard]] double weight(std::string_view term) const;

    friend bool operator==(const TermVector&, const TermVector&) = default;

  private:
    friend TermVector vectorize(std::string_view text);
    std::vector<Entry> entries_;
};

/// Sublinear term frequency (1 + ln tf), L2-normalized. Empty text gives an empty vector.
TermVector vectorize(std::string_view text);

/// Dot product of two normalized vectors, clamped to [0, 1]. 0 if either is empty.
double cosine(const TermVector& a, const TermVector& b);

} // namespace promptforge::search
