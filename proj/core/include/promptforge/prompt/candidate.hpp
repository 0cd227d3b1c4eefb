#pragma once

#include "promptforge/core/example.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace promptforge::prompt {

/// An ordered in-context example set. Alleles never share a text.
class Candidate {
  public:
    Candidate() = default;
    /// Throws DataError when two alleles share a text.
    explicit Candidate(Examples alleles, std::optional<double> fitness = std::nullopt);

    [[nodiscard]] std::span<const LabeledExample> alleles() const noexcept { return alleles_; }
    [[nodiscard]] std::size_t size() const noexcept { return alleles_.size(); }
    [[nodiscard]] const LabeledExample& operator[](std::size_t i) const { return alleles_[i]; }

    [[nodiscard]] bool contains_text(std::string_view text) const;

    [[nodiscard]] const std::optional<double>& fitness() const noexcept { return fitness_; }
    void set_fitness(double fitness) { fitness_ = fitness; }
    void clear_fitness() { fitness_.reset(); }

    /// Cache key: the ordered allele texts and labels.
    [[nodiscard]] std::string key() const;

    friend bool operator==(const Candidate& a, const Candidate& b) { return a.alleles_ == b.alleles_; }

  private:
    Examples alleles_;
    std::optional<double> fitness_;
};

} // namespace promptforge::prompt
