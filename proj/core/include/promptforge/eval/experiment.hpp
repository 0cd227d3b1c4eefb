#pragma once

#include "promptforge/augment/augment.hpp"
#include "promptforge/backend/completion.hpp"
#include "promptforge/core/dataset.hpp"
#include "promptforge/core/rng.hpp"
#include "promptforge/eval/stats.hpp"
#include "promptforge/ga/ga.hpp"

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace promptforge::eval {

/// Hyperparameter grid for the search-classifier experiments.
struct GridSpec {
    std::vector<double> temperatures{0.0, 0.1, 0.5};
    std::vector<std::size_t> max_examples_values{5, 10, 15, 20, 25};
    /// Extra max_examples value tried when n_added exceeds large_threshold.
    std::optional<std::size_t> large_max_examples = 100;
    std::size_t large_threshold = 100;
    std::vector<std::size_t> n_added_values{0, 10, 100, 1000, 10000};
    std::size_t repeats = 5;
    /// Generated pool size as a multiple of the largest n_added.
    double pool_factor = 1.1;
    TTestKind t_test = TTestKind::Welch;

    /// Throws ConfigError on an empty list, repeats < 2 or pool_factor < 1.
    void validate() const;

    [[nodiscard]] std::vector<std::size_t> max_examples_for(std::size_t n_added) const;
};

/// Plain "key = value" text; list values are comma-separated, '#' starts a
/// comment. Keys: temperatures, max_examples, large_max_examples (or "none"),
/// large_threshold, n_added, repeats, pool_factor, t_test (welch|pooled).
/// Unset keys keep their defaults; unknown keys throw ConfigError.
GridSpec parse_grid_spec(std::istream& in);
GridSpec load_grid_spec(const std::filesystem::path& path);
std::string to_text(const GridSpec& grid);

struct CellConfig {
    std::size_t n_added = 0;
    double temperature = 0.0;
    std::size_t max_examples = 0;

    friend auto operator<=>(const CellConfig&, const CellConfig&) = default;
};

/// Every validation cell of the grid, ordered by n_added, temperature, max_examples.
std::vector<CellConfig> enumerate_cells(const GridSpec& grid);

struct CellResult {
    CellConfig config;
    std::vector<double> accuracies;
    double mean = 0.0;
    double standard_error = 0.0;
    std::optional<double> p_value_vs_baseline;
    /// False when fewer than two repeats completed; mean and SE are then NaN.
    bool valid = true;
};

CellResult make_cell(CellConfig config, std::vector<double> accuracies);

struct PlotRow {
    std::size_t n_added = 0;
    std::string split; // "validation" or "test"
    double mean = 0.0;
    double standard_error = 0.0;
    std::optional<double> p_value;
};

struct ExperimentReport {
    /// All validation cells.
    std::vector<CellResult> cells;
    /// Best validation cell per n_added, in n_added order.
    std::vector<CellResult> validation_best;
    /// Test results of each validation_best configuration.
    std::vector<CellResult> test_best;
    CellConfig best_validation_config;
    CellResult test_results;
    /// One (n_added, split) row per validation_best / test_best entry.
    std::vector<PlotRow> plot_series;
    /// Repeats abandoned because of an error.
    std::size_t failed_repeats = 0;
};

/// Per-cell classifier over one augmented training set.
class CellClassifier {
  public:
    virtual ~CellClassifier() = default;
    virtual Label predict(std::string_view query, double temperature, std::size_t max_examples, Rng& rng) = 0;
};

using ClassifierFactory =
    std::function<std::unique_ptr<CellClassifier>(std::span<const LabeledExample> training, const LabelSet& labels)>;

/// The search classifier; rankings are cached per query, so every cell of a
/// repeat reuses one similarity pass.
ClassifierFactory search_classifier_factory();

struct GridOptions {
    ClassifierFactory classifier = search_classifier_factory();
    augment::GenerationSettings generation;
};

/// Grid search with repeated trials.
///
/// One pool of ceil(max(n_added) * pool_factor) generated examples is built up
/// front; each repeat of each n_added draws a label-balanced sample of n from
/// it, appends it to the training split and scores every (temperature,
/// max_examples) cell on validation. The best cell per n_added (ties: lower
/// temperature, then smaller max_examples) is then scored on test with the
/// same repeats. p-values compare against n_added = 0 when it is in the grid.
ExperimentReport run_grid(backend::CompletionBackend& backend, const DatasetBundle& bundle, const GridSpec& grid,
                          std::uint64_t seed, const GridOptions& options = {});

/// Best configuration across n_added; ties go to smaller n_added, then lower
/// temperature, then smaller max_examples.
CellConfig select_best(std::span<const CellResult> cells);

/// CSV "n_added,split,mean,se".
void write_plot_csv(const ExperimentReport& report, std::ostream& out);
void emit_plot_data(const ExperimentReport& report, const std::filesystem::path& path);

/// CSV "generation,trial,best_fitness,mean_fitness,diversity,best_fitness_se,mean_fitness_se,diversity_se".
/// Per-trial rows carry the trial index and empty SE columns; when there is at
/// least one trial, an averaged series follows with trial "mean" (SE columns
/// empty for a single trial).
void write_ga_plot_csv(std::span<const ga::GaTrace> trials, std::ostream& out);
void emit_plot_data(std::span<const ga::GaTrace> trials, const std::filesystem::path& path);

struct GaTrialSummary {
    double best_validation = 0.0;
    double test_accuracy = 0.0;
    double final_diversity = 0.0;
};

struct MetricCell {
    double mean = 0.0;
    std::optional<double> standard_error;
};

struct ComparisonRow {
    std::string metric;
    std::optional<MetricCell> completion;
    std::optional<MetricCell> classification;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
};

/// Rows "Best Validation Acc.", "Best Test Acc.", "Proportion of Differing
/// Alleles". The completion side is the mean (SE with two or more trials) over
/// GA trials; the classification side is the best validation mean and the
/// best test mean (with its SE) across n_added.
ComparisonTable compare_endpoints(std::span<const GaTrialSummary> ga_results, const ExperimentReport& grid_report);

std::string to_markdown(const ComparisonTable& table);
std::string to_csv(const ComparisonTable& table);

/// Per-n_added table: validation and test mean, SE and p-value.
std::string to_markdown(const ExperimentReport& report);
std::string to_csv(const ExperimentReport& report);

std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(std::string_view json);

std::string trial_summaries_to_json(std::span<const GaTrialSummary> trials);
std::vector<GaTrialSummary> trial_summaries_from_json(std::string_view json);

} // namespace promptforge::eval
