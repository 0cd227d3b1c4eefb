#pragma once

#include "promptforge/augment/augment.hpp"
#include "promptforge/backend/completion.hpp"
#include "promptforge/core/dataset.hpp"
#include "promptforge/core/errors.hpp"
#include "promptforge/core/example.hpp"
#include "promptforge/core/rng.hpp"
#include "promptforge/prompt/candidate.hpp"
#include "promptforge/prompt/prompt_classifier.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace promptforge::ga {

using prompt::Candidate;

enum class FitnessMetric { Accuracy };

struct GaConfig {
    std::size_t population_size = 32;
    std::size_t n_alleles = 8;
    std::size_t tournament_size = 4;
    double crossover_probability = 1.0;
    /// Per-allele replacement probability.
    double mutation_rate = 0.1;
    std::size_t generations = 40;
    std::uint64_t seed = 0;
    FitnessMetric fitness_metric = FitnessMetric::Accuracy;
    bool mutate_immigrants = true;

    // Early stopping; all off by default.
    std::optional<double> fitness_target;
    std::optional<std::chrono::milliseconds> time_limit;
    std::optional<std::uint64_t> call_budget;

    augment::GenerationSettings generation;
    /// Regeneration attempts per immigrant allele that duplicates another allele of the same immigrant.
    std::size_t max_immigrant_attempts = 20;
    prompt::ClassifySettings classify;

    [[nodiscard]] std::size_t survivors() const noexcept { return population_size / tournament_size; }

    /// Throws ConfigError unless winners + immigrants + 2 offspring per winner
    /// refill the population exactly and n_alleles splits evenly across labels.
    void validate(std::size_t n_labels) const;
};

/// Every allele ever available for mutation: the training set plus all
/// immigrant alleles. Grows monotonically; iteration order is insertion order.
class GenePool {
  public:
    GenePool() = default;
    explicit GenePool(std::span<const LabeledExample> examples);

    /// False if an allele with this text is already present.
    bool add(const LabeledExample& example);
    [[nodiscard]] bool contains(std::string_view text) const { return texts_.contains(std::string(text)); }
    [[nodiscard]] std::size_t size() const noexcept { return alleles_.size(); }
    [[nodiscard]] const LabeledExample& operator[](std::size_t i) const { return alleles_[i]; }
    [[nodiscard]] std::span<const LabeledExample> alleles() const noexcept { return alleles_; }

  private:
    Examples alleles_;
    std::unordered_set<std::string> texts_;
};

struct Population {
    std::vector<Candidate> candidates;
    std::size_t generation_index = 0;
    GenePool gene_pool;
};

/// Candidates with n_alleles / |labels| alleles per label, drawn without
/// replacement from per-label bags that are refilled only once exhausted
/// across the population. Throws ConfigError when a label has fewer training
/// examples than one candidate needs.
Population init_population(std::span<const LabeledExample> train, const LabelSet& labels, const GaConfig& config,
                           Rng& rng);

using FitnessFunction = std::function<double(const Candidate&)>;

/// Scores every candidate without a fitness. All-or-nothing: if the fitness
/// function throws, the population is left untouched.
void evaluate(Population& population, const FitnessFunction& fitness);

/// Random groups of tournament_size; each group's best survives, ties going to
/// the lower population index. Winners are returned in group order.
/// Throws ConfigError on an unevaluated candidate or a population size that is
/// not a multiple of the tournament size.
std::vector<Candidate> tournament_select(const Population& population, const GaConfig& config, Rng& rng);

/// `count` candidates made entirely of freshly generated alleles, balanced
/// across labels and duplicate-free; every new allele joins `gene_pool`.
std::vector<Candidate> immigrate(backend::CompletionBackend& backend, std::span<const LabeledExample> train,
                                 const LabelSet& labels, std::size_t count, const GaConfig& config, Rng& rng,
                                 GenePool& gene_pool);

/// Swaps the alleles at `positions` between copies of the parents. A swap is
/// skipped when it would put a text into an offspring that already holds it.
/// Throws ConfigError on a length mismatch or an out-of-range position.
std::pair<Candidate, Candidate> swap_positions(const Candidate& a, const Candidate& b,
                                               std::span<const std::size_t> positions);

/// Partially-matched crossover: k uniform in [1, n-1] distinct positions,
/// then swap_positions.
std::pair<Candidate, Candidate> pmx_crossover(const Candidate& a, const Candidate& b, Rng& rng);

/// Each allele is replaced with probability mutation_rate by a uniform draw
/// from the gene pool minus the candidate's current texts (skipped if that set
/// is empty). Fitness is cleared when anything changed.
Candidate mutate(const Candidate& candidate, const GenePool& gene_pool, const GaConfig& config, Rng& rng);

/// Mean over candidate pairs of the fraction of alleles they do not share.
/// Throws ConfigError with fewer than two candidates.
double diversity(std::span<const Candidate> candidates);
inline double diversity(const Population& population) { return diversity(population.candidates); }

struct GenerationCounts {
    std::size_t winners = 0;
    std::size_t immigrants = 0;
    std::size_t offspring = 0;
    std::size_t population = 0;
};

struct GenerationRecord {
    std::size_t generation = 0;
    /// Best fitness observed so far, across all generations.
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    double diversity = 0.0;
    Candidate best;
    GenerationCounts counts;
    /// Candidates scored by the backend this generation (cache misses).
    std::size_t new_evaluations = 0;
    /// Classification requests issued while evaluating this generation.
    std::uint64_t classify_calls = 0;
};

struct GaTrace {
    std::vector<GenerationRecord> records;
};

/// Observer invoked after each generation is evaluated.
class TraceSink {
  public:
    virtual ~TraceSink() = default;
    virtual void on_generation(const GenerationRecord& record, const Population& population) = 0;
};

/// Appends one JSON line per generation and flushes immediately:
/// {generation, best_fitness, mean_fitness, diversity, best_alleles:[{text,label}]}.
class JsonlTraceWriter final : public TraceSink {
  public:
    explicit JsonlTraceWriter(const std::filesystem::path& path);
    void on_generation(const GenerationRecord& record, const Population& population) override;

  private:
    std::ofstream out_;
};

std::string to_trace_line(const GenerationRecord& record);

enum class StopReason { Generations, FitnessTarget, TimeLimit, CallBudget };

std::string_view to_string(StopReason reason);

struct RunResult {
    Candidate best;
    GaTrace trace;
    StopReason stop_reason = StopReason::Generations;
};

/// A run that failed part-way; carries the trace up to the failure.
class RunAborted : public Error {
  public:
    RunAborted(const std::string& what, GaTrace trace) : Error(what), trace_(std::move(trace)) {}
    [[nodiscard]] const GaTrace& trace() const noexcept { return trace_; }

  private:
    GaTrace trace_;
};

/// Evolves in-context example sets for validation accuracy.
///
/// Generation 0 is the evaluated initial population. Each later generation
/// selects winners by tournament, brings in as many immigrants, crosses the
/// i-th winner with the i-th immigrant into two offspring, mutates offspring
/// (and immigrants, if configured), and evaluates winners + immigrants +
/// offspring. Winners are never mutated, so the best fitness never drops.
/// `generator` produces immigrant alleles and `classifier` scores candidates.
RunResult run(backend::CompletionBackend& classifier, backend::CompletionBackend& generator,
              const DatasetBundle& bundle, const prompt::PromptTemplate& tmpl, const GaConfig& config,
              TraceSink* sink = nullptr);

inline RunResult run(backend::CompletionBackend& backend, const DatasetBundle& bundle,
                     const prompt::PromptTemplate& tmpl, const GaConfig& config, TraceSink* sink = nullptr) {
    return run(backend, backend, bundle, tmpl, config, sink);
}

} // namespace promptforge::ga
