#include "promptforge/ga/ga.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <numeric>

namespace promptforge::ga {

void GaConfig::validate(std::size_t n_labels) const {
    if (n_labels == 0) throw ConfigError("label set is empty");
    if (tournament_size < 2) throw ConfigError("tournament size must be at least 2");
    if (population_size == 0 || population_size % tournament_size != 0) {
        throw ConfigError("population size " + std::to_string(population_size) +
                          " is not a positive multiple of tournament size " + std::to_string(tournament_size));
    }
    // winners + one immigrant per winner + two offspring per winner.
    if (survivors() * 4 != population_size) {
        throw ConfigError("population size " + std::to_string(population_size) + " is not refilled by " +
                          std::to_string(survivors()) + " winners, immigrants and 2 offspring each");
    }
    if (n_alleles == 0 || n_alleles % n_labels != 0) {
        throw ConfigError("n_alleles " + std::to_string(n_alleles) + " does not split evenly across " +
                          std::to_string(n_labels) + " labels");
    }
    if (!(crossover_probability >= 0.0 && crossover_probability <= 1.0)) {
        throw ConfigError("crossover probability must lie in [0, 1]");
    }
    if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) throw ConfigError("mutation rate must lie in [0, 1]");
    if (max_immigrant_attempts == 0) throw ConfigError("max_immigrant_attempts must be positive");
}

GenePool::GenePool(std::span<const LabeledExample> examples) {
    for (const auto& e : examples) add(e);
}

bool GenePool::add(const LabeledExample& example) {
    if (!texts_.insert(example.text()).second) return false;
    alleles_.push_back(example);
    return true;
}

Population init_population(std::span<const LabeledExample> train, const LabelSet& labels, const GaConfig& config,
                           Rng& rng) {
    config.validate(labels.size());
    const std::size_t per_label = config.n_alleles / labels.size();

    std::vector<Examples> pools;
    for (const auto& label : labels) {
        pools.push_back(filter_by_label(train, label));
        if (pools.back().size() < per_label) {
            throw ConfigError("label '" + label.name() + "' has " + std::to_string(pools.back().size()) +
                              " training examples, each candidate needs " + std::to_string(per_label));
        }
    }

    // One bag per label, drawn without replacement and refilled only when empty.
    std::vector<std::vector<std::size_t>> bags(labels.size());
    auto refill = [&](std::size_t li) {
        bags[li].resize(pools[li].size());
        std::iota(bags[li].begin(), bags[li].end(), std::size_t{0});
        rng.shuffle(std::span(bags[li]));
    };

    Population population;
    population.gene_pool = GenePool(train);
    population.candidates.reserve(config.population_size);
    for (std::size_t c = 0; c < config.population_size; ++c) {
        Examples alleles;
        std::unordered_set<std::string> taken;
        for (std::size_t li = 0; li < labels.size(); ++li) {
            std::vector<std::size_t> deferred;
            for (std::size_t k = 0; k < per_label;) {
                if (bags[li].empty()) refill(li);
                auto idx = bags[li].back();
                bags[li].pop_back();
                if (taken.contains(pools[li][idx].text())) {
                    deferred.push_back(idx);
                    continue;
                }
                taken.insert(pools[li][idx].text());
                alleles.push_back(pools[li][idx]);
                ++k;
            }
            bags[li].insert(bags[li].end(), deferred.rbegin(), deferred.rend());
        }
        rng.shuffle(std::span(alleles));
        population.candidates.emplace_back(std::move(alleles));
    }
    return population;
}

void evaluate(Population& population, const FitnessFunction& fitness) {
    std::vector<std::optional<double>> scores(population.candidates.size());
    for (std::size_t i = 0; i < population.candidates.size(); ++i) {
        const auto& c = population.candidates[i];
        if (!c.fitness()) scores[i] = fitness(c);
    }
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i]) population.candidates[i].set_fitness(*scores[i]);
    }
}

std::vector<Candidate> tournament_select(const Population& population, const GaConfig& config, Rng& rng) {
    const auto& pop = population.candidates;
    if (config.tournament_size == 0 || pop.size() % config.tournament_size != 0) {
        throw ConfigError("population of " + std::to_string(pop.size()) + " does not split into tournaments of " +
                          std::to_string(config.tournament_size));
    }
    for (std::size_t i = 0; i < pop.size(); ++i) {
        if (!pop[i].fitness()) throw ConfigError("candidate " + std::to_string(i) + " has not been evaluated");
    }

    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span(order));

    std::vector<Candidate> winners;
    winners.reserve(pop.size() / config.tournament_size);
    for (std::size_t g = 0; g < order.size(); g += config.tournament_size) {
        std::size_t best = order[g];
        for (std::size_t k = g + 1; k < g + config.tournament_size; ++k) {
            std::size_t i = order[k];
            if (*pop[i].fitness() > *pop[best].fitness() || (*pop[i].fitness() == *pop[best].fitness() && i < best)) {
                best = i;
            }
        }
        winners.push_back(pop[best]);
    }
    return winners;
}

std::vector<Candidate> immigrate(backend::CompletionBackend& backend, std::span<const LabeledExample> train,
                                 const LabelSet& labels, std::size_t count, const GaConfig& config, Rng& rng,
                                 GenePool& gene_pool) {
    config.validate(labels.size());
    const std::size_t per_label = config.n_alleles / labels.size();

    std::vector<Candidate> immigrants;
    immigrants.reserve(count);
    for (std::size_t c = 0; c < count; ++c) {
        Examples alleles;
        std::unordered_set<std::string> taken;
        for (const auto& label : labels) {
            for (std::size_t k = 0; k < per_label; ++k) {
                std::size_t attempts = 0;
                for (;;) {
                    auto generated = augment::generate_example(backend, train, label, rng, config.generation);
                    if (taken.insert(generated.example.text()).second) {
                        alleles.push_back(std::move(generated.example));
                        break;
                    }
                    if (++attempts >= config.max_immigrant_attempts) {
                        throw BackendError("could not generate " + std::to_string(per_label) +
                                           " distinct alleles for label '" + label.name() + "'");
                    }
                }
            }
        }
        rng.shuffle(std::span(alleles));
        for (const auto& a : alleles) gene_pool.add(a);
        immigrants.emplace_back(std::move(alleles));
    }
    return immigrants;
}

std::pair<Candidate, Candidate> swap_positions(const Candidate& a, const Candidate& b,
                                               std::span<const std::size_t> positions) {
    if (a.size() != b.size()) {
        throw ConfigError("crossover parents differ in length: " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
    }
    Examples x(a.alleles().begin(), a.alleles().end());
    Examples y(b.alleles().begin(), b.alleles().end());
    auto holds = [](const Examples& alleles, std::string_view text, std::size_t except) {
        for (std::size_t i = 0; i < alleles.size(); ++i) {
            if (i != except && alleles[i].text() == text) return true;
        }
        return false;
    };
    for (auto p : positions) {
        if (p >= x.size()) throw ConfigError("crossover position " + std::to_string(p) + " out of range");
        if (x[p].text() == y[p].text()) continue;
        if (holds(x, y[p].text(), p) || holds(y, x[p].text(), p)) continue;
        std::swap(x[p], y[p]);
    }
    return {Candidate(std::move(x)), Candidate(std::move(y))};
}

std::pair<Candidate, Candidate> pmx_crossover(const Candidate& a, const Candidate& b, Rng& rng) {
    if (a.size() != b.size()) {
        throw ConfigError("crossover parents differ in length: " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
    }
    const std::size_t n = a.size();
    if (n == 0) return {Candidate(), Candidate()};
    const std::size_t k = n == 1 ? 1 : 1 + rng.uniform_index(n - 1);

    std::vector<std::size_t> positions(n);
    std::iota(positions.begin(), positions.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) std::swap(positions[i], positions[i + rng.uniform_index(n - i)]);
    positions.resize(k);
    std::sort(positions.begin(), positions.end());
    return swap_positions(a, b, positions);
}

Candidate mutate(const Candidate& candidate, const GenePool& gene_pool, const GaConfig& config, Rng& rng) {
    Examples alleles(candidate.alleles().begin(), candidate.alleles().end());
    auto in_candidate = [&](std::string_view text) {
        return std::any_of(alleles.begin(), alleles.end(), [&](const LabeledExample& e) { return e.text() == text; });
    };

    bool changed = false;
    for (std::size_t p = 0; p < alleles.size(); ++p) {
        if (!rng.bernoulli(config.mutation_rate)) continue;
        std::size_t overlap = 0;
        for (const auto& a : alleles) overlap += gene_pool.contains(a.text()) ? 1 : 0;
        if (gene_pool.size() <= overlap) continue;

        // Rejection sampling is uniform over the eligible alleles.
        for (;;) {
            const auto& draw = gene_pool[rng.uniform_index(gene_pool.size())];
            if (!in_candidate(draw.text())) {
                alleles[p] = draw;
                changed = true;
                break;
            }
        }
    }
    if (!changed) return candidate;
    return Candidate(std::move(alleles));
}

double diversity(std::span<const Candidate> candidates) {
    if (candidates.size() < 2) throw ConfigError("diversity needs at least two candidates");
    std::vector<std::unordered_set<std::string_view>> sets;
    sets.reserve(candidates.size());
    for (const auto& c : candidates) {
        auto& s = sets.emplace_back();
        for (const auto& a : c.alleles()) s.insert(a.text());
    }

    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        for (std::size_t j = i + 1; j < sets.size(); ++j) {
            const std::size_t n = std::max(candidates[i].size(), candidates[j].size());
            std::size_t shared = 0;
            for (auto t : sets[i]) shared += sets[j].contains(t) ? 1 : 0;
            total += n == 0 ? 0.0 : 1.0 - static_cast<double>(shared) / static_cast<double>(n);
            ++pairs;
        }
    }
    return total / static_cast<double>(pairs);
}

JsonlTraceWriter::JsonlTraceWriter(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error("cannot open trace file " + path.string());
}

std::string to_trace_line(const GenerationRecord& record) {
    nlohmann::json alleles = nlohmann::json::array();
    for (const auto& a : record.best.alleles()) alleles.push_back({{"text", a.text()}, {"label", a.label().name()}});
    nlohmann::json line = {
        {"generation", record.generation},   {"best_fitness", record.best_fitness},
        {"mean_fitness", record.mean_fitness}, {"diversity", record.diversity},
        {"best_alleles", std::move(alleles)},
    };
    return line.dump();
}

void JsonlTraceWriter::on_generation(const GenerationRecord& record, const Population&) {
    out_ << to_trace_line(record) << '\n';
    out_.flush();
    if (!out_) throw Error("failed to append to trace file");
}

std::string_view to_string(StopReason reason) {
    switch (reason) {
    case StopReason::Generations: return "generations";
    case StopReason::FitnessTarget: return "fitness_target";
    case StopReason::TimeLimit: return "time_limit";
    case StopReason::CallBudget: return "call_budget";
    }
    return "generations";
}

namespace {

std::uint64_t total_calls(backend::CompletionBackend& classifier, backend::CompletionBackend& generator) {
    return &classifier == &generator ? classifier.call_count() : classifier.call_count() + generator.call_count();
}

} // namespace

RunResult run(backend::CompletionBackend& classifier, backend::CompletionBackend& generator,
              const DatasetBundle& bundle, const prompt::PromptTemplate& tmpl, const GaConfig& config,
              TraceSink* sink) {
    config.validate(bundle.label_set.size());
    const auto started = std::chrono::steady_clock::now();
    const std::uint64_t calls_at_start = total_calls(classifier, generator);

    prompt::ValidationFitness fitness(classifier, tmpl, bundle.validation, config.classify);
    const FitnessFunction score = [&](const Candidate& c) { return fitness(c); };
    const Rng root(config.seed);

    RunResult result;
    std::optional<Candidate> best;
    Population population;

    auto evaluate_and_record = [&](std::size_t generation, GenerationCounts counts) {
        const auto evaluations_before = fitness.evaluations();
        const auto calls_before = classifier.call_count();
        evaluate(population, score);
        population.generation_index = generation;

        double sum = 0.0;
        for (const auto& c : population.candidates) {
            sum += *c.fitness();
            if (!best || *c.fitness() > *best->fitness()) best = c;
        }
        GenerationRecord record{
            .generation = generation,
            .best_fitness = *best->fitness(),
            .mean_fitness = sum / static_cast<double>(population.candidates.size()),
            .diversity = population.candidates.size() >= 2 ? diversity(population) : 0.0,
            .best = *best,
            .counts = counts,
            .new_evaluations = static_cast<std::size_t>(fitness.evaluations() - evaluations_before),
            .classify_calls = classifier.call_count() - calls_before,
        };
        result.trace.records.push_back(record);
        if (sink) sink->on_generation(record, population);
    };

    try {
        Rng init_rng = root.fork(0);
        population = init_population(bundle.train, bundle.label_set, config, init_rng);
        evaluate_and_record(0, {.population = population.candidates.size()});

        for (std::size_t g = 1; g <= config.generations; ++g) {
            if (config.fitness_target && *best->fitness() >= *config.fitness_target) {
                result.stop_reason = StopReason::FitnessTarget;
                break;
            }
            if (config.time_limit && std::chrono::steady_clock::now() - started >= *config.time_limit) {
                result.stop_reason = StopReason::TimeLimit;
                break;
            }
            if (config.call_budget && total_calls(classifier, generator) - calls_at_start >= *config.call_budget) {
                result.stop_reason = StopReason::CallBudget;
                break;
            }

            const Rng gen_rng = root.fork(g);
            Rng select_rng = gen_rng.fork(1);
            Rng immigrate_rng = gen_rng.fork(2);
            Rng crossover_rng = gen_rng.fork(3);
            Rng mutate_rng = gen_rng.fork(4);

            auto winners = tournament_select(population, config, select_rng);
            auto immigrants = immigrate(generator, bundle.train, bundle.label_set, winners.size(), config,
                                        immigrate_rng, population.gene_pool);

            std::vector<Candidate> offspring;
            offspring.reserve(2 * winners.size());
            for (std::size_t i = 0; i < winners.size(); ++i) {
                if (crossover_rng.bernoulli(config.crossover_probability)) {
                    auto [first, second] = pmx_crossover(winners[i], immigrants[i], crossover_rng);
                    offspring.push_back(std::move(first));
                    offspring.push_back(std::move(second));
                } else {
                    offspring.push_back(winners[i]);
                    offspring.push_back(immigrants[i]);
                }
            }
            for (auto& child : offspring) {
                child = mutate(child, population.gene_pool, config, mutate_rng);
                child.clear_fitness();
            }
            if (config.mutate_immigrants) {
                for (auto& immigrant : immigrants) immigrant = mutate(immigrant, population.gene_pool, config, mutate_rng);
            }

            GenerationCounts counts{winners.size(), immigrants.size(), offspring.size(), 0};
            population.candidates.clear();
            std::move(winners.begin(), winners.end(), std::back_inserter(population.candidates));
            std::move(immigrants.begin(), immigrants.end(), std::back_inserter(population.candidates));
            std::move(offspring.begin(), offspring.end(), std::back_inserter(population.candidates));
            counts.population = population.candidates.size();
            evaluate_and_record(g, counts);
        }
    } catch (const std::exception& e) {
        throw RunAborted(std::string("optimization aborted: ") + e.what(), std::move(result.trace));
    }

    result.best = *best;
    return result;
}

} // namespace promptforge::ga
