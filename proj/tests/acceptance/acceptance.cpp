// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.
#include "cli.hpp"

#include "promptforge/augment/augment.hpp"
#include "promptforge/backend/simulator.hpp"
#include "promptforge/core/jsonl.hpp"
#include "promptforge/eval/experiment.hpp"
#include "promptforge/eval/stats.hpp"
#include "promptforge/ga/ga.hpp"
#include "promptforge/prompt/prompt_classifier.hpp"

#include "synthetic.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

namespace pf = promptforge;
namespace be = promptforge::backend;
namespace ga = promptforge::ga;
namespace ev = promptforge::eval;
namespace fs = std::filesystem;
using pf::Label;
using pf::LabeledExample;

namespace {

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void expect(bool condition, const std::string& what) {
        if (!condition) {
            if (ok) detail << "failed: ";
            else detail << "; ";
            detail << what;
            ok = false;
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v, int precision = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

pf::DatasetBundle fixture_bundle() {
    const auto dir = pf::testing::fixture_dir();
    const auto labels = pf::default_label_set();
    return {pf::load_jsonl(dir / "train.jsonl", labels), pf::load_jsonl(dir / "validation.jsonl", labels),
            pf::load_jsonl(dir / "test.jsonl", labels), labels};
}

bool duplicate_free(const ga::Candidate& c) {
    std::set<std::string> seen;
    for (const auto& a : c.alleles()) {
        if (!seen.insert(a.text()).second) return false;
    }
    return true;
}

ga::Candidate cand(std::initializer_list<const char*> texts) {
    pf::Examples alleles;
    for (const char* t : texts) alleles.emplace_back(t, Label("Data"));
    return ga::Candidate(alleles);
}

// --- 1 ---------------------------------------------------------------------

struct InvariantSink final : ga::TraceSink {
    Check* check;
    std::size_t generations_seen = 0;
    void on_generation(const ga::GenerationRecord& r, const ga::Population& pop) override {
        ++generations_seen;
        check->expect(pop.candidates.size() == 32, "population size " + std::to_string(pop.candidates.size()));
        if (r.generation > 0) {
            check->expect(r.counts.winners == 8 && r.counts.immigrants == 8 && r.counts.offspring == 16,
                          "composition at generation " + std::to_string(r.generation));
        }
        for (const auto& c : pop.candidates) check->expect(duplicate_free(c), "duplicate allele");
    }
};

Check criterion_1() {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    const auto bundle = fixture_bundle();
    std::size_t generations = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        ga::GaConfig config;
        config.generations = 10;
        config.seed = seed;
        be::SimulatedBackend sim(seed);
        InvariantSink sink;
        sink.check = &check;
        auto result = ga::run(sim, bundle, pf::prompt::PromptTemplate{}, config, &sink);
        generations += sink.generations_seen;
        check.expect(result.trace.records.size() == 11, "trace length");
        for (std::size_t g = 1; g < result.trace.records.size(); ++g) {
            check.expect(result.trace.records[g].best_fitness >= result.trace.records[g - 1].best_fitness,
                         "best fitness dropped (seed " + std::to_string(seed) + ")");
        }
    }
    const double elapsed = seconds_since(start);
    check.expect(elapsed < 120.0, "runtime " + fmt(elapsed, 1) + " s");
    if (check.ok) check.detail << "50 runs, " << generations << " generations checked in " << fmt(elapsed, 1) << " s";
    return check;
}

// --- 2 ---------------------------------------------------------------------

Check criterion_2() {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    const auto bundle = pf::testing::make_separable_bundle(2021);
    check.expect(bundle.train.size() == 26 && bundle.validation.size() == 26 && bundle.test.size() == 20, "split sizes");

    std::size_t oracle_correct = 0;
    for (const auto& e : bundle.test) oracle_correct += pf::testing::keyword_oracle(e.text()) == e.label() ? 1 : 0;
    const double oracle_acc = static_cast<double>(oracle_correct) / static_cast<double>(bundle.test.size());
    check.expect(oracle_acc == 1.0, "oracle test accuracy " + fmt(oracle_acc));

    ga::GaConfig config;
    config.seed = 2021;
    be::SimulatedBackend sim(2021);
    const pf::prompt::PromptTemplate tmpl;
    auto result = ga::run(sim, bundle, tmpl, config);
    const double val = *result.best.fitness();
    const double test = pf::prompt::accuracy(sim, tmpl, result.best, bundle.test);
    const double elapsed = seconds_since(start);
    check.expect(val >= 0.9, "best validation " + fmt(val));
    check.expect(test >= 0.8, "test accuracy " + fmt(test));
    check.expect(elapsed < 300.0, "runtime " + fmt(elapsed, 1) + " s");
    check.detail << (check.ok ? "" : "; ") << "oracle " << fmt(oracle_acc, 2) << ", GA validation " << fmt(val)
                 << ", test " << fmt(test) << " after " << result.trace.records.size() - 1 << " generations in "
                 << fmt(elapsed, 1) << " s";
    return check;
}

// --- 3 ---------------------------------------------------------------------

Check criterion_3() {
    Check check;
    const auto bundle = fixture_bundle();
    ga::GaConfig config; // population 32, 8 alleles, 4-way tournament, crossover probability 1
    pf::Rng rng(3);
    auto pop = ga::init_population(bundle.train, bundle.label_set, config, rng);
    be::SimulatedBackend sim(3);
    pf::prompt::ValidationFitness fitness(sim, pf::prompt::PromptTemplate{}, bundle.validation);
    ga::evaluate(pop, [&](const ga::Candidate& c) { return fitness(c); });
    const auto before = pop.candidates.size();

    auto winners = ga::tournament_select(pop, config, rng);
    auto immigrants = ga::immigrate(sim, bundle.train, bundle.label_set, winners.size(), config, rng, pop.gene_pool);
    std::vector<ga::Candidate> offspring;
    for (std::size_t i = 0; i < winners.size(); ++i) {
        auto [a, b] = ga::pmx_crossover(winners[i], immigrants[i], rng);
        offspring.push_back(a);
        offspring.push_back(b);
    }
    const auto after = winners.size() + immigrants.size() + offspring.size();
    check.expect(before == 32, "start " + std::to_string(before));
    check.expect(winners.size() == 8, "winners " + std::to_string(winners.size()));
    check.expect(immigrants.size() == 8, "immigrants " + std::to_string(immigrants.size()));
    check.expect(offspring.size() == 16, "offspring " + std::to_string(offspring.size()));
    check.expect(after == 32, "restored " + std::to_string(after));

    // The same counters as recorded by a full run.
    ga::GaConfig one = config;
    one.generations = 1;
    be::SimulatedBackend sim2(3);
    auto run = ga::run(sim2, bundle, pf::prompt::PromptTemplate{}, one);
    const auto& c = run.trace.records.back().counts;
    check.expect(c.winners == 8 && c.immigrants == 8 && c.offspring == 16 && c.population == 32, "run counters");
    if (check.ok) check.detail << "tournament 32->8, immigration +8, crossover 8 pairs->16, population 32";
    return check;
}

// --- 4 ---------------------------------------------------------------------

double quadrature_p(double t, double df) {
    const double log_c = std::lgamma((df + 1) / 2) - std::lgamma(df / 2) - 0.5 * std::log(df * M_PI);
    auto pdf = [&](double x) { return std::exp(log_c - (df + 1) / 2 * std::log1p(x * x / df)); };
    const double hi = std::fabs(t);
    const int n = 200000;
    const double h = hi / n;
    double sum = pdf(0) + pdf(hi);
    for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * pdf(i * h);
    return 1.0 - 2.0 * sum * h / 3.0;
}

Check criterion_4() {
    Check check;
    pf::Rng rng(4);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> a(2 + rng.uniform_index(9));
        std::vector<double> b(2 + rng.uniform_index(9));
        const double shift = rng.uniform01() - 0.5;
        for (auto& v : a) v = rng.uniform01();
        for (auto& v : b) v = shift + (0.3 + rng.uniform01()) * rng.uniform01();
        auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
        auto var = [&](const std::vector<double>& v) {
            double s = 0;
            for (double x : v) s += (x - mean(v)) * (x - mean(v));
            return s / (v.size() - 1) / v.size();
        };
        const double va = var(a), vb = var(b);
        const double t = (mean(a) - mean(b)) / std::sqrt(va + vb);
        const double df = (va + vb) * (va + vb) / (va * va / (a.size() - 1) + vb * vb / (b.size() - 1));
        worst = std::max(worst, std::fabs(ev::two_sample_t_test(a, b).p - quadrature_p(t, df)));
    }
    check.expect(worst <= 1e-6, "max |dp| " + std::to_string(worst));

    struct Hand {
        std::vector<double> x;
        double mean, se;
    };
    const std::vector<Hand> hand{{{0.4, 0.6}, 0.5, 0.1},
                                 {{0.5, 0.5}, 0.5, 0.0},
                                 {{1, 2, 3, 4, 5}, 3.0, std::sqrt(0.5)},
                                 {{0.73, 0.73, 0.73, 0.73, 0.73}, 0.73, 0.0}};
    for (const auto& h : hand) {
        auto s = ev::summarize(h.x);
        check.expect(std::fabs(s.mean - h.mean) <= 1e-12 && std::fabs(s.standard_error - h.se) <= 1e-12, "summarize");
    }

    // Five values per side with the baseline and best-augmented mean and SE.
    auto shaped = [](double mean, double se) {
        const double z[] = {-1.2649110640673518, -0.6324555320336759, 0.0, 0.6324555320336759, 1.2649110640673518};
        std::vector<double> out;
        for (double v : z) out.push_back(mean + se * std::sqrt(5.0) * v);
        return out;
    };
    auto shaped_test = ev::two_sample_t_test(shaped(0.49, 0.028), shaped(0.67, 0.008));
    check.expect(shaped_test.p < 0.01 && shaped_test.t < 0, "baseline-vs-augmented p " + std::to_string(shaped_test.p));
    check.detail << (check.ok ? "" : "; ") << "max |dp| " << worst << " over 20 pairs, baseline-vs-augmented p "
                 << fmt(shaped_test.p, 6);
    return check;
}

// --- 5 ---------------------------------------------------------------------

Check criterion_5() {
    Check check;
    const auto bundle = fixture_bundle();
    double big_seconds = 0.0;
    for (std::size_t n : {0u, 10u, 100u, 1000u, 10000u}) {
        be::SimulatedBackend sim(5);
        const auto start = std::chrono::steady_clock::now();
        auto result = pf::augment::augment_training_set(sim, bundle.train, bundle.label_set, {.n_to_add = n, .seed = 5});
        const double elapsed = seconds_since(start);
        if (n == 10000) big_seconds = elapsed;
        const std::string tag = "n=" + std::to_string(n);
        check.expect(result.examples.size() == bundle.train.size() + n, tag + " size");
        check.expect(std::equal(bundle.train.begin(), bundle.train.end(), result.examples.begin()), tag + " prefix");
        pf::Examples added(result.examples.begin() + static_cast<std::ptrdiff_t>(bundle.train.size()),
                           result.examples.end());
        auto counts = pf::count_by_label(added, bundle.label_set);
        check.expect(counts[0] == n / 2 && counts[1] == n / 2, tag + " balance");
        std::set<std::string> texts;
        std::size_t dups = 0;
        for (const auto& e : result.examples) dups += texts.insert(e.text()).second ? 0 : 1;
        check.expect(dups == result.dedup_exhausted, tag + " dedup accounting");
        check.expect(dups == 0, tag + " duplicates " + std::to_string(dups));
    }
    check.expect(big_seconds < 60.0, "n=10000 took " + fmt(big_seconds, 1) + " s");
    if (check.ok) check.detail << "sizes 26+n, balanced, duplicate-free; n=10000 in " << fmt(big_seconds, 2) << " s";
    return check;
}

// --- 6 ---------------------------------------------------------------------

Check criterion_6() {
    Check check;
    auto a = cand({"a", "b"});
    auto b = cand({"c", "d"});
    auto names = [](const ga::Candidate& c) { return c[0].text() + c[1].text(); };
    const std::size_t p0[] = {0};
    const std::size_t p1[] = {1};
    auto [x0, y0] = ga::swap_positions(a, b, p0);
    auto [x1, y1] = ga::swap_positions(a, b, p1);
    check.expect(names(x0) == "cb" && names(y0) == "ad", "swap at 0");
    check.expect(names(x1) == "ad" && names(y1) == "cb", "swap at 1");
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        pf::Rng rng(seed);
        auto [u, v] = ga::pmx_crossover(a, b, rng);
        const bool row0 = names(u) == "cb" && names(v) == "ad";
        const bool row1 = names(u) == "ad" && names(v) == "cb";
        check.expect(row0 || row1, "pmx outside the swap table");
    }

    const auto bundle = fixture_bundle();
    ga::GenePool pool(bundle.train);
    ga::GaConfig config;
    pf::Rng rng(6);
    auto init = ga::init_population(bundle.train, bundle.label_set, config, rng);
    const auto& candidate = init.candidates.front();
    std::size_t replaced = 0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        auto m = ga::mutate(candidate, pool, config, rng);
        for (std::size_t i = 0; i < m.size(); ++i) replaced += m[i].text() != candidate[i].text() ? 1 : 0;
    }
    const double mean = static_cast<double>(replaced) / trials;
    check.expect(mean >= 0.75 && mean <= 0.85, "mean replacements " + fmt(mean));
    check.detail << (check.ok ? "" : "; ") << "swap table matched, mean replacements " << fmt(mean);
    return check;
}

// --- 7 ---------------------------------------------------------------------

Check criterion_7() {
    Check check;
    const double three = ga::diversity(std::vector<ga::Candidate>{cand({"a", "b"}), cand({"a", "c"}), cand({"b", "c"})});
    const double same = ga::diversity(std::vector<ga::Candidate>{cand({"a", "b"}), cand({"b", "a"}), cand({"a", "b"})});
    const double disjoint =
        ga::diversity(std::vector<ga::Candidate>{cand({"a", "b"}), cand({"c", "d"}), cand({"e", "f"})});
    check.expect(three == 0.5, "3-candidate case " + fmt(three, 17));
    check.expect(same == 0.0, "identical " + fmt(same, 17));
    check.expect(disjoint == 1.0, "disjoint " + fmt(disjoint, 17));
    if (check.ok) check.detail << "0.5 / 0.0 / 1.0 exactly";
    return check;
}

// --- 8 ---------------------------------------------------------------------

int run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "promptforge");
    std::ostringstream out;
    std::ostringstream err;
    return pf::cli::parse_and_dispatch(args, out, err);
}

std::vector<std::pair<std::string, std::string>> outputs_of(const fs::path& root) {
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file() || entry.path().filename() == "manifest.json") continue;
        files.emplace_back(fs::relative(entry.path(), root).string(), pf::testing::read_file(entry.path()));
    }
    std::sort(files.begin(), files.end());
    return files;
}

Check criterion_8() {
    Check check;
    const auto base = pf::testing::scratch_dir("acceptance_cli");
    const auto fx = [](const char* f) { return (pf::testing::fixture_dir() / f).string(); };
    {
        std::ofstream(base / "grid.txt") << "temperatures = 0, 0.5\nmax_examples = 5, 10\nn_added = 0, 10, 100\nrepeats = 2\n";
    }
    for (const char* name : {"first", "second"}) {
        const auto root = base / name;
        const auto p = [&](const char* rel) { return (root / rel).string(); };
        check.expect(run_cli({"split", "--pool", fx("pool.jsonl"), "--out", p("bundle"), "--seed", "2021"}) == 0, "split");
        check.expect(run_cli({"augment", "--train", p("bundle/train.jsonl"), "--n", "100", "--seed", "7", "--out",
                              p("augment/train_aug.jsonl")}) == 0,
                     "augment");
        check.expect(run_cli({"classify", "search", "--model", p("augment/train_aug.jsonl"), "--input",
                              p("bundle/test.jsonl"), "--temperature", "0.5", "--seed", "7", "--out",
                              p("search/predictions.csv")}) == 0,
                     "classify search");
        check.expect(run_cli({"optimize", "--backend", "simulated", "--seed", "7", "--generations", "5", "--trials", "2",
                              "--train", p("bundle/train.jsonl"), "--validation", p("bundle/validation.jsonl"), "--test",
                              p("bundle/test.jsonl"), "--out", p("ga")}) == 0,
                     "optimize");
        check.expect(run_cli({"classify", "prompt", "--candidate", p("ga/best_candidate.trial0.jsonl"), "--input",
                              p("bundle/test.jsonl"), "--out", p("prompt/predictions.csv")}) == 0,
                     "classify prompt");
        check.expect(run_cli({"gridsearch", "--bundle", p("bundle"), "--config", (base / "grid.txt").string(), "--seed",
                              "7", "--out", p("grid")}) == 0,
                     "gridsearch");
        check.expect(run_cli({"report", "--in", p("grid"), "--ga", p("ga"), "--out", p("report/table.md")}) == 0, "report");
    }
    auto first = outputs_of(base / "first");
    auto second = outputs_of(base / "second");
    check.expect(first.size() == second.size(), "different file sets");
    std::size_t identical = 0;
    for (std::size_t i = 0; i < std::min(first.size(), second.size()); ++i) {
        if (first[i] == second[i]) ++identical;
        else check.expect(false, first[i].first + " differs");
    }
    if (check.ok) check.detail << identical << " output files byte-identical across two runs";
    return check;
}

// --- 9 ---------------------------------------------------------------------

Check criterion_9() {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    const ev::GridSpec grid;
    const auto cells = ev::enumerate_cells(grid);
    std::size_t expected = 0;
    for (auto n : grid.n_added_values) expected += grid.temperatures.size() * (n > 100 ? 6 : 5);
    check.expect(expected == 81, "arithmetic");
    check.expect(cells.size() == expected, "cells " + std::to_string(cells.size()));

    const auto bundle = fixture_bundle();
    be::SimulatedBackend sim(9);
    auto report = ev::run_grid(sim, bundle, grid, 9);
    check.expect(report.cells.size() == expected, "report cells " + std::to_string(report.cells.size()));
    for (const auto& c : report.cells) check.expect(c.accuracies.size() == grid.repeats, "repeats per cell");
    check.expect(report.plot_series.size() == 2 * grid.n_added_values.size(),
                 "plot rows " + std::to_string(report.plot_series.size()));
    std::set<std::pair<std::size_t, std::string>> keys;
    for (const auto& row : report.plot_series) keys.insert({row.n_added, row.split});
    check.expect(keys.size() == report.plot_series.size(), "duplicate (n_added, split) rows");
    std::ostringstream csv;
    ev::write_plot_csv(report, csv);
    const auto text = csv.str();
    check.expect(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) == 1 + report.plot_series.size(),
                 "csv rows");
    const auto table = ev::to_csv(report);
    check.expect(static_cast<std::size_t>(std::count(table.begin(), table.end(), '\n')) ==
                     1 + grid.n_added_values.size(),
                 "per-n_added table rows");
    if (check.ok) {
        check.detail << cells.size() << " cells x " << grid.repeats << " repeats, " << report.plot_series.size()
                     << " (n_added, split) rows, " << grid.n_added_values.size() << " table rows, full grid in " << fmt(seconds_since(start), 1) << " s";
    }
    return check;
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Check()>>> criteria{
        {"GA invariant suite", criterion_1},
        {"GA efficacy oracle", criterion_2},
        {"population arithmetic", criterion_3},
        {"statistics oracle", criterion_4},
        {"augmentation contract", criterion_5},
        {"crossover/mutation micro-oracles", criterion_6},
        {"diversity metric", criterion_7},
        {"CLI determinism", criterion_8},
        {"grid-search protocol shape", criterion_9},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check result;
        try {
            result = criteria[i].second();
        } catch (const std::exception& e) {
            result.ok = false;
            result.detail << "exception: " << e.what();
        }
        failures += result.ok ? 0 : 1;
        std::cout << (result.ok ? "PASS" : "FAIL") << "  criterion " << i + 1 << " (" << criteria[i].first
                  << "): " << result.detail.str() << std::endl;
    }
    std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
