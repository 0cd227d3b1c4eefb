#include "promptforge/backend/simulator.hpp"
#include "promptforge/core/errors.hpp"
#include "promptforge/core/jsonl.hpp"
#include "promptforge/eval/experiment.hpp"
#include "promptforge/eval/stats.hpp"

#include "synthetic.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

namespace pf = promptforge;
namespace ev = promptforge::eval;
namespace be = promptforge::backend;

namespace {

// Two-sided p by composite Simpson integration of the Student t density over [0, |t|].
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

struct Welch {
    double t, df;
};

Welch welch_by_hand(const std::vector<double>& a, const std::vector<double>& b) {
    auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
    auto var = [&](const std::vector<double>& v) {
        const double m = mean(v);
        double s = 0;
        for (double x : v) s += (x - m) * (x - m);
        return s / (v.size() - 1);
    };
    const double va = var(a) / a.size();
    const double vb = var(b) / b.size();
    return {(mean(a) - mean(b)) / std::sqrt(va + vb),
            (va + vb) * (va + vb) / (va * va / (a.size() - 1) + vb * vb / (b.size() - 1))};
}

pf::DatasetBundle fixture_bundle() {
    const auto dir = pf::testing::fixture_dir();
    const auto labels = pf::default_label_set();
    return {pf::load_jsonl(dir / "train.jsonl", labels), pf::load_jsonl(dir / "validation.jsonl", labels),
            pf::load_jsonl(dir / "test.jsonl", labels), labels};
}

ev::GridSpec small_grid() {
    ev::GridSpec grid;
    grid.temperatures = {0.0, 0.5};
    grid.max_examples_values = {5, 10};
    grid.n_added_values = {0, 10, 100};
    grid.repeats = 3;
    return grid;
}

} // namespace

TEST(Summarize, HandValues) {
    auto s = ev::summarize(std::vector<double>{0.5, 0.5});
    EXPECT_EQ(s.mean, 0.5);
    EXPECT_EQ(s.standard_error, 0.0);
    s = ev::summarize(std::vector<double>{0.73, 0.73, 0.73, 0.73, 0.73});
    EXPECT_NEAR(s.mean, 0.73, 1e-12);
    EXPECT_NEAR(s.standard_error, 0.0, 1e-12);
    s = ev::summarize(std::vector<double>{0.4, 0.6});
    EXPECT_NEAR(s.mean, 0.5, 1e-12);
    EXPECT_NEAR(s.standard_error, 0.1, 1e-12);
    EXPECT_THROW(ev::summarize(std::vector<double>{1.0}), pf::ConfigError);
}

TEST(Summarize, DuplicatingSampleFourTimes) {
    // SE(4n)/SE(n) = sqrt(4(n-1)/(4n-1)) / 2 exactly, which tends to 1/2.
    pf::Rng rng(1);
    for (std::size_t n : {5u, 50u, 2000u}) {
        std::vector<double> x(n);
        for (auto& v : x) v = rng.uniform01();
        std::vector<double> x4;
        for (int k = 0; k < 4; ++k) x4.insert(x4.end(), x.begin(), x.end());
        const double ratio = ev::summarize(x4).standard_error / ev::summarize(x).standard_error;
        const double nn = static_cast<double>(n);
        EXPECT_NEAR(ratio, std::sqrt(4 * (nn - 1) / (4 * nn - 1)) / 2, 1e-12);
        if (n >= 2000) {
            EXPECT_NEAR(ratio, 0.5, 1e-4);
        }
    }
}

TEST(TTest, ReferenceExample) {
    auto r = ev::two_sample_t_test(std::vector<double>{1, 2, 3, 4, 5}, std::vector<double>{2, 3, 4, 5, 6});
    EXPECT_NEAR(r.t, -1.0, 1e-12);
    EXPECT_NEAR(r.df, 8.0, 1e-12);
    EXPECT_NEAR(r.p, 0.34659350708733416, 1e-9);
}

TEST(TTest, DegenerateCases) {
    const std::vector<double> same{0.5, 0.5, 0.6};
    EXPECT_NEAR(ev::two_sample_t_test(same, same).p, 1.0, 1e-12);
    auto flat = ev::two_sample_t_test(std::vector<double>{0.7, 0.7}, std::vector<double>{0.7, 0.7, 0.7});
    EXPECT_EQ(flat.p, 1.0);
    auto apart = ev::two_sample_t_test(std::vector<double>{0.5, 0.5}, std::vector<double>{0.7, 0.7});
    EXPECT_EQ(apart.p, 0.0);
    EXPECT_TRUE(std::isinf(apart.t));
    EXPECT_THROW(ev::two_sample_t_test(std::vector<double>{1}, std::vector<double>{1, 2}), pf::ConfigError);
}

TEST(TTest, MatchesQuadratureOracle) {
    pf::Rng rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> a(2 + rng.uniform_index(9));
        std::vector<double> b(2 + rng.uniform_index(9));
        const double shift = rng.uniform01() * 2 - 1;
        const double spread = 0.2 + rng.uniform01() * 2;
        for (auto& v : a) v = rng.uniform01();
        for (auto& v : b) v = shift + spread * rng.uniform01();
        auto r = ev::two_sample_t_test(a, b);
        auto ref = welch_by_hand(a, b);
        EXPECT_NEAR(r.t, ref.t, 1e-10);
        EXPECT_NEAR(r.df, ref.df, 1e-10);
        EXPECT_NEAR(r.p, quadrature_p(ref.t, ref.df), 1e-6) << "trial " << trial;
    }
}

TEST(TTest, PooledVariant) {
    const std::vector<double> a{1, 2, 3, 4, 5, 6};
    const std::vector<double> b{2, 4, 6};
    auto r = ev::two_sample_t_test(a, b, ev::TTestKind::Pooled);
    EXPECT_EQ(r.df, 7.0);
    // sp^2 = (5*3.5 + 2*4) / 7 = 25.5/7; t = (3.5 - 4) / sqrt(sp^2 (1/6 + 1/3))
    const double t = -0.5 / std::sqrt(25.5 / 7 * 0.5);
    EXPECT_NEAR(r.t, t, 1e-12);
    EXPECT_NEAR(r.p, quadrature_p(t, 7.0), 1e-6);
}

TEST(IncompleteBeta, Identities) {
    for (double x : {0.0, 0.1, 0.37, 0.9, 1.0}) {
        EXPECT_NEAR(ev::regularized_incomplete_beta(1, 1, x), x, 1e-14);
        EXPECT_NEAR(ev::regularized_incomplete_beta(2, 3, x), 1 - ev::regularized_incomplete_beta(3, 2, 1 - x), 1e-13);
        EXPECT_NEAR(ev::regularized_incomplete_beta(1, 3, x), 1 - std::pow(1 - x, 3), 1e-13);
    }
    EXPECT_NEAR(ev::student_t_two_sided_p(0.0, 4), 1.0, 1e-14);
    // df = 1 is Cauchy: P(|T| >= 1) = 1/2.
    EXPECT_NEAR(ev::student_t_two_sided_p(1.0, 1), 0.5, 1e-12);
}

TEST(TTest, BaselineVersusBestAugmented) {
    // Samples with baseline and best-augmented means and SEs (n = 5): mean +- se * sqrt(5) * unit pattern.
    auto build = [](double mean, double se) {
        const std::vector<double> z{-1.2649110640673518, -0.6324555320336759, 0.0, 0.6324555320336759,
                                    1.2649110640673518};
        std::vector<double> out;
        for (double v : z) out.push_back(mean + se * std::sqrt(5.0) * v);
        return out;
    };
    auto base = build(0.49, 0.028);
    auto added = build(0.67, 0.008);
    EXPECT_NEAR(ev::summarize(base).standard_error, 0.028, 1e-12);
    auto r = ev::two_sample_t_test(base, added);
    EXPECT_LT(r.t, 0.0);
    EXPECT_LT(r.p, 0.01);
}

TEST(GridSpec, DefaultCellCount) {
    ev::GridSpec grid;
    EXPECT_NO_THROW(grid.validate());
    EXPECT_EQ(grid.max_examples_for(100).size(), 5u);
    EXPECT_EQ(grid.max_examples_for(1000).size(), 6u);
    EXPECT_EQ(ev::enumerate_cells(grid).size(), 3u * 5 * 3 + 3u * 6 * 2);
    auto cells = ev::enumerate_cells(grid);
    EXPECT_TRUE(std::is_sorted(cells.begin(), cells.end()));
}

TEST(GridSpec, ParseAndValidate) {
    std::istringstream in("# comment\ntemperatures = 0, 0.2\nmax_examples=3\nn_added = 0,4\nrepeats=2\n"
                          "large_max_examples = none\nt_test = pooled\n");
    auto grid = ev::parse_grid_spec(in);
    EXPECT_EQ(grid.temperatures, (std::vector<double>{0.0, 0.2}));
    EXPECT_EQ(grid.max_examples_values, (std::vector<std::size_t>{3}));
    EXPECT_FALSE(grid.large_max_examples.has_value());
    EXPECT_EQ(grid.t_test, ev::TTestKind::Pooled);
    std::istringstream round(ev::to_text(grid));
    auto again = ev::parse_grid_spec(round);
    EXPECT_EQ(again.n_added_values, grid.n_added_values);
    EXPECT_EQ(again.temperatures, grid.temperatures);

    std::istringstream unknown("flavor = vanilla\n");
    EXPECT_THROW(ev::parse_grid_spec(unknown), pf::ConfigError);
    std::istringstream bad_number("repeats = many\n");
    EXPECT_THROW(ev::parse_grid_spec(bad_number), pf::ConfigError);
    ev::GridSpec one_repeat;
    one_repeat.repeats = 1;
    EXPECT_THROW(one_repeat.validate(), pf::ConfigError);
}

TEST(SelectBest, TieBreaks) {
    std::vector<ev::CellResult> cells{ev::make_cell({10, 0.5, 5}, {0.8, 0.8}), ev::make_cell({10, 0.0, 10}, {0.8, 0.8}),
                                      ev::make_cell({0, 0.5, 5}, {0.8, 0.8}), ev::make_cell({100, 0.0, 5}, {0.7, 0.9}),
                                      ev::make_cell({0, 0.0, 5}, {0.9})};
    EXPECT_FALSE(cells.back().valid);
    EXPECT_EQ(ev::select_best(cells), (ev::CellConfig{0, 0.5, 5}));
    cells.push_back(ev::make_cell({1000, 0.1, 5}, {0.81, 0.81}));
    EXPECT_EQ(ev::select_best(cells), (ev::CellConfig{1000, 0.1, 5}));
}

TEST(RunGrid, DegenerateGridHasOneCell) {
    auto bundle = fixture_bundle();
    ev::GridSpec grid;
    grid.temperatures = {0.0};
    grid.max_examples_values = {5};
    grid.n_added_values = {0};
    grid.repeats = 2;
    be::SimulatedBackend sim(0);
    auto report = ev::run_grid(sim, bundle, grid, 1);
    ASSERT_EQ(report.cells.size(), 1u);
    EXPECT_EQ(report.cells[0].accuracies.size(), 2u);
    EXPECT_EQ(sim.call_count(), 0u);
    EXPECT_EQ(report.plot_series.size(), 2u);
}

TEST(RunGrid, ShapeAndDeterminism) {
    auto bundle = fixture_bundle();
    auto grid = small_grid();
    be::SimulatedBackend a(0);
    be::SimulatedBackend b(0);
    auto ra = ev::run_grid(a, bundle, grid, 5);
    auto rb = ev::run_grid(b, bundle, grid, 5);
    EXPECT_EQ(ev::report_to_json(ra), ev::report_to_json(rb));
    EXPECT_EQ(ra.cells.size(), 12u);
    ASSERT_EQ(ra.validation_best.size(), 3u);
    EXPECT_EQ(ra.plot_series.size(), 6u);
    EXPECT_FALSE(ra.validation_best[0].p_value_vs_baseline.has_value());
    for (std::size_t i = 1; i < 3; ++i) {
        ASSERT_TRUE(ra.validation_best[i].p_value_vs_baseline.has_value());
        EXPECT_GE(*ra.validation_best[i].p_value_vs_baseline, 0.0);
        EXPECT_LE(*ra.validation_best[i].p_value_vs_baseline, 1.0);
    }
    for (const auto& c : ra.cells) {
        EXPECT_EQ(c.accuracies.size(), 3u);
        auto s = ev::summarize(c.accuracies);
        EXPECT_EQ(c.mean, s.mean);
        EXPECT_EQ(c.standard_error, s.standard_error);
    }
    // Baseline repeats see the same training set, so temperature-0 accuracies agree.
    for (const auto& c : ra.cells) {
        if (c.config.n_added == 0 && c.config.temperature == 0.0) {
            EXPECT_EQ(c.standard_error, 0.0);
        }
    }
    EXPECT_EQ(ra.failed_repeats, 0u);
}

TEST(RunGrid, FailingClassifierIsCountedNotFatal) {
    auto bundle = fixture_bundle();
    auto grid = small_grid();
    int built = 0;
    ev::GridOptions options;
    auto inner = ev::search_classifier_factory();
    options.classifier = [&](std::span<const pf::LabeledExample> training, const pf::LabelSet& labels) {
        if (++built == 2) throw pf::Error("flaky");
        return inner(training, labels);
    };
    be::SimulatedBackend sim(0);
    auto report = ev::run_grid(sim, bundle, grid, 5, options);
    EXPECT_EQ(report.failed_repeats, 1u);
    EXPECT_EQ(report.cells[0].accuracies.size(), 2u);
}

TEST(Report, PlotCsvAndJsonRoundTrip) {
    auto bundle = fixture_bundle();
    be::SimulatedBackend sim(0);
    auto report = ev::run_grid(sim, bundle, small_grid(), 5);
    std::ostringstream csv;
    ev::write_plot_csv(report, csv);
    std::istringstream lines(csv.str());
    std::string line;
    std::getline(lines, line);
    EXPECT_EQ(line, "n_added,split,mean,se");
    std::size_t rows = 0;
    while (std::getline(lines, line)) ++rows;
    EXPECT_EQ(rows, 6u);

    auto back = ev::report_from_json(ev::report_to_json(report));
    EXPECT_EQ(ev::report_to_json(back), ev::report_to_json(report));
    EXPECT_EQ(ev::to_markdown(back), ev::to_markdown(report));
    EXPECT_THROW(ev::report_from_json("{\"cells\": 3}"), pf::DataError);
}

TEST(GaPlot, EmptyAndMultiTrial) {
    std::ostringstream empty;
    ev::write_ga_plot_csv({}, empty);
    EXPECT_EQ(empty.str(), "generation,trial,best_fitness,mean_fitness,diversity,best_fitness_se,mean_fitness_se,diversity_se\n");

    std::vector<promptforge::ga::GaTrace> trials(3);
    for (std::size_t k = 0; k < 3; ++k) {
        for (std::size_t g = 0; g < 2; ++g) {
            promptforge::ga::GenerationRecord r;
            r.generation = g;
            r.best_fitness = 0.5 + 0.1 * static_cast<double>(k);
            r.mean_fitness = 0.4;
            r.diversity = 0.9;
            trials[k].records.push_back(r);
        }
    }
    std::ostringstream out;
    ev::write_ga_plot_csv(trials, out);
    std::istringstream lines(out.str());
    std::string line;
    std::vector<std::string> all;
    while (std::getline(lines, line)) all.push_back(line);
    ASSERT_EQ(all.size(), 1u + 3 * 2 + 2);
    EXPECT_EQ(all[1], "0,0,0.500000,0.400000,0.900000,,,");
    // mean row: best 0.6 with SE of {0.5,0.6,0.7} = 0.1/sqrt(3); identical trials give SE 0.
    EXPECT_EQ(all[7], "0,mean,0.600000,0.400000,0.900000,0.057735,0.000000,0.000000");
}

TEST(Comparison, RowsAndSingleTrial) {
    ev::ExperimentReport grid;
    grid.validation_best = {ev::make_cell({0, 0, 5}, {0.49, 0.49}), ev::make_cell({1000, 0, 5}, {0.73, 0.73})};
    grid.test_best = {ev::make_cell({0, 0, 5}, {0.58, 0.58}), ev::make_cell({1000, 0, 5}, {0.76, 0.76})};
    std::vector<ev::GaTrialSummary> one{{0.85, 0.67, 0.4}};
    auto table = ev::compare_endpoints(one, grid);
    ASSERT_EQ(table.rows.size(), 3u);
    EXPECT_EQ(table.rows[0].metric, "Best Validation Acc.");
    EXPECT_EQ(table.rows[1].metric, "Best Test Acc.");
    EXPECT_EQ(table.rows[2].metric, "Proportion of Differing Alleles");
    EXPECT_FALSE(table.rows[0].completion->standard_error.has_value());
    EXPECT_NEAR(table.rows[0].classification->mean, 0.73, 1e-12);
    EXPECT_NEAR(table.rows[1].classification->mean, 0.76, 1e-12);
    EXPECT_FALSE(table.rows[2].classification.has_value());
    const auto md = ev::to_markdown(table);
    EXPECT_NE(md.find("| Best Validation Acc. | 0.85 | 0.73 |"), std::string::npos) << md;

    std::vector<ev::GaTrialSummary> same{{0.85, 0.67, 0.4}, {0.85, 0.67, 0.4}, {0.85, 0.67, 0.4}};
    auto t3 = ev::compare_endpoints(same, grid);
    EXPECT_EQ(t3.rows[0].completion->standard_error, 0.0);

    std::vector<ev::GaTrialSummary> no_test{{0.8, std::nan(""), 0.3}};
    auto back = ev::trial_summaries_from_json(ev::trial_summaries_to_json(no_test));
    ASSERT_EQ(back.size(), 1u);
    EXPECT_TRUE(std::isnan(back[0].test_accuracy));
    EXPECT_FALSE(ev::compare_endpoints(back, grid).rows[1].completion.has_value());
}
