#include "promptforge/eval/experiment.hpp"

#include "promptforge/core/errors.hpp"
#include "promptforge/search/search_classifier.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace promptforge::eval {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format(double value, int precision) {
    if (std::isnan(value)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, value);
    return buf;
}

std::uint64_t stream_id(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix64(a ^ mix64(b ^ mix64(c + 0x51ed270b27e1f5a3ULL)));
}

std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find(',', start);
        if (end == std::string_view::npos) end = text.size();
        if (auto item = trim(text.substr(start, end - start)); !item.empty()) out.push_back(std::move(item));
        start = end + 1;
    }
    return out;
}

double parse_double(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("grid key '" + key + "': not a number: " + text);
    }
}

std::size_t parse_size(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        if (!text.empty() && text.front() == '-') throw std::invalid_argument(text);
        auto v = std::stoull(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw ConfigError("grid key '" + key + "': not a non-negative integer: " + text);
    }
}

template <typename T>
std::string join(const std::vector<T>& values) {
    std::ostringstream out;
    for (std::size_t i = 0; i < values.size(); ++i) out << (i ? ", " : "") << values[i];
    return out.str();
}

class SearchCellClassifier final : public CellClassifier {
  public:
    SearchCellClassifier(std::span<const LabeledExample> training, const LabelSet& labels)
        : index_(std::make_shared<const search::SearchIndex>(Examples(training.begin(), training.end()))),
          labels_(labels) {}

    Label predict(std::string_view query, double temperature, std::size_t max_examples, Rng& rng) override {
        auto& entry = cache_[std::string(query)];
        const std::size_t wanted = std::min(max_examples, index_->size());
        if (entry.size() < wanted) {
            entry = search::SearchClassifierModel(index_, wanted, 0.0, labels_).rank_neighbors(query);
        }
        auto neighbors = std::span(entry).first(wanted);
        return search::decide_label(neighbors, labels_, temperature, rng);
    }

  private:
    std::shared_ptr<const search::SearchIndex> index_;
    LabelSet labels_;
    std::unordered_map<std::string, std::vector<search::RankedNeighbor>> cache_;
};

double score(CellClassifier& classifier, std::span<const LabeledExample> eval_set, const CellConfig& cell, Rng& rng) {
    std::size_t correct = 0;
    for (const auto& e : eval_set) {
        if (classifier.predict(e.text(), cell.temperature, cell.max_examples, rng) == e.label()) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(eval_set.size());
}

std::optional<double> p_value(const CellResult& baseline, const CellResult& other, TTestKind kind) {
    if (!baseline.valid || !other.valid) return std::nullopt;
    return two_sample_t_test(baseline.accuracies, other.accuracies, kind).p;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

double number_or_nan(const json& v) { return v.is_number() ? v.get<double>() : kNaN; }

json cell_to_json(const CellResult& c) {
    return {
        {"n_added", c.config.n_added},
        {"temperature", c.config.temperature},
        {"max_examples", c.config.max_examples},
        {"accuracies", c.accuracies},
        {"mean", c.mean},
        {"standard_error", c.standard_error},
        {"p_value_vs_baseline", optional_number(c.p_value_vs_baseline)},
        {"valid", c.valid},
    };
}

CellResult cell_from_json(const json& j) {
    CellResult c;
    c.config = {j.at("n_added").get<std::size_t>(), j.at("temperature").get<double>(),
                j.at("max_examples").get<std::size_t>()};
    c.accuracies = j.at("accuracies").get<std::vector<double>>();
    c.mean = number_or_nan(j.at("mean"));
    c.standard_error = number_or_nan(j.at("standard_error"));
    if (const auto& p = j.at("p_value_vs_baseline"); p.is_number()) c.p_value_vs_baseline = p.get<double>();
    c.valid = j.at("valid").get<bool>();
    return c;
}

} // namespace

void GridSpec::validate() const {
    if (temperatures.empty() || max_examples_values.empty() || n_added_values.empty()) {
        throw ConfigError("grid lists must be non-empty");
    }
    if (repeats < 2) throw ConfigError("grid needs at least 2 repeats for standard errors");
    if (!(pool_factor >= 1.0)) throw ConfigError("pool_factor must be at least 1");
    for (double t : temperatures) {
        if (!(t >= 0.0)) throw ConfigError("temperatures must be non-negative");
    }
    for (auto k : max_examples_values) {
        if (k == 0) throw ConfigError("max_examples values must be positive");
    }
    if (large_max_examples && *large_max_examples == 0) throw ConfigError("large_max_examples must be positive");
}

std::vector<std::size_t> GridSpec::max_examples_for(std::size_t n_added) const {
    auto values = max_examples_values;
    if (large_max_examples && n_added > large_threshold &&
        std::find(values.begin(), values.end(), *large_max_examples) == values.end()) {
        values.push_back(*large_max_examples);
    }
    return values;
}

GridSpec parse_grid_spec(std::istream& in) {
    GridSpec grid;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        if (trim(line).empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("grid line " + std::to_string(line_no) + ": expected key = value");
        auto key = trim(std::string_view(line).substr(0, eq));
        auto value = trim(std::string_view(line).substr(eq + 1));
        auto items = split_list(value);

        if (key == "temperatures") {
            grid.temperatures.clear();
            for (const auto& v : items) grid.temperatures.push_back(parse_double(key, v));
        } else if (key == "max_examples") {
            grid.max_examples_values.clear();
            for (const auto& v : items) grid.max_examples_values.push_back(parse_size(key, v));
        } else if (key == "large_max_examples") {
            grid.large_max_examples =
                value == "none" ? std::nullopt : std::optional<std::size_t>(parse_size(key, value));
        } else if (key == "large_threshold") {
            grid.large_threshold = parse_size(key, value);
        } else if (key == "n_added") {
            grid.n_added_values.clear();
            for (const auto& v : items) grid.n_added_values.push_back(parse_size(key, v));
        } else if (key == "repeats") {
            grid.repeats = parse_size(key, value);
        } else if (key == "pool_factor") {
            grid.pool_factor = parse_double(key, value);
        } else if (key == "t_test") {
            if (value == "welch") {
                grid.t_test = TTestKind::Welch;
            } else if (value == "pooled") {
                grid.t_test = TTestKind::Pooled;
            } else {
                throw ConfigError("grid key 't_test' must be welch or pooled");
            }
        } else {
            throw ConfigError("unknown grid key '" + key + "'");
        }
    }
    grid.validate();
    return grid;
}

GridSpec load_grid_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open grid config " + path.string());
    return parse_grid_spec(in);
}

std::string to_text(const GridSpec& grid) {
    std::ostringstream out;
    out << "temperatures = " << join(grid.temperatures) << '\n';
    out << "max_examples = " << join(grid.max_examples_values) << '\n';
    out << "large_max_examples = "
        << (grid.large_max_examples ? std::to_string(*grid.large_max_examples) : std::string("none")) << '\n';
    out << "large_threshold = " << grid.large_threshold << '\n';
    out << "n_added = " << join(grid.n_added_values) << '\n';
    out << "repeats = " << grid.repeats << '\n';
    out << "pool_factor = " << grid.pool_factor << '\n';
    out << "t_test = " << (grid.t_test == TTestKind::Pooled ? "pooled" : "welch") << '\n';
    return out.str();
}

std::vector<CellConfig> enumerate_cells(const GridSpec& grid) {
    std::vector<CellConfig> cells;
    for (auto n : grid.n_added_values) {
        for (double t : grid.temperatures) {
            for (auto k : grid.max_examples_for(n)) cells.push_back({n, t, k});
        }
    }
    return cells;
}

CellResult make_cell(CellConfig config, std::vector<double> accuracies) {
    CellResult cell{config, std::move(accuracies), kNaN, kNaN, std::nullopt, false};
    if (cell.accuracies.size() >= 2) {
        auto s = summarize(cell.accuracies);
        cell.mean = s.mean;
        cell.standard_error = s.standard_error;
        cell.valid = true;
    }
    return cell;
}

ClassifierFactory search_classifier_factory() {
    return [](std::span<const LabeledExample> training, const LabelSet& labels) -> std::unique_ptr<CellClassifier> {
        return std::make_unique<SearchCellClassifier>(training, labels);
    };
}

CellConfig select_best(std::span<const CellResult> cells) {
    const CellResult* best = nullptr;
    for (const auto& c : cells) {
        if (!c.valid) continue;
        if (!best || c.mean > best->mean || (c.mean == best->mean && c.config < best->config)) best = &c;
    }
    if (!best) throw Error("no valid grid cells");
    return best->config;
}

ExperimentReport run_grid(backend::CompletionBackend& backend, const DatasetBundle& bundle, const GridSpec& grid,
                          std::uint64_t seed, const GridOptions& options) {
    grid.validate();
    if (bundle.validation.empty() || bundle.test.empty()) throw ConfigError("bundle needs validation and test splits");
    const auto& labels = bundle.label_set;
    const Rng root(seed);

    // Generated pool shared by every repeat.
    const std::size_t max_n = *std::max_element(grid.n_added_values.begin(), grid.n_added_values.end());
    std::vector<Examples> pool_by_label(labels.size());
    Examples pool;
    if (max_n > 0) {
        auto pool_size = static_cast<std::size_t>(std::ceil(static_cast<double>(max_n) * grid.pool_factor));
        pool_size = (pool_size + labels.size() - 1) / labels.size() * labels.size();
        augment::AugmentationSpec spec{.n_to_add = pool_size,
                                       .per_label = true,
                                       .seed = root.fork(0).seed(),
                                       .dedup = true,
                                       .generation = options.generation};
        auto augmented = augment::augment_training_set(backend, bundle.train, labels, spec);
        pool.assign(augmented.examples.begin() + static_cast<std::ptrdiff_t>(bundle.train.size()),
                    augmented.examples.end());
        for (const auto& e : pool) pool_by_label[*labels.index_of(e.label())].push_back(e);
    }

    auto sample = [&](std::size_t n, Rng& rng) {
        auto draw = [&](const Examples& from, std::size_t k, Examples& out) {
            if (k > from.size()) throw DataError("generated pool is too small for n_added " + std::to_string(n));
            std::vector<std::size_t> idx(from.size());
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            for (std::size_t i = 0; i < k; ++i) {
                std::swap(idx[i], idx[i + rng.uniform_index(idx.size() - i)]);
                out.push_back(from[idx[i]]);
            }
        };
        Examples out;
        if (n % labels.size() == 0) {
            for (const auto& bucket : pool_by_label) draw(bucket, n / labels.size(), out);
        } else {
            draw(pool, n, out);
        }
        return out;
    };

    ExperimentReport report;
    std::optional<std::size_t> baseline_row;
    std::vector<CellResult> baseline_cells;

    for (auto n : grid.n_added_values) {
        std::vector<CellConfig> cells;
        for (double t : grid.temperatures) {
            for (auto k : grid.max_examples_for(n)) cells.push_back({n, t, k});
        }

        std::vector<std::vector<double>> accuracies(cells.size());
        std::vector<std::unique_ptr<CellClassifier>> classifiers(grid.repeats);
        for (std::size_t r = 0; r < grid.repeats; ++r) {
            try {
                Rng sample_rng = root.fork(stream_id(1, n, r));
                Examples training(bundle.train.begin(), bundle.train.end());
                auto added = sample(n, sample_rng);
                training.insert(training.end(), added.begin(), added.end());
                auto classifier = options.classifier(training, labels);

                std::vector<double> repeat_acc(cells.size());
                for (std::size_t ci = 0; ci < cells.size(); ++ci) {
                    Rng rng = root.fork(stream_id(2, n, r * cells.size() + ci));
                    repeat_acc[ci] = score(*classifier, bundle.validation, cells[ci], rng);
                }
                for (std::size_t ci = 0; ci < cells.size(); ++ci) accuracies[ci].push_back(repeat_acc[ci]);
                classifiers[r] = std::move(classifier);
            } catch (const Error&) {
                ++report.failed_repeats;
            }
        }

        std::vector<CellResult> results;
        for (std::size_t ci = 0; ci < cells.size(); ++ci) results.push_back(make_cell(cells[ci], accuracies[ci]));
        if (n == 0) baseline_cells = results;
        for (auto& c : results) {
            if (n == 0) continue;
            auto base = std::find_if(baseline_cells.begin(), baseline_cells.end(), [&](const CellResult& b) {
                return b.config.temperature == c.config.temperature && b.config.max_examples == c.config.max_examples;
            });
            if (base != baseline_cells.end()) c.p_value_vs_baseline = p_value(*base, c, grid.t_test);
        }
        report.cells.insert(report.cells.end(), results.begin(), results.end());

        if (std::none_of(results.begin(), results.end(), [](const CellResult& c) { return c.valid; })) continue;
        const CellConfig best = select_best(results);
        auto best_cell = *std::find_if(results.begin(), results.end(),
                                       [&](const CellResult& c) { return c.config == best; });

        std::vector<double> test_acc;
        for (std::size_t r = 0; r < grid.repeats; ++r) {
            if (!classifiers[r]) continue;
            Rng rng = root.fork(stream_id(3, n, r));
            test_acc.push_back(score(*classifiers[r], bundle.test, best, rng));
        }
        auto test_cell = make_cell(best, std::move(test_acc));

        if (n == 0) {
            baseline_row = report.validation_best.size();
        } else if (baseline_row) {
            best_cell.p_value_vs_baseline = p_value(report.validation_best[*baseline_row], best_cell, grid.t_test);
            test_cell.p_value_vs_baseline = p_value(report.test_best[*baseline_row], test_cell, grid.t_test);
        }
        report.validation_best.push_back(std::move(best_cell));
        report.test_best.push_back(std::move(test_cell));
    }

    if (report.validation_best.empty()) throw Error("grid search produced no valid cells");
    report.best_validation_config = select_best(report.validation_best);
    for (std::size_t i = 0; i < report.validation_best.size(); ++i) {
        if (report.validation_best[i].config == report.best_validation_config) report.test_results = report.test_best[i];
        const auto& v = report.validation_best[i];
        const auto& t = report.test_best[i];
        report.plot_series.push_back({v.config.n_added, "validation", v.mean, v.standard_error, v.p_value_vs_baseline});
        report.plot_series.push_back({t.config.n_added, "test", t.mean, t.standard_error, t.p_value_vs_baseline});
    }
    return report;
}

void write_plot_csv(const ExperimentReport& report, std::ostream& out) {
    out << "n_added,split,mean,se\n";
    for (const auto& row : report.plot_series) {
        out << row.n_added << ',' << row.split << ',' << format(row.mean, 6) << ',' << format(row.standard_error, 6)
            << '\n';
    }
}

void emit_plot_data(const ExperimentReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    write_plot_csv(report, out);
    if (!out) throw Error("write failed: " + path.string());
}

void write_ga_plot_csv(std::span<const ga::GaTrace> trials, std::ostream& out) {
    out << "generation,trial,best_fitness,mean_fitness,diversity,best_fitness_se,mean_fitness_se,diversity_se\n";
    for (std::size_t t = 0; t < trials.size(); ++t) {
        for (const auto& r : trials[t].records) {
            out << r.generation << ',' << t << ',' << format(r.best_fitness, 6) << ',' << format(r.mean_fitness, 6)
                << ',' << format(r.diversity, 6) << ",,,\n";
        }
    }
    if (trials.empty()) return;

    std::size_t generations = std::numeric_limits<std::size_t>::max();
    for (const auto& trial : trials) generations = std::min(generations, trial.records.size());
    for (std::size_t g = 0; g < generations; ++g) {
        std::vector<double> best, mean, div;
        for (const auto& trial : trials) {
            best.push_back(trial.records[g].best_fitness);
            mean.push_back(trial.records[g].mean_fitness);
            div.push_back(trial.records[g].diversity);
        }
        auto avg = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
        auto se = [](const std::vector<double>& v) {
            return v.size() >= 2 ? format(summarize(v).standard_error, 6) : std::string();
        };
        out << trials.front().records[g].generation << ",mean," << format(avg(best), 6) << ',' << format(avg(mean), 6)
            << ',' << format(avg(div), 6) << ',' << se(best) << ',' << se(mean) << ',' << se(div) << '\n';
    }
}

void emit_plot_data(std::span<const ga::GaTrace> trials, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    write_ga_plot_csv(trials, out);
    if (!out) throw Error("write failed: " + path.string());
}

ComparisonTable compare_endpoints(std::span<const GaTrialSummary> ga_results, const ExperimentReport& grid_report) {
    auto aggregate = [&](auto member) -> std::optional<MetricCell> {
        if (ga_results.empty()) return std::nullopt;
        std::vector<double> values;
        for (const auto& r : ga_results) {
            if (!std::isnan(r.*member)) values.push_back(r.*member);
        }
        if (values.empty()) return std::nullopt;
        if (values.size() == 1) return MetricCell{values.front(), std::nullopt};
        auto s = summarize(values);
        return MetricCell{s.mean, s.standard_error};
    };

    std::optional<MetricCell> grid_val;
    std::optional<MetricCell> grid_test;
    for (const auto& c : grid_report.validation_best) {
        if (c.valid && (!grid_val || c.mean > grid_val->mean)) grid_val = MetricCell{c.mean, std::nullopt};
    }
    for (const auto& c : grid_report.test_best) {
        if (c.valid && (!grid_test || c.mean > grid_test->mean)) grid_test = MetricCell{c.mean, c.standard_error};
    }

    return ComparisonTable{{
        {"Best Validation Acc.", aggregate(&GaTrialSummary::best_validation), grid_val},
        {"Best Test Acc.", aggregate(&GaTrialSummary::test_accuracy), grid_test},
        {"Proportion of Differing Alleles", aggregate(&GaTrialSummary::final_diversity), std::nullopt},
    }};
}

namespace {
std::string render(const std::optional<MetricCell>& cell) {
    if (!cell) return "-";
    auto text = format(cell->mean, 2);
    if (cell->standard_error) text += " (± " + format(*cell->standard_error, 3) + ")";
    return text;
}

std::string csv_field(const std::optional<double>& v, int precision) { return v ? format(*v, precision) : ""; }
} // namespace

std::string to_markdown(const ComparisonTable& table) {
    std::ostringstream out;
    out << "| Mean Metric | Completion | Classification |\n|---|---|---|\n";
    for (const auto& row : table.rows) {
        out << "| " << row.metric << " | " << render(row.completion) << " | " << render(row.classification) << " |\n";
    }
    return out.str();
}

std::string to_csv(const ComparisonTable& table) {
    std::ostringstream out;
    out << "metric,completion_mean,completion_se,classification_mean,classification_se\n";
    for (const auto& row : table.rows) {
        auto mean = [](const std::optional<MetricCell>& c) {
            return c ? std::optional<double>(c->mean) : std::nullopt;
        };
        auto se = [](const std::optional<MetricCell>& c) { return c ? c->standard_error : std::nullopt; };
        out << row.metric << ',' << csv_field(mean(row.completion), 6) << ',' << csv_field(se(row.completion), 6)
            << ',' << csv_field(mean(row.classification), 6) << ',' << csv_field(se(row.classification), 6) << '\n';
    }
    return out.str();
}

std::string to_markdown(const ExperimentReport& report) {
    std::ostringstream out;
    out << "| n added | temperature | max_examples | validation mean | validation SE | validation p | test mean | "
           "test SE | test p |\n|---|---|---|---|---|---|---|---|---|\n";
    auto p = [](const std::optional<double>& v) { return v ? format(*v, 3) : std::string("-"); };
    for (std::size_t i = 0; i < report.validation_best.size(); ++i) {
        const auto& v = report.validation_best[i];
        const auto& t = report.test_best[i];
        out << "| " << v.config.n_added << " | " << format(v.config.temperature, 1) << " | " << v.config.max_examples
            << " | " << format(v.mean, 2) << " | ± " << format(v.standard_error, 3) << " | " << p(v.p_value_vs_baseline)
            << " | " << format(t.mean, 2) << " | ± " << format(t.standard_error, 3) << " | "
            << p(t.p_value_vs_baseline) << " |\n";
    }
    return out.str();
}

std::string to_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "n_added,temperature,max_examples,validation_mean,validation_se,validation_p,test_mean,test_se,test_p\n";
    for (std::size_t i = 0; i < report.validation_best.size(); ++i) {
        const auto& v = report.validation_best[i];
        const auto& t = report.test_best[i];
        out << v.config.n_added << ',' << v.config.temperature << ',' << v.config.max_examples << ','
            << format(v.mean, 6) << ',' << format(v.standard_error, 6) << ',' << csv_field(v.p_value_vs_baseline, 6)
            << ',' << format(t.mean, 6) << ',' << format(t.standard_error, 6) << ','
            << csv_field(t.p_value_vs_baseline, 6) << '\n';
    }
    return out.str();
}

std::string report_to_json(const ExperimentReport& report) {
    auto cells = [](const std::vector<CellResult>& v) {
        json arr = json::array();
        for (const auto& c : v) arr.push_back(cell_to_json(c));
        return arr;
    };
    json plot = json::array();
    for (const auto& row : report.plot_series) {
        plot.push_back({{"n_added", row.n_added},
                        {"split", row.split},
                        {"mean", row.mean},
                        {"standard_error", row.standard_error},
                        {"p_value", optional_number(row.p_value)}});
    }
    json doc = {
        {"cells", cells(report.cells)},
        {"validation_best", cells(report.validation_best)},
        {"test_best", cells(report.test_best)},
        {"best_validation_config",
         {{"n_added", report.best_validation_config.n_added},
          {"temperature", report.best_validation_config.temperature},
          {"max_examples", report.best_validation_config.max_examples}}},
        {"test_results", cell_to_json(report.test_results)},
        {"plot_series", std::move(plot)},
        {"failed_repeats", report.failed_repeats},
    };
    return doc.dump(2);
}

ExperimentReport report_from_json(std::string_view text) {
    try {
        auto doc = json::parse(text);
        ExperimentReport report;
        for (const auto& c : doc.at("cells")) report.cells.push_back(cell_from_json(c));
        for (const auto& c : doc.at("validation_best")) report.validation_best.push_back(cell_from_json(c));
        for (const auto& c : doc.at("test_best")) report.test_best.push_back(cell_from_json(c));
        const auto& best = doc.at("best_validation_config");
        report.best_validation_config = {best.at("n_added").get<std::size_t>(), best.at("temperature").get<double>(),
                                         best.at("max_examples").get<std::size_t>()};
        report.test_results = cell_from_json(doc.at("test_results"));
        for (const auto& row : doc.at("plot_series")) {
            PlotRow p{row.at("n_added").get<std::size_t>(), row.at("split").get<std::string>(),
                      number_or_nan(row.at("mean")), number_or_nan(row.at("standard_error")), std::nullopt};
            if (row.at("p_value").is_number()) p.p_value = row.at("p_value").get<double>();
            report.plot_series.push_back(std::move(p));
        }
        report.failed_repeats = doc.value("failed_repeats", std::size_t{0});
        return report;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed report: ") + e.what());
    }
}

std::string trial_summaries_to_json(std::span<const GaTrialSummary> trials) {
    json arr = json::array();
    for (const auto& t : trials) {
        arr.push_back({{"best_validation", t.best_validation},
                       {"test_accuracy", t.test_accuracy},
                       {"final_diversity", t.final_diversity}});
    }
    return json{{"trials", std::move(arr)}}.dump(2);
}

std::vector<GaTrialSummary> trial_summaries_from_json(std::string_view text) {
    try {
        std::vector<GaTrialSummary> out;
        const auto doc = json::parse(text);
        for (const auto& t : doc.at("trials")) {
            out.push_back({t.at("best_validation").get<double>(), number_or_nan(t.at("test_accuracy")),
                           t.at("final_diversity").get<double>()});
        }
        return out;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed trial summary: ") + e.what());
    }
}

} // namespace promptforge::eval
