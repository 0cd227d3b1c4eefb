#include "cli.hpp"

#include "manifest.hpp"

#include "promptforge/augment/augment.hpp"
#include "promptforge/backend/completion.hpp"
#include "promptforge/core/dataset.hpp"
#include "promptforge/core/errors.hpp"
#include "promptforge/core/jsonl.hpp"
#include "promptforge/eval/experiment.hpp"
#include "promptforge/ga/ga.hpp"
#include "promptforge/prompt/prompt_classifier.hpp"
#include "promptforge/search/search_classifier.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

namespace promptforge::cli {

namespace fs = std::filesystem;

namespace {

struct BackendOptions {
    std::string kind = "simulated";
    std::optional<std::uint64_t> seed;
    std::string engine = "ada";
    std::string generation_engine = "davinci";
    std::string endpoint;
    std::string api_key_env = "OPENAI_API_KEY";
    double rate_limit = 1.0;
    int max_retries = 3;
};

void add_backend_options(CLI::App* sub, BackendOptions& o) {
    sub->add_option("--backend", o.kind, "Completion backend")
        ->check(CLI::IsMember({"simulated", "remote"}))
        ->capture_default_str();
    sub->add_option("--backend-seed", o.seed, "Simulator seed (defaults to --seed)");
    sub->add_option("--engine", o.engine, "Model tag used for classification")->capture_default_str();
    sub->add_option("--generation-engine", o.generation_engine, "Model tag used to generate examples")
        ->capture_default_str();
    sub->add_option("--endpoint", o.endpoint, "Remote completion URL; {engine} is substituted");
    sub->add_option("--api-key-env", o.api_key_env, "Environment variable holding the API key")
        ->capture_default_str();
    sub->add_option("--rate-limit", o.rate_limit, "Remote requests per second")->capture_default_str();
    sub->add_option("--max-retries", o.max_retries, "Retries on transport errors and HTTP 429")
        ->capture_default_str();
}

backend::BackendConfig backend_config(const BackendOptions& o, const std::string& engine, std::uint64_t fallback_seed) {
    backend::BackendConfig config;
    config.kind = *backend::parse_backend_kind(o.kind);
    config.engine = engine;
    if (!o.endpoint.empty()) config.endpoint_url = o.endpoint;
    config.api_key_env = o.api_key_env;
    config.rate_limit = o.rate_limit;
    config.retry.max_retries = o.max_retries;
    config.seed = o.seed.value_or(fallback_seed);
    return config;
}

struct Backends {
    std::unique_ptr<backend::CompletionBackend> classifier;
    std::unique_ptr<backend::CompletionBackend> generator;

    [[nodiscard]] std::uint64_t calls() const {
        return (classifier ? classifier->call_count() : 0) + (generator ? generator->call_count() : 0);
    }
};

/// Book-keeping shared by every command: manifest fields and log output.
struct Run {
    std::ostream& out;
    std::ostream& err;
    RunManifest manifest;
    std::optional<fs::path> output_dir;
    Backends backends;

    void log(const std::string& line) const { err << "[promptforge] " << line << '\n'; }

    void input(const fs::path& path) { manifest.input_digests[path.string()] = sha256_file(path); }
    void output(const fs::path& path) { manifest.outputs.push_back(path.string()); }

    void use_backends(const BackendOptions& o, std::uint64_t seed, bool classify, bool generate) {
        if (classify) backends.classifier = backend::make_backend(backend_config(o, o.engine, seed));
        if (generate) backends.generator = backend::make_backend(backend_config(o, o.generation_engine, seed));
        manifest.backend_kind = o.kind;
        manifest.engine = classify ? o.engine : o.generation_engine;
        if (o.kind == "simulated") manifest.seeds["backend"] = o.seed.value_or(seed);
    }
};

fs::path parent_dir(const fs::path& file) {
    auto dir = file.parent_path();
    return dir.empty() ? fs::path(".") : dir;
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::ofstream open_output(const fs::path& path) {
    if (auto dir = path.parent_path(); !dir.empty()) fs::create_directories(dir);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    auto out = open_output(path);
    out << text;
    if (!out) throw Error("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct Prediction {
    const LabeledExample* example;
    Label predicted;
};

double write_predictions(const fs::path& path, const std::vector<Prediction>& predictions) {
    auto out = open_output(path);
    out << "text,true_label,predicted_label\n";
    std::size_t correct = 0;
    for (const auto& p : predictions) {
        out << csv_escape(p.example->text()) << ',' << csv_escape(p.example->label().name()) << ','
            << csv_escape(p.predicted.name()) << '\n';
        if (p.predicted == p.example->label()) ++correct;
    }
    if (!out) throw Error("write failed: " + path.string());
    return predictions.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(predictions.size());
}

// --- augment -------------------------------------------------------------

struct AugmentOptions {
    fs::path train;
    std::size_t n = 0;
    fs::path out;
    std::uint64_t seed = 0;
    std::string labels = "Data,Other";
    bool no_per_label = false;
    bool no_dedup = false;
    double temperature = 0.7;
    BackendOptions backend;
};

void run_augment(const AugmentOptions& o, Run& run) {
    run.output_dir = parent_dir(o.out);
    run.manifest.seeds["augment"] = o.seed;
    auto labels = LabelSet::parse(o.labels);
    run.input(o.train);
    auto train = load_jsonl(o.train, labels);
    run.use_backends(o.backend, o.seed, false, true);

    augment::AugmentationSpec spec{.n_to_add = o.n,
                                   .per_label = !o.no_per_label,
                                   .seed = o.seed,
                                   .dedup = !o.no_dedup,
                                   .generation = {.temperature = o.temperature}};
    auto result = augment::augment_training_set(*run.backends.generator, train, labels, spec);
    fs::create_directories(parent_dir(o.out));
    save_jsonl(result.examples, o.out);
    run.output(o.out);
    run.log("wrote " + std::to_string(result.examples.size()) + " examples (" + std::to_string(o.n) +
            " generated, " + std::to_string(result.dedup_exhausted) + " duplicates kept) to " + o.out.string());
}

// --- classify --------------------------------------------------------------

struct SearchOptions {
    fs::path model;
    std::size_t max_examples = 5;
    double temperature = 0.0;
    fs::path input;
    fs::path out;
    std::uint64_t seed = 0;
    std::string labels = "Data,Other";
};

void run_classify_search(const SearchOptions& o, Run& run) {
    run.output_dir = parent_dir(o.out);
    run.manifest.seeds["classify"] = o.seed;
    run.manifest.backend_kind = "none";
    auto labels = LabelSet::parse(o.labels);
    run.input(o.model);
    run.input(o.input);
    search::SearchClassifierModel model(load_jsonl(o.model, labels), o.max_examples, o.temperature, labels);
    auto queries = load_jsonl(o.input, labels);

    Rng rng(o.seed);
    std::vector<Prediction> predictions;
    for (const auto& q : queries) predictions.push_back({&q, model.classify(q.text(), rng)});
    double acc = write_predictions(o.out, predictions);
    run.output(o.out);
    run.out << "accuracy " << format_double(acc) << '\n';
}

struct PromptOptions {
    fs::path candidate;
    fs::path input;
    fs::path out;
    double temperature = 0.0;
    bool no_header = false;
    std::string header;
    std::uint64_t seed = 0;
    std::string labels = "Data,Other";
    BackendOptions backend;
};

void run_classify_prompt(const PromptOptions& o, Run& run) {
    if (!o.out.empty()) run.output_dir = parent_dir(o.out);
    auto labels = LabelSet::parse(o.labels);
    run.input(o.candidate);
    run.input(o.input);
    prompt::Candidate candidate(load_jsonl(o.candidate, labels));
    auto queries = load_jsonl(o.input, labels);
    run.use_backends(o.backend, o.seed, true, false);

    prompt::PromptTemplate tmpl{.labels = labels,
                                .use_header = !o.no_header,
                                .header = o.header.empty() ? prompt::default_header(labels) : o.header};
    std::vector<Prediction> predictions;
    std::size_t correct = 0;
    for (const auto& q : queries) {
        auto label = prompt::classify(*run.backends.classifier, tmpl, candidate, q.text(), {o.temperature});
        if (label == q.label()) ++correct;
        predictions.push_back({&q, std::move(label)});
    }
    if (!o.out.empty()) {
        write_predictions(o.out, predictions);
        run.output(o.out);
    }
    run.out << "accuracy " << format_double(static_cast<double>(correct) / static_cast<double>(queries.size()))
            << '\n';
}

// --- optimize --------------------------------------------------------------

struct OptimizeOptions {
    fs::path train;
    fs::path validation;
    fs::path test;
    fs::path trace;
    fs::path out;
    std::size_t generations = 40;
    std::size_t population = 32;
    std::size_t alleles = 8;
    std::size_t tournament_size = 4;
    double mutation_rate = 0.1;
    double crossover_probability = 1.0;
    bool no_mutate_immigrants = false;
    std::optional<double> fitness_target;
    std::optional<double> time_limit_s;
    std::optional<std::uint64_t> call_budget;
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    std::string labels = "Data,Other";
    bool no_header = false;
    BackendOptions backend;
};

fs::path trial_path(const fs::path& base, std::size_t trial, std::size_t trials) {
    if (trials == 1) return base;
    auto name = base.stem().string() + ".trial" + std::to_string(trial) + base.extension().string();
    return base.parent_path() / name;
}

void run_optimize(const OptimizeOptions& o, Run& run) {
    if (o.trials == 0) throw ConfigError("--trials must be positive");
    const fs::path out_dir = !o.out.empty() ? o.out : !o.trace.empty() ? parent_dir(o.trace) : fs::path(".");
    const fs::path trace_base = !o.trace.empty() ? o.trace : out_dir / "trace.jsonl";
    run.output_dir = out_dir;
    fs::create_directories(out_dir);

    auto labels = LabelSet::parse(o.labels);
    run.input(o.train);
    run.input(o.validation);
    DatasetBundle bundle{load_jsonl(o.train, labels), load_jsonl(o.validation, labels), {}, labels};
    if (!o.test.empty()) {
        run.input(o.test);
        bundle.test = load_jsonl(o.test, labels);
    }
    run.use_backends(o.backend, o.seed, true, true);

    ga::GaConfig config;
    config.population_size = o.population;
    config.n_alleles = o.alleles;
    config.tournament_size = o.tournament_size;
    config.crossover_probability = o.crossover_probability;
    config.mutation_rate = o.mutation_rate;
    config.generations = o.generations;
    config.seed = o.seed;
    config.mutate_immigrants = !o.no_mutate_immigrants;
    config.fitness_target = o.fitness_target;
    config.call_budget = o.call_budget;
    if (o.time_limit_s) {
        config.time_limit = std::chrono::milliseconds(static_cast<std::int64_t>(*o.time_limit_s * 1000.0));
    }
    prompt::PromptTemplate tmpl{.labels = labels, .use_header = !o.no_header, .header = prompt::default_header(labels)};

    std::vector<ga::GaTrace> traces;
    std::vector<eval::GaTrialSummary> summaries;
    for (std::size_t trial = 0; trial < o.trials; ++trial) {
        config.seed = o.seed + trial;
        run.manifest.seeds["ga_trial_" + std::to_string(trial)] = config.seed;
        const auto trace_path = trial_path(trace_base, trial, o.trials);
        ga::JsonlTraceWriter writer(trace_path);
        run.output(trace_path);

        auto result = ga::run(*run.backends.classifier, *run.backends.generator, bundle, tmpl, config, &writer);
        const auto best_path = trial_path(out_dir / "best_candidate.jsonl", trial, o.trials);
        save_jsonl(result.best.alleles(), best_path);
        run.output(best_path);

        eval::GaTrialSummary summary{*result.best.fitness(), std::nan(""), result.trace.records.back().diversity};
        if (!bundle.test.empty()) {
            summary.test_accuracy =
                prompt::accuracy(*run.backends.classifier, tmpl, result.best, bundle.test, config.classify);
        }
        run.log("trial " + std::to_string(trial) + ": best validation " + format_double(summary.best_validation) +
                ", test " +
                (std::isnan(summary.test_accuracy) ? std::string("n/a") : format_double(summary.test_accuracy)) + ", diversity " +
                format_double(summary.final_diversity) + ", stopped on " + std::string(ga::to_string(result.stop_reason)));
        summaries.push_back(summary);
        traces.push_back(std::move(result.trace));
    }

    write_text(out_dir / "summary.json", eval::trial_summaries_to_json(summaries));
    run.output(out_dir / "summary.json");
    eval::emit_plot_data(traces, out_dir / "ga_plot.csv");
    run.output(out_dir / "ga_plot.csv");
    run.out << "best validation " << format_double(summaries.front().best_validation) << '\n';
}

// --- gridsearch / report ---------------------------------------------------

struct GridOptions {
    fs::path bundle;
    fs::path config;
    fs::path out;
    std::optional<std::size_t> repeats;
    std::uint64_t seed = 0;
    std::string labels = "Data,Other";
    BackendOptions backend;
};

void run_gridsearch(const GridOptions& o, Run& run) {
    run.output_dir = o.out;
    fs::create_directories(o.out);
    run.manifest.seeds["grid"] = o.seed;
    auto labels = LabelSet::parse(o.labels);
    for (const char* name : {"train.jsonl", "validation.jsonl", "test.jsonl"}) run.input(o.bundle / name);
    auto bundle = load_bundle(o.bundle, labels);

    eval::GridSpec grid;
    if (!o.config.empty()) {
        run.input(o.config);
        grid = eval::load_grid_spec(o.config);
    }
    if (o.repeats) grid.repeats = *o.repeats;
    grid.validate();
    run.manifest.config_snapshot += "\n[grid]\n" + eval::to_text(grid);
    run.use_backends(o.backend, o.seed, false, true);

    auto report = eval::run_grid(*run.backends.generator, bundle, grid, o.seed);
    write_text(o.out / "report.json", eval::report_to_json(report));
    run.output(o.out / "report.json");
    write_text(o.out / "report.csv", eval::to_csv(report));
    run.output(o.out / "report.csv");
    eval::emit_plot_data(report, o.out / "plot.csv");
    run.output(o.out / "plot.csv");
    run.out << eval::to_markdown(report);
}

struct ReportOptions {
    fs::path in;
    std::string format = "markdown";
    fs::path ga;
    fs::path out;
};

void run_report(const ReportOptions& o, Run& run) {
    std::optional<eval::ExperimentReport> grid;
    if (fs::exists(o.in / "report.json")) grid = eval::report_from_json(read_text(o.in / "report.json"));

    std::optional<std::vector<eval::GaTrialSummary>> trials;
    const fs::path ga_dir = !o.ga.empty() ? o.ga : o.in;
    if (fs::exists(ga_dir / "summary.json")) trials = eval::trial_summaries_from_json(read_text(ga_dir / "summary.json"));
    if (!grid && !trials) throw DataError("no report.json or summary.json in " + o.in.string());

    const bool markdown = o.format == "markdown";
    std::string text;
    if (grid) text += markdown ? eval::to_markdown(*grid) : eval::to_csv(*grid);
    if (trials) {
        if (!text.empty()) text += "\n";
        auto table = eval::compare_endpoints(*trials, grid.value_or(eval::ExperimentReport{}));
        text += markdown ? eval::to_markdown(table) : eval::to_csv(table);
    }
    if (o.out.empty()) {
        run.out << text;
    } else {
        run.output_dir = parent_dir(o.out);
        write_text(o.out, text);
        run.output(o.out);
    }
}

// --- split -----------------------------------------------------------------

struct SplitOptions {
    fs::path pool;
    fs::path out;
    std::vector<std::size_t> sizes{26, 26, 20};
    std::uint64_t seed = 0;
    std::string labels = "Data,Other";
};

void run_split(const SplitOptions& o, Run& run) {
    if (o.sizes.size() != 3) throw ConfigError("--sizes takes train,validation,test");
    run.output_dir = o.out;
    run.manifest.seeds["split"] = o.seed;
    run.manifest.backend_kind = "none";
    auto labels = LabelSet::parse(o.labels);
    run.input(o.pool);
    auto pool = load_jsonl(o.pool, labels);
    auto bundle = make_splits(pool, {o.sizes[0], o.sizes[1], o.sizes[2]}, o.seed, labels);
    save_bundle(bundle, o.out);
    for (const char* name : {"train.jsonl", "validation.jsonl", "test.jsonl"}) run.output(o.out / name);
}

} // namespace

int parse_and_dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"promptforge: few-shot text classification augmentation and in-context example optimization",
                 "promptforge"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);
    app.set_config("--settings", "", "INI/TOML file with option defaults, one [section] per command");

    std::function<void(Run&)> action;
    CLI::App* active = nullptr;
    auto bind = [&](CLI::App* sub, auto& options, auto runner) {
        sub->callback([&action, &active, sub, &options, runner] {
            active = sub;
            action = [&options, runner](Run& run) { runner(options, run); };
        });
    };

    AugmentOptions augment_opts;
    auto* augment_cmd = app.add_subcommand("augment", "Append generated examples to a training file");
    augment_cmd->add_option("--train", augment_opts.train, "Training JSONL")->required()->check(CLI::ExistingFile);
    augment_cmd->add_option("--n", augment_opts.n, "Number of examples to generate")->required();
    augment_cmd->add_option("--out", augment_opts.out, "Output JSONL")->required();
    augment_cmd->add_option("--seed", augment_opts.seed, "Sampling seed")->capture_default_str();
    augment_cmd->add_option("--labels", augment_opts.labels, "Comma-separated label set")->capture_default_str();
    augment_cmd->add_flag("--no-per-label", augment_opts.no_per_label, "Draw labels at random instead of balancing");
    augment_cmd->add_flag("--no-dedup", augment_opts.no_dedup, "Keep generated duplicates");
    augment_cmd->add_option("--temperature", augment_opts.temperature, "Generation temperature")
        ->capture_default_str();
    add_backend_options(augment_cmd, augment_opts.backend);
    bind(augment_cmd, augment_opts, run_augment);

    auto* classify_cmd = app.add_subcommand("classify", "Classify a labeled JSONL file");
    classify_cmd->require_subcommand(1);

    SearchOptions search_opts;
    auto* search_cmd = classify_cmd->add_subcommand("search", "Similarity search over a training file");
    search_cmd->add_option("--model", search_opts.model, "Training JSONL searched for neighbors")
        ->required()
        ->check(CLI::ExistingFile);
    search_cmd->add_option("--max-examples", search_opts.max_examples, "Neighbors consulted")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    search_cmd->add_option("--temperature", search_opts.temperature, "Label sampling temperature")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    search_cmd->add_option("--input", search_opts.input, "Queries (JSONL)")->required()->check(CLI::ExistingFile);
    search_cmd->add_option("--out", search_opts.out, "Predictions CSV")->required();
    search_cmd->add_option("--seed", search_opts.seed, "Sampling seed")->capture_default_str();
    search_cmd->add_option("--labels", search_opts.labels, "Comma-separated label set")->capture_default_str();
    bind(search_cmd, search_opts, run_classify_search);

    PromptOptions prompt_opts;
    auto* prompt_cmd = classify_cmd->add_subcommand("prompt", "Few-shot prompt with restricted decoding");
    prompt_cmd->add_option("--candidate", prompt_opts.candidate, "In-context examples (JSONL)")
        ->required()
        ->check(CLI::ExistingFile);
    prompt_cmd->add_option("--input", prompt_opts.input, "Queries (JSONL)")->required()->check(CLI::ExistingFile);
    prompt_cmd->add_option("--out", prompt_opts.out, "Predictions CSV");
    prompt_cmd->add_option("--temperature", prompt_opts.temperature, "Decoding temperature")->capture_default_str();
    prompt_cmd->add_flag("--no-header", prompt_opts.no_header, "Omit the instruction line");
    prompt_cmd->add_option("--header", prompt_opts.header, "Instruction line");
    prompt_cmd->add_option("--seed", prompt_opts.seed, "Seed")->capture_default_str();
    prompt_cmd->add_option("--labels", prompt_opts.labels, "Comma-separated label set")->capture_default_str();
    add_backend_options(prompt_cmd, prompt_opts.backend);
    bind(prompt_cmd, prompt_opts, run_classify_prompt);

    OptimizeOptions opt;
    auto* optimize_cmd = app.add_subcommand("optimize", "Evolve the in-context example set");
    optimize_cmd->add_option("--train", opt.train, "Training JSONL")->required()->check(CLI::ExistingFile);
    optimize_cmd->add_option("--validation", opt.validation, "Validation JSONL (fitness)")
        ->required()
        ->check(CLI::ExistingFile);
    optimize_cmd->add_option("--test", opt.test, "Test JSONL scored with the best candidate")
        ->check(CLI::ExistingFile);
    optimize_cmd->add_option("--trace", opt.trace, "Per-generation JSONL trace");
    optimize_cmd->add_option("--out", opt.out, "Output directory (defaults to the trace's directory)");
    optimize_cmd->add_option("--generations", opt.generations, "Generations")->capture_default_str();
    optimize_cmd->add_option("--population", opt.population, "Population size")->capture_default_str();
    optimize_cmd->add_option("--alleles", opt.alleles, "Alleles per candidate")->capture_default_str();
    optimize_cmd->add_option("--tournament-size", opt.tournament_size, "Tournament size")->capture_default_str();
    optimize_cmd->add_option("--mutation-rate", opt.mutation_rate, "Per-allele mutation probability")
        ->capture_default_str();
    optimize_cmd->add_option("--crossover-probability", opt.crossover_probability, "Crossover probability")
        ->capture_default_str();
    optimize_cmd->add_flag("--no-mutate-immigrants", opt.no_mutate_immigrants, "Mutate offspring only");
    optimize_cmd->add_option("--fitness-target", opt.fitness_target, "Stop once this validation accuracy is reached");
    optimize_cmd->add_option("--time-limit", opt.time_limit_s, "Stop after this many seconds");
    optimize_cmd->add_option("--call-budget", opt.call_budget, "Stop after this many backend requests");
    optimize_cmd->add_option("--trials", opt.trials, "Independent runs with seeds seed, seed+1, ...")
        ->capture_default_str();
    optimize_cmd->add_option("--seed", opt.seed, "GA seed")->capture_default_str();
    optimize_cmd->add_option("--labels", opt.labels, "Comma-separated label set")->capture_default_str();
    optimize_cmd->add_flag("--no-header", opt.no_header, "Omit the instruction line from prompts");
    add_backend_options(optimize_cmd, opt.backend);
    bind(optimize_cmd, opt, run_optimize);

    GridOptions grid_opts;
    auto* grid_cmd = app.add_subcommand("gridsearch", "Augmentation grid search for the search classifier");
    grid_cmd->add_option("--bundle", grid_opts.bundle, "Directory with train/validation/test.jsonl")
        ->required()
        ->check(CLI::ExistingDirectory);
    grid_cmd->add_option("--config", grid_opts.config, "Grid file (key = value lines)")->check(CLI::ExistingFile);
    grid_cmd->add_option("--out", grid_opts.out, "Output directory")->required();
    grid_cmd->add_option("--repeats", grid_opts.repeats, "Override the grid's repeat count");
    grid_cmd->add_option("--seed", grid_opts.seed, "Experiment seed")->capture_default_str();
    grid_cmd->add_option("--labels", grid_opts.labels, "Comma-separated label set")->capture_default_str();
    add_backend_options(grid_cmd, grid_opts.backend);
    bind(grid_cmd, grid_opts, run_gridsearch);

    ReportOptions report_opts;
    auto* report_cmd = app.add_subcommand("report", "Render gridsearch and optimize results");
    report_cmd->add_option("--in", report_opts.in, "gridsearch output directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    report_cmd->add_option("--format", report_opts.format, "Output format")
        ->check(CLI::IsMember({"csv", "markdown"}))
        ->capture_default_str();
    report_cmd->add_option("--ga", report_opts.ga, "optimize output directory to compare against")
        ->check(CLI::ExistingDirectory);
    report_cmd->add_option("--out", report_opts.out, "Write to this file instead of stdout");
    bind(report_cmd, report_opts, run_report);

    SplitOptions split_opts;
    auto* split_cmd = app.add_subcommand("split", "Class-balanced train/validation/test split of a pool");
    split_cmd->add_option("--pool", split_opts.pool, "Labeled pool (JSONL)")->required()->check(CLI::ExistingFile);
    split_cmd->add_option("--out", split_opts.out, "Output directory")->required();
    split_cmd->add_option("--sizes", split_opts.sizes, "train,validation,test")->delimiter(',')->expected(3)->capture_default_str();
    split_cmd->add_option("--seed", split_opts.seed, "Shuffle seed")->capture_default_str();
    split_cmd->add_option("--labels", split_opts.labels, "Comma-separated label set")->capture_default_str();
    bind(split_cmd, split_opts, run_split);

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }
    if (!action) {
        err << app.help();
        return kExitUsage;
    }

    Run run{out, err, {}, std::nullopt, {}};
    run.manifest.command = active->get_parent() != &app ? active->get_parent()->get_name() + " " + active->get_name()
                                                        : active->get_name();
    run.manifest.argv.assign(args.begin() + 1, args.end());
    run.manifest.config_snapshot = active->config_to_str(true, false);
    run.manifest.started_at = std::chrono::system_clock::now();

    int code = kExitOk;
    try {
        action(run);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        run.manifest.succeeded = false;
        run.manifest.failure = e.what();
        code = kExitFailure;
    }

    if (run.output_dir) {
        run.manifest.finished_at = std::chrono::system_clock::now();
        run.manifest.call_count = run.backends.calls();
        try {
            write_manifest(run.manifest, *run.output_dir);
        } catch (const std::exception& e) {
            run.log(std::string("could not write manifest: ") + e.what());
        }
    }
    return code;
}

} // namespace promptforge::cli
