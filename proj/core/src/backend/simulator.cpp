#include "promptforge/backend/simulator.hpp"

#include "promptforge/core/label.hpp"
#include "promptforge/core/rng.hpp"
#include "promptforge/search/search_classifier.hpp"
#include "promptforge/search/text_vector.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace promptforge::backend {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = end + 1;
    }
    return lines;
}

// Splits "Prefix: rest" where Prefix is a single word; nullopt otherwise.
std::optional<std::pair<std::string_view, std::string>> split_prefix(std::string_view line) {
    auto colon = line.find(':');
    if (colon == std::string_view::npos || colon == 0) return std::nullopt;
    auto head = line.substr(0, colon);
    auto word_start = head.find_first_not_of(" \t");
    if (word_start == std::string_view::npos) return std::nullopt;
    head = head.substr(word_start);
    if (!std::all_of(head.begin(), head.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); })) {
        return std::nullopt;
    }
    return std::pair{head, trim(line.substr(colon + 1))};
}

std::string strip_prefix(std::string_view line) {
    if (auto parts = split_prefix(line)) return parts->second;
    return trim(line);
}

std::string strip_word(std::string_view word) {
    constexpr std::string_view punct = "?!.,;:\"'()";
    auto first = word.find_first_not_of(punct);
    if (first == std::string_view::npos) return {};
    auto last = word.find_last_not_of(punct);
    return std::string(word.substr(first, last - first + 1));
}

std::vector<std::string> words_of(std::string_view text) {
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        auto j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        if (j > i) {
            if (auto w = strip_word(text.substr(i, j - i)); !w.empty()) words.push_back(std::move(w));
        }
        i = j;
    }
    return words;
}

CompletionResponse classify(const CompletionRequest& request, Rng& rng) {
    const auto& allowed = *request.allowed_tokens();
    auto parsed = parse_few_shot_prompt(request.prompt(), allowed);
    auto query = search::vectorize(parsed.query);

    std::vector<double> scores(allowed.size(), 0.0);
    std::vector<std::size_t> counts(allowed.size(), 0);
    for (const auto& shot : parsed.shots) {
        auto i = static_cast<std::size_t>(std::find(allowed.begin(), allowed.end(), shot.label) - allowed.begin());
        scores[i] += search::cosine(query, search::vectorize(shot.text));
        ++counts[i];
    }

    std::size_t choice = 0;
    if (std::all_of(scores.begin(), scores.end(), [](double s) { return s == 0.0; })) {
        choice = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    } else {
        choice = search::softmax_choice(scores, request.temperature(), rng);
    }
    return {allowed[choice], FinishReason::Restricted};
}

CompletionResponse generate(const CompletionRequest& request, Rng& rng) {
    auto seeds = parse_generation_seeds(request.prompt());

    std::vector<std::string> starts;
    std::vector<std::string> bag;
    std::map<std::string, std::vector<std::string>> successors;
    for (const auto& seed : seeds) {
        auto words = words_of(seed);
        if (words.empty()) continue;
        starts.push_back(words.front());
        for (std::size_t i = 0; i < words.size(); ++i) {
            bag.push_back(words[i]);
            if (i + 1 < words.size()) successors[words[i]].push_back(words[i + 1]);
        }
    }
    if (bag.empty()) return {"", FinishReason::Stop};

    const std::size_t length = 5 + rng.uniform_index(11);
    std::vector<std::string> out{starts[rng.uniform_index(starts.size())]};
    while (out.size() < length) {
        auto it = successors.find(out.back());
        if (it != successors.end() && !it->second.empty()) {
            out.push_back(it->second[rng.uniform_index(it->second.size())]);
        } else {
            out.push_back(bag[rng.uniform_index(bag.size())]);
        }
    }

    std::string text;
    for (const auto& w : out) {
        if (!text.empty()) text.push_back(' ');
        text += w;
    }
    text.push_back('?');
    if (!text.empty()) text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));

    CompletionResponse response{std::move(text), FinishReason::Stop};
    for (const auto& stop : request.stop_sequences()) {
        if (stop.empty()) continue;
        if (auto pos = response.text.find(stop); pos != std::string::npos) response.text.resize(pos);
    }
    if (estimate_tokens(response.text) > request.max_tokens()) {
        response.text.resize(request.max_tokens() * 4);
        response.finish_reason = FinishReason::Length;
    }
    return response;
}

} // namespace

FewShotPrompt parse_few_shot_prompt(std::string_view prompt, const std::vector<std::string>& labels) {
    auto lines = split_lines(prompt);
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();

    FewShotPrompt out;
    auto is_label = [&](const std::optional<std::pair<std::string_view, std::string>>& parts) {
        return parts && std::find(labels.begin(), labels.end(), parts->second) != labels.end();
    };

    std::size_t last = lines.size();
    if (!lines.empty()) {
        auto tail = split_prefix(lines.back());
        if (tail && tail->second.empty()) {
            last = lines.size() - 1;
            if (last > 0) out.query = strip_prefix(lines[last - 1]);
        } else {
            out.query = strip_prefix(lines.back());
        }
    }

    for (std::size_t i = 1; i < last; ++i) {
        auto parts = split_prefix(lines[i]);
        if (!is_label(parts)) continue;
        if (is_label(split_prefix(lines[i - 1]))) continue;
        auto text = strip_prefix(lines[i - 1]);
        if (!text.empty()) out.shots.push_back({std::move(text), parts->second});
    }
    return out;
}

std::vector<std::string> parse_generation_seeds(std::string_view prompt) {
    std::vector<std::string> seeds;
    for (auto line : split_lines(prompt)) {
        auto parts = split_prefix(line);
        if (parts && parts->first == "Q" && !parts->second.empty()) seeds.push_back(parts->second);
    }
    return seeds;
}

CompletionResponse SimulatedBackend::do_complete(const CompletionRequest& request) {
    Rng rng(mix64(seed_ ^ request.digest()));
    if (request.allowed_tokens()) return classify(request, rng);
    return generate(request, rng);
}

} // namespace promptforge::backend
