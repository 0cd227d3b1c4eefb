#include "promptforge/search/text_vector.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace promptforge::search {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c >= 0x80) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

double TermVector::weight(std::string_view term) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), term,
                               [](const Entry& e, std::string_view t) { return e.first < t; });
    return it != entries_.end() && it->first == term ? it->second : 0.0;
}

TermVector vectorize(std::string_view text) {
    auto tokens = tokenize(text);
    std::sort(tokens.begin(), tokens.end());

    TermVector v;
    double norm2 = 0.0;
    for (auto it = tokens.begin(); it != tokens.end();) {
        auto next = std::find_if(it, tokens.end(), [&](const std::string& t) { return t != *it; });
        double w = 1.0 + std::log(static_cast<double>(next - it));
        norm2 += w * w;
        v.entries_.emplace_back(std::move(*it), w);
        it = next;
    }
    if (norm2 > 0.0) {
        double inv = 1.0 / std::sqrt(norm2);
        for (auto& e : v.entries_) e.second *= inv;
    }
    return v;
}

double cosine(const TermVector& a, const TermVector& b) {
    const auto& x = a.entries();
    const auto& y = b.entries();
    double dot = 0.0;
    std::size_t i = 0, j = 0;
    while (i < x.size() && j < y.size()) {
        int cmp = x[i].first.compare(y[j].first);
        if (cmp == 0) {
            dot += x[i++].second * y[j++].second;
        } else if (cmp < 0) {
            ++i;
        } else {
            ++j;
        }
    }
    return std::clamp(dot, 0.0, 1.0);
}

} // namespace promptforge::search
