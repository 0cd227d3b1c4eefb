#include "promptforge/core/jsonl.hpp"

#include "promptforge/core/errors.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace promptforge {

using nlohmann::json;

Examples read_jsonl(std::istream& in, const LabelSet& label_set) {
    Examples out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;

        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError(std::string("malformed JSON: ") + e.what(), line_no);
        }
        if (!record.is_object()) throw DataError("record is not a JSON object", line_no);

        auto text = record.find("text");
        auto label = record.find("label");
        if (text == record.end() || !text->is_string()) throw DataError("missing string field 'text'", line_no);
        if (label == record.end() || !label->is_string()) throw DataError("missing string field 'label'", line_no);

        Label parsed(label->get<std::string>());
        if (!label_set.contains(parsed)) {
            throw DataError("unknown label '" + parsed.name() + "'", line_no);
        }
        Origin origin = Origin::Seed;
        if (auto o = record.find("origin"); o != record.end() && o->is_string()) {
            auto parsed_origin = parse_origin(o->get<std::string>());
            if (!parsed_origin) throw DataError("unknown origin '" + o->get<std::string>() + "'", line_no);
            origin = *parsed_origin;
        }
        try {
            out.emplace_back(text->get<std::string>(), std::move(parsed), origin);
        } catch (const DataError& e) {
            throw DataError(e.what(), line_no);
        }
    }
    if (out.empty()) throw DataError("no records");
    return out;
}

Examples load_jsonl(const std::filesystem::path& path, const LabelSet& label_set) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    try {
        return read_jsonl(in, label_set);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_jsonl(std::span<const LabeledExample> examples, std::ostream& out) {
    for (const auto& e : examples) {
        json record = {{"text", e.text()}, {"label", e.label().name()}};
        if (e.origin() != Origin::Seed) record["origin"] = std::string(to_string(e.origin()));
        out << record.dump() << '\n';
    }
}

void save_jsonl(std::span<const LabeledExample> examples, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    write_jsonl(examples, out);
    out.flush();
    if (!out) throw Error("write failed: " + path.string());
}

} // namespace promptforge
