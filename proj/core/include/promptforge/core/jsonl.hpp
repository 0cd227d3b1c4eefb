#pragma once

#include "promptforge/core/example.hpp"
#include "promptforge/core/label.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>

namespace promptforge {

/// Reads one {"text", "label", "origin"?} object per line. Blank lines are
/// skipped, unknown keys ignored. Throws DataError naming the line on a
/// malformed record or a label outside `label_set`, and on an empty file.
Examples load_jsonl(const std::filesystem::path& path, const LabelSet& label_set);
Examples read_jsonl(std::istream& in, const LabelSet& label_set);

/// Writes {"text", "label"} per example, plus "origin" for non-seed examples.
void save_jsonl(std::span<const LabeledExample> examples, const std::filesystem::path& path);
void write_jsonl(std::span<const LabeledExample> examples, std::ostream& out);

} // namespace promptforge
