#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace bscript {

/// Directory holding the shipped stopword list, sentiment lexicon, tagset
/// and tag dictionary. Resolution order: $BSCRIPT_DATA_DIR, the source tree
/// data directory, the installed data directory.
std::filesystem::path data_dir();

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file, flushes it to disk and renames it over
/// the target, so readers see either the old or the new content.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace bscript
