#pragma once

#include <filesystem>
#include <vector>

#include "augpe/core.hpp"

namespace augpe::jsonl {

/// Reads a JSON Lines dataset: one object per line with a required "text"
/// string and an optional "label" string. Throws DomainError with the
/// offending line number on parse failures.
std::vector<Sample> read_samples(const std::filesystem::path& path);

PrivateDataset read_dataset(const std::filesystem::path& path);

/// Writes one {"text": ..., "label": ...} object per line (label omitted
/// when absent). UTF-8, LF line endings.
void write_samples(const std::filesystem::path& path, const std::vector<Sample>& samples);

}  // namespace augpe::jsonl
