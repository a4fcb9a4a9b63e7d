#include "augpe/jsonl.hpp"

#include <fstream>
#include <string>

#include <json.hpp>

namespace augpe::jsonl {

using nlohmann::json;

std::vector<Sample> read_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open dataset file: " + path.string());
  std::vector<Sample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw DomainError(path.string() + ":" + std::to_string(lineno) + ": not a JSON object");
    if (!j.contains("text") || !j["text"].is_string())
      throw DomainError(path.string() + ":" + std::to_string(lineno) +
                        ": missing required string key \"text\"");
    std::optional<std::string> label;
    if (j.contains("label")) {
      if (!j["label"].is_string())
        throw DomainError(path.string() + ":" + std::to_string(lineno) +
                          ": \"label\" must be a string");
      label = j["label"].get<std::string>();
    }
    out.emplace_back(j["text"].get<std::string>(), std::move(label));
  }
  return out;
}

PrivateDataset read_dataset(const std::filesystem::path& path) {
  return PrivateDataset::from_samples(read_samples(path));
}

void write_samples(const std::filesystem::path& path, const std::vector<Sample>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot open output file: " + path.string());
  for (const auto& s : samples) {
    json j;
    j["text"] = s.text();
    if (s.label()) j["label"] = *s.label();
    out << j.dump() << "\n";
  }
}

}  // namespace augpe::jsonl
