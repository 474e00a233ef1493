#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "kpbench/corruption.hpp"

namespace kpbench::cli {

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_file(const std::filesystem::path& path);

// One generated image. output_path is relative to the output root.
struct ManifestRow {
  std::int64_t source_id = 0;
  CorruptionKind corruption = CorruptionKind::kMotionBlur;
  int severity = 1;
  std::uint64_t seed = 0;
  std::string output_path;
  std::string sha256;

  friend bool operator==(const ManifestRow&, const ManifestRow&) = default;
};

struct RunManifest {
  std::vector<ManifestRow> rows;

  // (source_id, corruption, severity) order.
  void sort();
  std::string to_csv() const;
  // Throws ValidationError on malformed rows unless `skip_malformed`, which
  // drops them instead (a journal may end in a torn line).
  static RunManifest from_csv(const std::string& text, bool skip_malformed = false);
  static RunManifest read(const std::filesystem::path& path, bool skip_malformed = false);
};

inline constexpr const char* kManifestHeader =
    "source_id,corruption,severity,seed,output_path,sha256";

std::string manifest_line(const ManifestRow& row);

// Rows whose output file is missing or whose digest no longer matches.
std::vector<std::string> verify_manifest(const RunManifest& manifest,
                                         const std::filesystem::path& out_root);

}  // namespace kpbench::cli
