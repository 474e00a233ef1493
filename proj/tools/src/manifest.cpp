#include "manifest.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

#include <openssl/evp.h>

#include "kpbench/error.hpp"
#include "kpbench/image_io.hpp"

namespace kpbench::cli {

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

void RunManifest::sort() {
  std::sort(rows.begin(), rows.end(), [](const ManifestRow& a, const ManifestRow& b) {
    return std::tuple(a.source_id, kind_index(a.corruption), a.severity) <
           std::tuple(b.source_id, kind_index(b.corruption), b.severity);
  });
}

std::string manifest_line(const ManifestRow& r) {
  std::ostringstream out;
  out << r.source_id << ',' << kind_name(r.corruption) << ',' << r.severity << ',' << r.seed
      << ',';
  if (r.output_path.find_first_of(",\"\n") != std::string::npos) {
    out << '"';
    for (char c : r.output_path) {
      if (c == '"') out << '"';
      out << c;
    }
    out << '"';
  } else {
    out << r.output_path;
  }
  out << ',' << r.sha256;
  return out.str();
}

std::string RunManifest::to_csv() const {
  std::string out = std::string(kManifestHeader) + "\n";
  for (const auto& r : rows) out += manifest_line(r) + "\n";
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

}  // namespace

RunManifest RunManifest::from_csv(const std::string& text, bool skip_malformed) {
  RunManifest m;
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> issues;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line == kManifestHeader) continue;
    const auto f = split_csv_line(line);
    const std::string where = "manifest line " + std::to_string(line_no);
    if (f.size() != 6) {
      issues.push_back(where + ": expected 6 fields");
      continue;
    }
    try {
      ManifestRow r;
      r.source_id = std::stoll(f[0]);
      r.corruption = parse_corruption_kind(f[1]);
      r.severity = Severity(std::stoi(f[2])).level();
      r.seed = std::stoull(f[3]);
      r.output_path = f[4];
      r.sha256 = f[5];
      m.rows.push_back(std::move(r));
    } catch (const std::exception& e) {
      issues.push_back(where + ": " + e.what());
    }
  }
  if (!issues.empty() && !skip_malformed) {
    throw ValidationError("invalid manifest:", std::move(issues));
  }
  return m;
}

RunManifest RunManifest::read(const std::filesystem::path& path, bool skip_malformed) {
  const auto bytes = read_file(path);
  return from_csv(std::string(bytes.begin(), bytes.end()), skip_malformed);
}

std::vector<std::string> verify_manifest(const RunManifest& manifest,
                                         const std::filesystem::path& out_root) {
  std::vector<std::string> problems;
  for (const auto& r : manifest.rows) {
    const auto path = out_root / r.output_path;
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
      problems.push_back("missing " + r.output_path);
    } else if (sha256_file(path) != r.sha256) {
      problems.push_back("digest mismatch " + r.output_path);
    }
  }
  return problems;
}

}  // namespace kpbench::cli
