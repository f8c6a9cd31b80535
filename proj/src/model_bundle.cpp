#include "tcfd/model_bundle.hpp"

#include <openssl/evp.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include "json.hpp"

#include "tcfd/error.hpp"

namespace tcfd {

namespace fs = std::filesystem;
using nlohmann::json;

BundleManifest parse_bundle_manifest(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("manifest.json is not valid JSON: ") + e.what());
  }
  BundleManifest m;
  try {
    m.model_identity = j.at("model").get<std::string>();
    m.graph_hash = j.at("graph_hash").get<std::string>();
    m.max_sequence_length = j.value("max_length", std::size_t{1024});
    m.format_version = j.value("format_version", std::string{});
    const auto order = j.at("label_order").get<std::vector<std::string>>();
    if (order.size() != 3) throw ConfigError("manifest label_order must have 3 entries");
    std::array<int, 3> seen{};
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (order[i] == "contradiction") {
        m.contradiction_index = i;
        ++seen[0];
      } else if (order[i] == "neutral") {
        m.neutral_index = i;
        ++seen[1];
      } else if (order[i] == "entailment") {
        m.entailment_index = i;
        ++seen[2];
      } else {
        throw ConfigError("manifest label_order has unknown class '" + order[i] + "'");
      }
    }
    if (seen != std::array<int, 3>{1, 1, 1}) {
      throw ConfigError("manifest label_order must name each NLI class exactly once");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("manifest.json is missing a field: ") + e.what());
  }
  if (m.graph_hash.rfind("sha256:", 0) != 0) {
    throw ConfigError("manifest graph_hash must have the form sha256:<hex>");
  }
  return m;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string sha256_file_hex(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + file.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

BundleManifest verify_bundle(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("model bundle directory not found: " + dir.string());
  const fs::path manifest_path = dir / kBundleManifestFile;
  std::ifstream in(manifest_path);
  if (!in) throw ConfigError("model bundle has no " + std::string(kBundleManifestFile));
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  BundleManifest m = parse_bundle_manifest(text);
  const fs::path graph = dir / kBundleGraphFile;
  if (!fs::is_regular_file(graph)) throw ConfigError("model bundle has no " + std::string(kBundleGraphFile));
  if (!fs::is_directory(dir / kBundleTokenizerDir)) {
    throw ConfigError("model bundle has no " + std::string(kBundleTokenizerDir) + "/ directory");
  }
  const std::string actual = "sha256:" + sha256_file_hex(graph);
  if (actual != m.graph_hash) {
    throw ConfigError("model graph hash mismatch: manifest " + m.graph_hash + ", file " + actual);
  }
  return m;
}

NliScores scores_from_logits(std::span<const float> logits, const BundleManifest& m) {
  if (logits.size() != 3) {
    throw DomainError("NLI model must emit 3 logits, got " + std::to_string(logits.size()));
  }
  return {logits[m.entailment_index], logits[m.contradiction_index], logits[m.neutral_index]};
}

std::unique_ptr<ScorerBackend> make_backend(std::string_view spec) {
  if (spec == "mock") return std::make_unique<LexicalMockScorer>();
  if (spec == "model" || spec.rfind("model:", 0) == 0) {
    std::string dir;
    if (spec == "model") {
      const char* env = std::getenv(std::string(kModelDirEnv).c_str());
      if (!env || !*env) {
        throw ConfigError("--backend model needs a path or the " + std::string(kModelDirEnv) +
                          " environment variable");
      }
      dir = env;
    } else {
      dir = std::string(spec.substr(6));
    }
    const BundleManifest m = verify_bundle(dir);
    // TODO: wire an ONNX Runtime session here once the runtime is available
    // to the build; the bundle checks above are independent of it.
    throw ConfigError("model bundle '" + m.model_identity +
                      "' is valid, but this build has no neural inference runtime");
  }
  throw ConfigError("unknown backend '" + std::string(spec) + "' (expected mock or model:<path>)");
}

}  // namespace tcfd
