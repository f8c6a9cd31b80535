#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "tcfd/nli.hpp"

namespace tcfd {

/// Parsed manifest.json of an exported NLI model bundle. The bundle layout is
/// fixed: model.onnx, tokenizer/, manifest.json.
struct BundleManifest {
  std::string model_identity;
  // Position of each class in the model's output vector.
  std::size_t contradiction_index = 0;
  std::size_t neutral_index = 1;
  std::size_t entailment_index = 2;
  std::size_t max_sequence_length = 1024;
  std::string graph_hash;  // "sha256:<hex>"
  std::string format_version;
};

inline constexpr std::string_view kBundleGraphFile = "model.onnx";
inline constexpr std::string_view kBundleTokenizerDir = "tokenizer";
inline constexpr std::string_view kBundleManifestFile = "manifest.json";
inline constexpr std::string_view kModelDirEnv = "TCFD_MODEL_DIR";

/// Parses manifest JSON text. The label order must name each of
/// contradiction, neutral and entailment exactly once.
BundleManifest parse_bundle_manifest(std::string_view json_text);

/// Loads and checks a bundle directory: required files present, manifest
/// valid, graph hash matches. Throws ConfigError on any problem.
BundleManifest verify_bundle(const std::filesystem::path& dir);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_file_hex(const std::filesystem::path& file);

/// Maps a raw model output vector to NliScores by manifest index.
NliScores scores_from_logits(std::span<const float> logits, const BundleManifest& manifest);

/// Builds a backend from a `--backend` value: "mock", "model:<dir>", or
/// "model" (directory from TCFD_MODEL_DIR). Fails before any scoring when
/// the backend cannot be loaded.
std::unique_ptr<ScorerBackend> make_backend(std::string_view spec);

}  // namespace tcfd
