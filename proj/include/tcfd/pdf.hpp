#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace tcfd::pdf {

/// A string painted by one text-showing operator, in device space (points,
/// origin bottom-left). `width` is estimated from the font's width table
/// when present, otherwise from a 0.5 em average glyph width.
struct TextRun {
  double x = 0;
  double y = 0;
  double font_size = 0;
  double width = 0;
  std::string text;  // UTF-8
};

/// Read-only view of a PDF file sufficient for text extraction.
///
/// Objects are located by scanning for "N G obj" markers rather than
/// trusting the cross-reference table, so truncated or incrementally updated
/// files still load. Compressed object streams are expanded. Stream filters
/// FlateDecode, ASCIIHexDecode and ASCII85Decode are supported.
class Document {
 public:
  /// Throws tcfd::ParseError when the bytes are not a PDF, when no document
  /// catalog can be found, or when the file is encrypted.
  static Document parse(std::span<const std::uint8_t> bytes);

  Document(Document&&) noexcept;
  Document& operator=(Document&&) noexcept;
  ~Document();

  std::size_t page_count() const;

  /// Text runs of one page in content-stream order. Problems that only
  /// affect part of the page are appended to `warnings`.
  std::vector<TextRun> text_runs(std::size_t page, std::vector<std::string>& warnings) const;

 private:
  struct Impl;
  explicit Document(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

}  // namespace tcfd::pdf
