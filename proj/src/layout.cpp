#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>

#include "tcfd/corpus.hpp"
#include "tcfd/text.hpp"

namespace tcfd {
namespace {

struct Line {
  double y = 0;
  double font_size = 0;
  std::vector<const pdf::TextRun*> runs;
  std::string text;
};

bool ends_with_space(const std::string& s) { return !s.empty() && s.back() == ' '; }
bool starts_with_space(const std::string& s) { return !s.empty() && s.front() == ' '; }

std::string join_runs(const std::vector<const pdf::TextRun*>& runs) {
  std::string out;
  const pdf::TextRun* prev = nullptr;
  for (const pdf::TextRun* r : runs) {
    if (prev) {
      const double gap = r->x - (prev->x + prev->width);
      const double em = std::max(prev->font_size, r->font_size);
      if (gap > 0.15 * em && !ends_with_space(out) && !starts_with_space(r->text)) out.push_back(' ');
    }
    out += r->text;
    prev = r;
  }
  return text::normalize_whitespace(out);
}

std::vector<Line> group_lines(std::span<const pdf::TextRun> runs, const LayoutHeuristics& params) {
  std::vector<const pdf::TextRun*> sorted;
  for (const auto& r : runs) {
    if (r.text.find_first_not_of(' ') != std::string::npos) sorted.push_back(&r);
  }
  // Top of page first, then left to right.
  std::stable_sort(sorted.begin(), sorted.end(), [](const pdf::TextRun* a, const pdf::TextRun* b) {
    if (a->y != b->y) return a->y > b->y;
    return a->x < b->x;
  });

  std::vector<Line> lines;
  for (const pdf::TextRun* r : sorted) {
    if (!lines.empty()) {
      Line& cur = lines.back();
      const double tol = params.line_merge_tolerance * std::min(cur.font_size, r->font_size);
      if (std::abs(cur.y - r->y) <= tol) {
        cur.runs.push_back(r);
        cur.font_size = std::max(cur.font_size, r->font_size);
        continue;
      }
    }
    lines.push_back(Line{r->y, r->font_size, {r}, {}});
  }
  for (Line& l : lines) {
    std::stable_sort(l.runs.begin(), l.runs.end(),
                     [](const pdf::TextRun* a, const pdf::TextRun* b) { return a->x < b->x; });
    l.text = join_runs(l.runs);
  }
  std::erase_if(lines, [](const Line& l) { return l.text.empty(); });
  return lines;
}

void append_line(std::string& block, const std::string& line) {
  if (block.empty()) {
    block = line;
  } else if (block.back() == '-' && block.size() >= 2 &&
             std::isalpha(static_cast<unsigned char>(block[block.size() - 2]))) {
    block += line;  // keep hyphenated compound broken across lines
  } else {
    block += ' ';
    block += line;
  }
}

}  // namespace

BlockTag tag_block(std::string_view text, std::size_t line_count, const LayoutHeuristics& params) {
  std::size_t digits = 0;
  std::size_t visible = 0;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) continue;
    ++visible;
    if (std::isdigit(c)) ++digits;
  }
  if (visible == 0) return BlockTag::Other;
  const double density = static_cast<double>(digits) / static_cast<double>(visible);
  const double words_per_line =
      static_cast<double>(text::word_count(text)) / static_cast<double>(std::max<std::size_t>(1, line_count));
  if (density > params.table_digit_density || words_per_line < params.table_min_words_per_line) {
    return BlockTag::Table;
  }
  return BlockTag::BodyContent;
}

std::vector<LayoutBlock> layout_page(const std::string& report_id, std::size_t page,
                                     std::span<const pdf::TextRun> runs, std::size_t first_index,
                                     const LayoutHeuristics& params) {
  const std::vector<Line> lines = group_lines(runs, params);
  std::vector<LayoutBlock> blocks;
  std::string text;
  std::size_t line_count = 0;
  auto flush = [&] {
    if (line_count == 0) return;
    LayoutBlock b;
    b.report_id = report_id;
    b.block_index = first_index + blocks.size();
    b.page = page;
    b.text = text::normalize_whitespace(text);
    b.tag = tag_block(b.text, line_count, params);
    blocks.push_back(std::move(b));
    text.clear();
    line_count = 0;
  };
  const Line* prev = nullptr;
  for (const Line& line : lines) {
    if (prev) {
      const double em = std::max(prev->font_size, line.font_size);
      const bool gap = (prev->y - line.y) > params.block_gap_factor * em;
      const bool font_change =
          std::abs(line.font_size - prev->font_size) > params.font_change_ratio * prev->font_size;
      if (gap || font_change) flush();
    }
    append_line(text, line.text);
    ++line_count;
    prev = &line;
  }
  flush();
  return blocks;
}

Extraction HeuristicExtractor::extract(const std::string& report_id,
                                       std::span<const std::uint8_t> document) const {
  Extraction out;
  std::optional<pdf::Document> doc;
  try {
    doc.emplace(pdf::Document::parse(document));
  } catch (const Error& e) {
    throw ExtractionError(report_id, e.what());
  }
  out.page_count = doc->page_count();
  for (std::size_t page = 0; page < out.page_count; ++page) {
    std::vector<std::string> notes;
    const std::vector<pdf::TextRun> runs = doc->text_runs(page, notes);
    for (std::string& n : notes) out.warnings.push_back({report_id, std::move(n)});
    auto blocks = layout_page(report_id, page + 1, runs, out.blocks.size(), params_);
    std::move(blocks.begin(), blocks.end(), std::back_inserter(out.blocks));
  }
  if (out.blocks.empty() && out.page_count > 0) {
    out.warnings.push_back({report_id, "no extractable text in " + std::to_string(out.page_count) +
                                           " page(s); image-only document?"});
  }
  return out;
}

}  // namespace tcfd
