#include "tcfd/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "tcfd/text.hpp"

namespace tcfd {
namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::array<Enum, N>& values, const char* what) {
  for (Enum v : values) {
    if (to_string(v) == s) return v;
  }
  throw ParseError("unknown " + std::string(what) + " '" + std::string(s) + "'");
}

}  // namespace

std::string_view to_string(Region r) {
  switch (r) {
    case Region::AsiaPacific: return "AsiaPacific";
    case Region::Europe: return "Europe";
    case Region::LatinAmerica: return "LatinAmerica";
    case Region::MiddleEastAfrica: return "MiddleEastAfrica";
    case Region::NorthAmerica: return "NorthAmerica";
  }
  return "";
}

std::string_view to_string(SizeClass s) {
  switch (s) {
    case SizeClass::Large: return "Large";
    case SizeClass::Medium: return "Medium";
    case SizeClass::Small: return "Small";
  }
  return "";
}

std::string_view to_string(ReportCategory c) {
  switch (c) {
    case ReportCategory::Annual: return "Annual";
    case ReportCategory::CDP: return "CDP";
    case ReportCategory::CorporateGovernance: return "CorporateGovernance";
    case ReportCategory::Integrated: return "Integrated";
    case ReportCategory::Remuneration: return "Remuneration";
    case ReportCategory::Sustainability: return "Sustainability";
    case ReportCategory::TCFD: return "TCFD";
  }
  return "";
}

std::string_view to_string(BlockTag t) {
  switch (t) {
    case BlockTag::BodyContent: return "BodyContent";
    case BlockTag::Abstract: return "Abstract";
    case BlockTag::Title: return "Title";
    case BlockTag::Figure: return "Figure";
    case BlockTag::Table: return "Table";
    case BlockTag::Other: return "Other";
  }
  return "";
}

Region parse_region(std::string_view s) { return parse_enum(s, kRegions, "region"); }
SizeClass parse_size_class(std::string_view s) { return parse_enum(s, kSizeClasses, "size class"); }
ReportCategory parse_report_category(std::string_view s) {
  return parse_enum(s, kReportCategories, "report category");
}
BlockTag parse_block_tag(std::string_view s) {
  constexpr std::array tags = {BlockTag::BodyContent, BlockTag::Abstract, BlockTag::Title,
                               BlockTag::Figure,      BlockTag::Table,    BlockTag::Other};
  return parse_enum(s, tags, "block tag");
}

SizeClass classify_size(double total_assets_usd) {
  if (!std::isfinite(total_assets_usd) || total_assets_usd < 0) {
    throw DomainError("total assets must be a non-negative amount, got " +
                      std::to_string(total_assets_usd));
  }
  if (total_assets_usd > 500e9) return SizeClass::Large;
  if (total_assets_usd >= 50e9) return SizeClass::Medium;
  return SizeClass::Small;
}

// ---------------------------------------------------------------------------

PretaggedExtractor::PretaggedExtractor(std::vector<LayoutBlock> blocks, std::string source)
    : source_(std::move(source)) {
  for (LayoutBlock& b : blocks) by_report_[b.report_id].push_back(std::move(b));
}

Extraction PretaggedExtractor::extract(const std::string& report_id,
                                       std::span<const std::uint8_t>) const {
  auto it = by_report_.find(report_id);
  if (it == by_report_.end()) throw ExtractionError(report_id, "no pre-tagged blocks for report");
  Extraction out;
  out.blocks = it->second;
  for (std::size_t i = 0; i < out.blocks.size(); ++i) {
    if (i > 0 && out.blocks[i].block_index <= out.blocks[i - 1].block_index) {
      throw ExtractionError(report_id, "block_index not strictly increasing at block " +
                                           std::to_string(out.blocks[i].block_index));
    }
    out.page_count = std::max(out.page_count, out.blocks[i].page);
  }
  return out;
}

Extraction extract_blocks(const std::string& report_id, std::span<const std::uint8_t> document,
                          const BlockExtractor& extractor) {
  return extractor.extract(report_id, document);
}

// ---------------------------------------------------------------------------

std::vector<LayoutBlock> filter_body(std::span<const LayoutBlock> blocks) {
  std::vector<LayoutBlock> out;
  std::copy_if(blocks.begin(), blocks.end(), std::back_inserter(out), [](const LayoutBlock& b) {
    return b.tag == BlockTag::BodyContent || b.tag == BlockTag::Abstract;
  });
  return out;
}

std::string make_sequence_id(std::string_view report_id, std::size_t ordinal) {
  char buf[32];
  std::snprintf(buf, sizeof buf, ":%05zu", ordinal);
  return std::string(report_id) + buf;
}

Segmentation segment(std::span<const LayoutBlock> blocks, const SegmentationConfig& config) {
  if (config.max_tokens == 0) throw ConfigError("max_tokens must be at least 1");
  Segmentation out;
  std::map<std::string, std::size_t> next_ordinal;

  auto push = [&](const std::string& report_id, std::string text) {
    const std::size_t ordinal = next_ordinal[report_id]++;
    TextSequence s;
    s.sequence_id = make_sequence_id(report_id, ordinal);
    s.report_id = report_id;
    s.ordinal = ordinal;
    s.token_count = text::word_count(text);
    s.text = std::move(text);
    out.sequences.push_back(std::move(s));
  };

  for (const LayoutBlock& block : blocks) {
    const std::string normalized = text::normalize_whitespace(block.text);
    if (normalized.empty()) continue;
    std::vector<std::string> units;
    if (config.unit == SegmentationConfig::Unit::Sentence) {
      units = text::split_sentences(normalized);
    } else {
      units.push_back(normalized);
    }
    for (std::string& unit : units) {
      const auto words = text::words(unit);
      if (words.size() <= config.max_tokens) {
        push(block.report_id, std::move(unit));
        continue;
      }
      out.warnings.push_back({block.report_id, "block " + std::to_string(block.block_index) + ": " +
                                                   std::to_string(words.size()) +
                                                   "-token unit split at the " +
                                                   std::to_string(config.max_tokens) + "-token limit"});
      for (std::size_t b = 0; b < words.size(); b += config.max_tokens) {
        const std::size_t e = std::min(words.size(), b + config.max_tokens);
        std::string chunk;
        for (std::size_t k = b; k < e; ++k) {
          if (k > b) chunk.push_back(' ');
          chunk.append(words[k]);
        }
        push(block.report_id, std::move(chunk));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::size_t RegionSizeTable::row_total(Region r) const {
  std::size_t n = 0;
  for (SizeClass s : kSizeClasses) n += at(r, s);
  return n;
}

std::size_t RegionSizeTable::column_total(SizeClass s) const {
  std::size_t n = 0;
  for (Region r : kRegions) n += at(r, s);
  return n;
}

std::size_t RegionSizeTable::total() const {
  std::size_t n = 0;
  for (Region r : kRegions) n += row_total(r);
  return n;
}

CorpusStats corpus_stats(std::span<const ReportDocument> reports,
                         const std::map<std::string, std::size_t>& sequences_per_report,
                         std::span<const BankRecord> banks) {
  CorpusStats stats;
  struct Acc {
    std::size_t n = 0;
    double pages = 0;
    double sequences = 0;
  };
  std::array<Acc, kReportCategories.size()> acc{};
  Acc all;
  for (const ReportDocument& r : reports) {
    const auto it = sequences_per_report.find(r.report_id);
    const double seqs = it == sequences_per_report.end() ? 0.0 : static_cast<double>(it->second);
    for (Acc* a : {&acc[static_cast<std::size_t>(r.category)], &all}) {
      ++a->n;
      a->pages += static_cast<double>(r.page_count);
      a->sequences += seqs;
    }
  }
  for (ReportCategory c : kReportCategories) {
    const Acc& a = acc[static_cast<std::size_t>(c)];
    stats.categories.push_back({c, a.n, a.n ? a.pages / static_cast<double>(a.n) : 0.0,
                                a.n ? a.sequences / static_cast<double>(a.n) : 0.0});
  }
  stats.total_reports = all.n;
  stats.mean_pages = all.n ? all.pages / static_cast<double>(all.n) : 0.0;
  stats.mean_sequences = all.n ? all.sequences / static_cast<double>(all.n) : 0.0;
  for (const BankRecord& b : banks) ++stats.banks.at(b.region, b.size_class());
  return stats;
}

}  // namespace tcfd
