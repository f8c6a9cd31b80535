#include "tcfd/pdf.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <unordered_map>
#include <variant>

#include "tcfd/error.hpp"

namespace tcfd::pdf {
namespace {

// ---------------------------------------------------------------------------
// Object model

struct Object;
using Array = std::vector<Object>;
using Dict = std::map<std::string, Object, std::less<>>;

struct Name {
  std::string value;
};
struct String {
  std::string bytes;
};
struct Ref {
  int num = 0;
  int gen = 0;
};
struct Keyword {
  std::string value;
};
struct Stream {
  Dict dict;
  std::string raw;
};

struct Object {
  std::variant<std::monostate, bool, double, Name, String, Ref, Keyword, std::shared_ptr<Array>,
               std::shared_ptr<Dict>, std::shared_ptr<Stream>>
      v;

  bool is_null() const { return std::holds_alternative<std::monostate>(v); }
  const double* number() const { return std::get_if<double>(&v); }
  const Name* name() const { return std::get_if<Name>(&v); }
  const String* string() const { return std::get_if<String>(&v); }
  const Ref* ref() const { return std::get_if<Ref>(&v); }
  const Keyword* keyword() const { return std::get_if<Keyword>(&v); }
  const Array* array() const {
    auto p = std::get_if<std::shared_ptr<Array>>(&v);
    return p ? p->get() : nullptr;
  }
  const Dict* dict() const {
    if (auto p = std::get_if<std::shared_ptr<Dict>>(&v)) return p->get();
    if (auto s = std::get_if<std::shared_ptr<Stream>>(&v)) return &(*s)->dict;
    return nullptr;
  }
  const Stream* stream() const {
    auto p = std::get_if<std::shared_ptr<Stream>>(&v);
    return p ? p->get() : nullptr;
  }
};

const Object* dict_get(const Dict* d, std::string_view key) {
  if (d == nullptr) return nullptr;
  auto it = d->find(key);
  return it == d->end() ? nullptr : &it->second;
}

bool is_pdf_space(unsigned char c) {
  return c == 0 || c == '\t' || c == '\n' || c == '\f' || c == '\r' || c == ' ';
}
bool is_delimiter(unsigned char c) {
  return c == '(' || c == ')' || c == '<' || c == '>' || c == '[' || c == ']' || c == '{' ||
         c == '}' || c == '/' || c == '%';
}
bool is_regular(unsigned char c) { return !is_pdf_space(c) && !is_delimiter(c); }

int hex_value(unsigned char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

// ---------------------------------------------------------------------------
// Lexer / parser over a byte buffer

class Parser {
 public:
  explicit Parser(std::string_view data, std::size_t pos = 0) : data_(data), pos_(pos) {}

  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }
  bool eof() {
    skip_space();
    return pos_ >= data_.size();
  }

  void skip_space() {
    while (pos_ < data_.size()) {
      const auto c = static_cast<unsigned char>(data_[pos_]);
      if (is_pdf_space(c)) {
        ++pos_;
      } else if (c == '%') {
        while (pos_ < data_.size() && data_[pos_] != '\n' && data_[pos_] != '\r') ++pos_;
      } else {
        break;
      }
    }
  }

  // Parses one object. Bare keywords (operators, "obj", "stream", ...) come
  // back as Keyword. Integer pairs followed by "R" become references.
  Object parse(int depth = 0) {
    if (depth > 64) throw ParseError("object nesting too deep");
    skip_space();
    if (pos_ >= data_.size()) throw ParseError("unexpected end of data");
    const auto c = static_cast<unsigned char>(data_[pos_]);
    if (c == '/') return Object{parse_name()};
    if (c == '(') return Object{parse_literal_string()};
    if (c == '<') {
      if (pos_ + 1 < data_.size() && data_[pos_ + 1] == '<') return parse_dict(depth);
      return Object{parse_hex_string()};
    }
    if (c == '[') {
      ++pos_;
      auto arr = std::make_shared<Array>();
      while (true) {
        skip_space();
        if (pos_ >= data_.size()) throw ParseError("unterminated array");
        if (data_[pos_] == ']') {
          ++pos_;
          break;
        }
        arr->push_back(parse(depth + 1));
      }
      return Object{std::move(arr)};
    }
    if (c == ']' || c == '>' || c == ')' || c == '{' || c == '}') {
      ++pos_;
      return Object{Keyword{std::string(1, static_cast<char>(c))}};
    }
    if (std::isdigit(c) || c == '+' || c == '-' || c == '.') {
      const std::size_t start = pos_;
      double value = parse_number();
      // Reference lookahead: "num gen R".
      if (is_integer_token(start)) {
        const std::size_t save = pos_;
        skip_space();
        const std::size_t gen_start = pos_;
        if (pos_ < data_.size() && std::isdigit(static_cast<unsigned char>(data_[pos_]))) {
          double gen = parse_number();
          if (is_integer_token(gen_start)) {
            skip_space();
            if (pos_ < data_.size() && data_[pos_] == 'R' &&
                (pos_ + 1 >= data_.size() || !is_regular(static_cast<unsigned char>(data_[pos_ + 1])))) {
              ++pos_;
              return Object{Ref{static_cast<int>(value), static_cast<int>(gen)}};
            }
          }
        }
        pos_ = save;
      }
      return Object{value};
    }
    const std::size_t start = pos_;
    while (pos_ < data_.size() && is_regular(static_cast<unsigned char>(data_[pos_]))) ++pos_;
    if (pos_ == start) {
      ++pos_;
      return Object{Keyword{std::string(1, static_cast<char>(c))}};
    }
    std::string word(data_.substr(start, pos_ - start));
    if (word == "true") return Object{true};
    if (word == "false") return Object{false};
    if (word == "null") return Object{};
    return Object{Keyword{std::move(word)}};
  }

 private:
  bool is_integer_token(std::size_t start) const {
    for (std::size_t i = start; i < pos_; ++i) {
      const char ch = data_[i];
      if (!(std::isdigit(static_cast<unsigned char>(ch)) || (i == start && ch == '+'))) return false;
    }
    return pos_ > start;
  }

  double parse_number() {
    const std::size_t start = pos_;
    if (data_[pos_] == '+' || data_[pos_] == '-') ++pos_;
    while (pos_ < data_.size() &&
           (std::isdigit(static_cast<unsigned char>(data_[pos_])) || data_[pos_] == '.')) {
      ++pos_;
    }
    std::string token(data_.substr(start, pos_ - start));
    if (token == "-" || token == "+" || token == "." || token.empty()) return 0.0;
    return std::strtod(token.c_str(), nullptr);
  }

  Name parse_name() {
    ++pos_;  // '/'
    std::string out;
    while (pos_ < data_.size() && is_regular(static_cast<unsigned char>(data_[pos_]))) {
      const char ch = data_[pos_];
      if (ch == '#' && pos_ + 2 < data_.size()) {
        const int hi = hex_value(static_cast<unsigned char>(data_[pos_ + 1]));
        const int lo = hex_value(static_cast<unsigned char>(data_[pos_ + 2]));
        if (hi >= 0 && lo >= 0) {
          out.push_back(static_cast<char>(hi * 16 + lo));
          pos_ += 3;
          continue;
        }
      }
      out.push_back(ch);
      ++pos_;
    }
    return Name{std::move(out)};
  }

  String parse_literal_string() {
    ++pos_;  // '('
    std::string out;
    int depth = 1;
    while (pos_ < data_.size()) {
      const char ch = data_[pos_++];
      if (ch == '\\') {
        if (pos_ >= data_.size()) break;
        const char e = data_[pos_++];
        switch (e) {
          case 'n': out.push_back('\n'); break;
          case 'r': out.push_back('\r'); break;
          case 't': out.push_back('\t'); break;
          case 'b': out.push_back('\b'); break;
          case 'f': out.push_back('\f'); break;
          case '\r':
            if (pos_ < data_.size() && data_[pos_] == '\n') ++pos_;
            break;
          case '\n': break;
          default:
            if (e >= '0' && e <= '7') {
              int v = e - '0';
              for (int k = 0; k < 2 && pos_ < data_.size() && data_[pos_] >= '0' && data_[pos_] <= '7'; ++k) {
                v = v * 8 + (data_[pos_++] - '0');
              }
              out.push_back(static_cast<char>(v & 0xff));
            } else {
              out.push_back(e);
            }
        }
        continue;
      }
      if (ch == '(') {
        ++depth;
      } else if (ch == ')') {
        if (--depth == 0) break;
      }
      out.push_back(ch);
    }
    return String{std::move(out)};
  }

  String parse_hex_string() {
    ++pos_;  // '<'
    std::string out;
    int hi = -1;
    while (pos_ < data_.size() && data_[pos_] != '>') {
      const int v = hex_value(static_cast<unsigned char>(data_[pos_++]));
      if (v < 0) continue;
      if (hi < 0) {
        hi = v;
      } else {
        out.push_back(static_cast<char>(hi * 16 + v));
        hi = -1;
      }
    }
    if (hi >= 0) out.push_back(static_cast<char>(hi * 16));
    if (pos_ < data_.size()) ++pos_;
    return String{std::move(out)};
  }

  Object parse_dict(int depth) {
    pos_ += 2;  // '<<'
    auto dict = std::make_shared<Dict>();
    while (true) {
      skip_space();
      if (pos_ >= data_.size()) throw ParseError("unterminated dictionary");
      if (data_.compare(pos_, 2, ">>") == 0) {
        pos_ += 2;
        break;
      }
      Object key = parse(depth + 1);
      const Name* k = key.name();
      if (k == nullptr) continue;  // tolerate junk between entries
      skip_space();
      if (data_.compare(pos_, 2, ">>") == 0) {
        (*dict)[k->value] = Object{};
        continue;
      }
      (*dict)[k->value] = parse(depth + 1);
    }
    return Object{std::move(dict)};
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Stream filters

std::string inflate_bytes(std::string_view in) {
  auto run = [&](int window_bits, std::string& out) {
    z_stream zs{};
    if (inflateInit2(&zs, window_bits) != Z_OK) return false;
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
    zs.avail_in = static_cast<uInt>(in.size());
    char buf[16384];
    int rc = Z_OK;
    while (rc == Z_OK) {
      zs.next_out = reinterpret_cast<Bytef*>(buf);
      zs.avail_out = sizeof buf;
      rc = inflate(&zs, Z_NO_FLUSH);
      out.append(buf, sizeof buf - zs.avail_out);
      if (rc == Z_BUF_ERROR && zs.avail_in == 0) break;
    }
    inflateEnd(&zs);
    return rc == Z_STREAM_END || !out.empty();
  };
  std::string out;
  if (run(15, out)) return out;
  out.clear();
  if (run(-15, out)) return out;
  throw ParseError("corrupt FlateDecode stream");
}

std::string ascii_hex_decode(std::string_view in) {
  std::string out;
  int hi = -1;
  for (char ch : in) {
    if (ch == '>') break;
    const int v = hex_value(static_cast<unsigned char>(ch));
    if (v < 0) continue;
    if (hi < 0) {
      hi = v;
    } else {
      out.push_back(static_cast<char>(hi * 16 + v));
      hi = -1;
    }
  }
  if (hi >= 0) out.push_back(static_cast<char>(hi * 16));
  return out;
}

std::string ascii85_decode(std::string_view in) {
  std::string out;
  std::uint32_t group[5];
  int n = 0;
  auto flush = [&](int count) {
    for (int k = count; k < 5; ++k) group[k] = 84;
    std::uint64_t v = 0;
    for (int k = 0; k < 5; ++k) v = v * 85 + group[k];
    for (int k = 0; k < count - 1; ++k) out.push_back(static_cast<char>((v >> (24 - 8 * k)) & 0xff));
  };
  for (std::size_t i = 0; i < in.size(); ++i) {
    const char ch = in[i];
    if (ch == '~') break;
    if (is_pdf_space(static_cast<unsigned char>(ch))) continue;
    if (ch == 'z' && n == 0) {
      out.append(4, '\0');
      continue;
    }
    if (ch < '!' || ch > 'u') throw ParseError("invalid ASCII85 data");
    group[n++] = static_cast<std::uint32_t>(ch - '!');
    if (n == 5) {
      flush(5);
      n = 0;
    }
  }
  if (n > 1) flush(n);
  return out;
}

std::vector<std::string> filter_names(const Dict& d) {
  std::vector<std::string> names;
  if (const Object* f = dict_get(&d, "Filter")) {
    if (const Name* n = f->name()) names.push_back(n->value);
    if (const Array* a = f->array()) {
      for (const Object& o : *a) {
        if (const Name* n = o.name()) names.push_back(n->value);
      }
    }
  }
  return names;
}

std::string decode_stream(const Stream& s) {
  std::string data = s.raw;
  for (const std::string& f : filter_names(s.dict)) {
    if (f == "FlateDecode" || f == "Fl") {
      data = inflate_bytes(data);
    } else if (f == "ASCIIHexDecode" || f == "AHx") {
      data = ascii_hex_decode(data);
    } else if (f == "ASCII85Decode" || f == "A85") {
      data = ascii85_decode(data);
    } else {
      throw ParseError("unsupported stream filter /" + f);
    }
  }
  return data;
}

// ---------------------------------------------------------------------------
// Fonts

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else {
    out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  }
}

std::string utf16be_to_utf8(std::string_view bytes) {
  std::string out;
  for (std::size_t i = 0; i + 1 < bytes.size(); i += 2) {
    std::uint32_t u = (static_cast<unsigned char>(bytes[i]) << 8) | static_cast<unsigned char>(bytes[i + 1]);
    if (u >= 0xd800 && u < 0xdc00 && i + 3 < bytes.size()) {
      const std::uint32_t lo =
          (static_cast<unsigned char>(bytes[i + 2]) << 8) | static_cast<unsigned char>(bytes[i + 3]);
      if (lo >= 0xdc00 && lo < 0xe000) {
        u = 0x10000 + ((u - 0xd800) << 10) + (lo - 0xdc00);
        i += 2;
      }
    }
    append_utf8(out, u);
  }
  return out;
}

std::uint32_t winansi_codepoint(unsigned char b) {
  static const std::uint16_t high[32] = {
      0x20ac, 0,      0x201a, 0x0192, 0x201e, 0x2026, 0x2020, 0x2021, 0x02c6, 0x2030, 0x0160,
      0x2039, 0x0152, 0,      0x017d, 0,      0,      0x2018, 0x2019, 0x201c, 0x201d, 0x2022,
      0x2013, 0x2014, 0x02dc, 0x2122, 0x0161, 0x203a, 0x0153, 0,      0x017e, 0x0178};
  if (b >= 0x80 && b < 0xa0) return high[b - 0x80];
  return b;
}

std::optional<std::uint32_t> glyph_name_codepoint(std::string_view g) {
  static const std::unordered_map<std::string_view, std::uint32_t> names = {
      {"space", ' '},        {"exclam", '!'},        {"quotedbl", '"'},     {"numbersign", '#'},
      {"dollar", '$'},       {"percent", '%'},       {"ampersand", '&'},    {"quotesingle", '\''},
      {"parenleft", '('},    {"parenright", ')'},    {"asterisk", '*'},     {"plus", '+'},
      {"comma", ','},        {"hyphen", '-'},        {"period", '.'},       {"slash", '/'},
      {"zero", '0'},         {"one", '1'},           {"two", '2'},          {"three", '3'},
      {"four", '4'},         {"five", '5'},          {"six", '6'},          {"seven", '7'},
      {"eight", '8'},        {"nine", '9'},          {"colon", ':'},        {"semicolon", ';'},
      {"less", '<'},         {"equal", '='},         {"greater", '>'},      {"question", '?'},
      {"at", '@'},           {"bracketleft", '['},   {"backslash", '\\'},   {"bracketright", ']'},
      {"underscore", '_'},   {"quoteleft", 0x2018},  {"quoteright", 0x2019}, {"quotedblleft", 0x201c},
      {"quotedblright", 0x201d}, {"endash", 0x2013}, {"emdash", 0x2014},    {"bullet", 0x2022},
      {"ellipsis", 0x2026},  {"fi", 0xfb01},         {"fl", 0xfb02},        {"Euro", 0x20ac},
      {"degree", 0xb0},      {"copyright", 0xa9},    {"registered", 0xae},  {"trademark", 0x2122},
  };
  if (g.size() == 1 && std::isalpha(static_cast<unsigned char>(g[0]))) return static_cast<unsigned char>(g[0]);
  if (auto it = names.find(g); it != names.end()) return it->second;
  if (g.size() == 7 && g.substr(0, 3) == "uni") {
    std::uint32_t v = 0;
    for (char ch : g.substr(3)) {
      const int h = hex_value(static_cast<unsigned char>(ch));
      if (h < 0) return std::nullopt;
      v = v * 16 + static_cast<std::uint32_t>(h);
    }
    return v;
  }
  return std::nullopt;
}

struct Font {
  int code_bytes = 1;
  std::map<std::uint32_t, std::string> to_unicode;
  std::map<std::uint32_t, std::string> differences;
  std::map<std::uint32_t, double> widths;  // glyph units (1/1000 em)
  double default_width = 500;
  bool decodable = true;
};

struct Matrix {
  double a = 1, b = 0, c = 0, d = 1, e = 0, f = 0;

  // Row-vector convention: this applied first, then rhs.
  Matrix operator*(const Matrix& m) const {
    return {a * m.a + b * m.c,       a * m.b + b * m.d,       c * m.a + d * m.c,
            c * m.b + d * m.d,       e * m.a + f * m.c + m.e, e * m.b + f * m.d + m.f};
  }
  static Matrix translate(double tx, double ty) { return {1, 0, 0, 1, tx, ty}; }
};

}  // namespace

// ---------------------------------------------------------------------------

struct Document::Impl {
  std::string data;
  std::unordered_map<int, Object> objects;
  std::vector<std::pair<const Dict*, const Dict*>> pages;  // page dict, effective resources
  std::vector<Object> page_storage;
  mutable std::map<const Dict*, std::shared_ptr<Font>> font_cache;

  const Object& resolve(const Object& o, int depth = 0) const {
    static const Object null_object;
    if (const Ref* r = o.ref()) {
      if (depth > 32) return null_object;
      auto it = objects.find(r->num);
      if (it == objects.end()) return null_object;
      return resolve(it->second, depth + 1);
    }
    return o;
  }
  const Dict* resolve_dict(const Object* o) const { return o ? resolve(*o).dict() : nullptr; }
  const Array* resolve_array(const Object* o) const { return o ? resolve(*o).array() : nullptr; }
  std::optional<double> resolve_number(const Object* o) const {
    if (!o) return std::nullopt;
    if (const double* d = resolve(*o).number()) return *d;
    return std::nullopt;
  }

  void scan_objects();
  void expand_object_streams();
  const Dict* find_catalog(bool& encrypted) const;
  void collect_pages(const Object& node, const Dict* inherited_resources, std::set<const void*>& seen,
                     int depth);
  std::shared_ptr<Font> load_font(const Dict* font_dict) const;
  void run_content(std::string_view content, const Dict* resources, Matrix ctm,
                   std::vector<TextRun>& runs, std::vector<std::string>& warnings, int depth) const;
};

void Document::Impl::scan_objects() {
  const std::string_view view(data);
  std::size_t at = 0;
  while ((at = view.find("obj", at)) != std::string_view::npos) {
    const std::size_t kw = at;
    at += 3;
    if (at < view.size() && is_regular(static_cast<unsigned char>(view[at]))) continue;  // "objects"
    // Walk back over "<num> <gen> ".
    std::size_t p = kw;
    auto skip_back_space = [&] {
      while (p > 0 && is_pdf_space(static_cast<unsigned char>(view[p - 1]))) --p;
    };
    auto digits_back = [&] {
      const std::size_t end = p;
      while (p > 0 && std::isdigit(static_cast<unsigned char>(view[p - 1]))) --p;
      return end - p;
    };
    skip_back_space();
    if (p == kw) continue;
    const std::size_t gen_end = p;
    if (digits_back() == 0) continue;
    const std::size_t gen_begin = p;
    skip_back_space();
    if (p == gen_begin) continue;
    const std::size_t num_end = p;
    if (digits_back() == 0) continue;
    if (p > 0 && is_regular(static_cast<unsigned char>(view[p - 1]))) continue;
    const int num = std::atoi(std::string(view.substr(p, num_end - p)).c_str());
    (void)gen_end;

    try {
      Parser parser(view, at);
      Object obj = parser.parse();
      const std::size_t after_obj = parser.pos();
      Object next = parser.parse();
      if (const Keyword* k = next.keyword(); k && k->value == "stream" && obj.dict()) {
        std::size_t start = parser.pos();
        if (start < view.size() && view[start] == '\r') ++start;
        if (start < view.size() && view[start] == '\n') ++start;
        std::optional<std::size_t> length;
        if (const Object* len = dict_get(obj.dict(), "Length")) {
          if (const double* d = len->number(); d && *d >= 0) length = static_cast<std::size_t>(*d);
        }
        std::size_t end = std::string_view::npos;
        if (length && start + *length <= view.size()) {
          Parser check(view, start + *length);
          check.skip_space();
          if (view.compare(check.pos(), 9, "endstream") == 0) end = start + *length;
        }
        if (end == std::string_view::npos) {
          end = view.find("endstream", start);
          if (end == std::string_view::npos) end = view.size();
          std::size_t trimmed = end;
          if (trimmed > start && view[trimmed - 1] == '\n') --trimmed;
          if (trimmed > start && view[trimmed - 1] == '\r') --trimmed;
          end = trimmed;
        }
        auto stream = std::make_shared<Stream>();
        stream->dict = *obj.dict();
        stream->raw.assign(view.substr(start, end - start));
        objects[num] = Object{std::move(stream)};
        at = end;
      } else {
        objects[num] = std::move(obj);
        at = after_obj;
      }
    } catch (const ParseError&) {
      // Damaged object; keep scanning.
    }
  }
}

void Document::Impl::expand_object_streams() {
  std::vector<std::pair<int, Object>> found;
  for (const auto& [num, obj] : objects) {
    const Stream* s = obj.stream();
    if (!s) continue;
    const Object* type = dict_get(&s->dict, "Type");
    if (!type || !type->name() || type->name()->value != "ObjStm") continue;
    const auto n = resolve_number(dict_get(&s->dict, "N"));
    const auto first = resolve_number(dict_get(&s->dict, "First"));
    if (!n || !first) continue;
    std::string decoded;
    try {
      decoded = decode_stream(*s);
    } catch (const ParseError&) {
      continue;
    }
    Parser header(decoded);
    for (int i = 0; i < static_cast<int>(*n); ++i) {
      try {
        Object objnum = header.parse();
        Object offset = header.parse();
        if (!objnum.number() || !offset.number()) break;
        const auto off = static_cast<std::size_t>(*first + *offset.number());
        if (off >= decoded.size()) continue;
        Parser body(decoded, off);
        found.emplace_back(static_cast<int>(*objnum.number()), body.parse());
      } catch (const ParseError&) {
        break;
      }
    }
  }
  for (auto& [num, obj] : found) objects.try_emplace(num, std::move(obj));
}

const Dict* Document::Impl::find_catalog(bool& encrypted) const {
  encrypted = false;
  const std::string_view view(data);
  std::vector<const Dict*> trailers;
  std::vector<Object> trailer_storage;
  std::size_t at = 0;
  while ((at = view.find("trailer", at)) != std::string_view::npos) {
    at += 7;
    try {
      Parser p(view, at);
      Object t = p.parse();
      if (t.dict()) trailer_storage.push_back(std::move(t));
    } catch (const ParseError&) {
    }
  }
  for (const Object& t : trailer_storage) trailers.push_back(t.dict());
  for (const auto& [num, obj] : objects) {
    const Dict* d = obj.dict();
    const Object* type = dict_get(d, "Type");
    if (obj.stream() && type && type->name() && type->name()->value == "XRef") trailers.push_back(d);
  }
  const Dict* catalog = nullptr;
  for (auto it = trailers.rbegin(); it != trailers.rend(); ++it) {
    if (dict_get(*it, "Encrypt")) encrypted = true;
    if (!catalog) catalog = resolve_dict(dict_get(*it, "Root"));
  }
  if (!catalog) {
    for (const auto& [num, obj] : objects) {
      const Object* type = dict_get(obj.dict(), "Type");
      if (type && type->name() && type->name()->value == "Catalog") return obj.dict();
    }
  }
  return catalog;
}

void Document::Impl::collect_pages(const Object& node, const Dict* inherited,
                                   std::set<const void*>& seen, int depth) {
  const Dict* d = resolve(node).dict();
  if (!d || depth > 64 || !seen.insert(d).second) return;
  const Dict* resources = resolve_dict(dict_get(d, "Resources"));
  if (!resources) resources = inherited;
  const Object* type = dict_get(d, "Type");
  const bool is_page = (type && type->name() && type->name()->value == "Page") || !dict_get(d, "Kids");
  if (is_page) {
    pages.emplace_back(d, resources);
    return;
  }
  if (const Array* kids = resolve_array(dict_get(d, "Kids"))) {
    for (const Object& kid : *kids) collect_pages(kid, resources, seen, depth + 1);
  }
}

namespace {

std::uint32_t code_value(std::string_view bytes) {
  std::uint32_t v = 0;
  for (char ch : bytes) v = (v << 8) | static_cast<unsigned char>(ch);
  return v;
}

void parse_cmap(std::string_view cmap, Font& font) {
  Parser p(cmap);
  std::vector<Object> operands;
  while (!p.eof()) {
    Object o;
    try {
      o = p.parse();
    } catch (const ParseError&) {
      break;
    }
    const Keyword* k = o.keyword();
    if (!k) {
      operands.push_back(std::move(o));
      continue;
    }
    if (k->value == "endcodespacerange") {
      for (const Object& op : operands) {
        if (const String* s = op.string(); s && !s->bytes.empty()) {
          font.code_bytes = static_cast<int>(s->bytes.size());
        }
      }
    } else if (k->value == "endbfchar") {
      for (std::size_t i = 0; i + 1 < operands.size(); i += 2) {
        const String* src = operands[i].string();
        const String* dst = operands[i + 1].string();
        if (src && dst) font.to_unicode[code_value(src->bytes)] = utf16be_to_utf8(dst->bytes);
      }
    } else if (k->value == "endbfrange") {
      for (std::size_t i = 0; i + 2 < operands.size(); i += 3) {
        const String* lo = operands[i].string();
        const String* hi = operands[i + 1].string();
        if (!lo || !hi) continue;
        const std::uint32_t a = code_value(lo->bytes);
        const std::uint32_t b = code_value(hi->bytes);
        if (b < a || b - a > 0xffff) continue;
        if (const String* dst = operands[i + 2].string()) {
          std::string base = dst->bytes;
          for (std::uint32_t c = a; c <= b; ++c) {
            font.to_unicode[c] = utf16be_to_utf8(base);
            if (!base.empty()) base.back() = static_cast<char>(static_cast<unsigned char>(base.back()) + 1);
          }
        } else if (const Array* arr = operands[i + 2].array()) {
          for (std::uint32_t c = a; c <= b && c - a < arr->size(); ++c) {
            if (const String* s = (*arr)[c - a].string()) font.to_unicode[c] = utf16be_to_utf8(s->bytes);
          }
        }
      }
    }
    if (k->value.rfind("begin", 0) == 0 || k->value.rfind("end", 0) == 0) operands.clear();
  }
}

}  // namespace

std::shared_ptr<Font> Document::Impl::load_font(const Dict* fd) const {
  if (auto it = font_cache.find(fd); it != font_cache.end()) return it->second;
  auto font = std::make_shared<Font>();
  font_cache[fd] = font;
  if (!fd) return font;

  const Object* subtype = dict_get(fd, "Subtype");
  const bool type0 = subtype && subtype->name() && subtype->name()->value == "Type0";
  if (type0) {
    font->code_bytes = 2;
    font->default_width = 1000;
    if (const Array* desc = resolve_array(dict_get(fd, "DescendantFonts")); desc && !desc->empty()) {
      const Dict* cid = resolve(desc->front()).dict();
      if (auto dw = resolve_number(dict_get(cid, "DW"))) font->default_width = *dw;
      if (const Array* w = resolve_array(dict_get(cid, "W"))) {
        for (std::size_t i = 0; i < w->size();) {
          const auto c1 = resolve_number(&(*w)[i]);
          if (!c1 || i + 1 >= w->size()) break;
          if (const Array* ws = resolve(( *w)[i + 1]).array()) {
            for (std::size_t k = 0; k < ws->size(); ++k) {
              if (auto v = resolve_number(&(*ws)[k])) font->widths[static_cast<std::uint32_t>(*c1) + k] = *v;
            }
            i += 2;
          } else {
            const auto c2 = resolve_number(&(*w)[i + 1]);
            const auto v = i + 2 < w->size() ? resolve_number(&(*w)[i + 2]) : std::nullopt;
            if (!c2 || !v) break;
            for (auto c = static_cast<std::uint32_t>(*c1); c <= static_cast<std::uint32_t>(*c2) && c - *c1 < 65536; ++c) {
              font->widths[c] = *v;
            }
            i += 3;
          }
        }
      }
    }
  } else {
    const auto first = resolve_number(dict_get(fd, "FirstChar"));
    if (const Array* w = resolve_array(dict_get(fd, "Widths")); w && first) {
      for (std::size_t k = 0; k < w->size(); ++k) {
        if (auto v = resolve_number(&(*w)[k])) font->widths[static_cast<std::uint32_t>(*first) + k] = *v;
      }
    }
    if (const Dict* enc = resolve_dict(dict_get(fd, "Encoding"))) {
      if (const Array* diffs = resolve_array(dict_get(enc, "Differences"))) {
        std::uint32_t code = 0;
        for (const Object& o : *diffs) {
          if (const double* n = o.number()) {
            code = static_cast<std::uint32_t>(*n);
          } else if (const Name* g = o.name()) {
            if (auto cp = glyph_name_codepoint(g->value)) {
              std::string s;
              append_utf8(s, *cp);
              font->differences[code] = s;
            }
            ++code;
          }
        }
      }
    }
  }

  if (const Object* tu = dict_get(fd, "ToUnicode")) {
    if (const Stream* s = resolve(*tu).stream()) {
      try {
        parse_cmap(decode_stream(*s), *font);
      } catch (const ParseError&) {
      }
    }
  }
  if (type0 && font->to_unicode.empty()) font->decodable = false;
  return font;
}

namespace {

struct TextState {
  Matrix tm;
  Matrix tlm;
  std::shared_ptr<Font> font;
  double font_size = 0;
  double char_spacing = 0;
  double word_spacing = 0;
  double horizontal_scale = 1;
  double leading = 0;
  double rise = 0;
};

struct GraphicsState {
  Matrix ctm;
  TextState text;
};

double number_at(const std::vector<Object>& ops, std::size_t i) {
  if (i < ops.size()) {
    if (const double* d = ops[i].number()) return *d;
  }
  return 0.0;
}

}  // namespace

void Document::Impl::run_content(std::string_view content, const Dict* resources, Matrix ctm,
                                 std::vector<TextRun>& runs, std::vector<std::string>& warnings,
                                 int depth) const {
  GraphicsState gs;
  gs.ctm = ctm;
  std::vector<GraphicsState> stack;
  std::vector<Object> ops;
  std::set<std::string> warned_fonts;

  const Dict* fonts = resolve_dict(dict_get(resources, "Font"));
  const Dict* xobjects = resolve_dict(dict_get(resources, "XObject"));

  auto decode = [&](const std::string& bytes, double& width_units, std::size_t& spaces) {
    std::string out;
    const Font& font = *gs.text.font;
    const std::size_t step = static_cast<std::size_t>(std::max(1, font.code_bytes));
    for (std::size_t i = 0; i + step <= bytes.size(); i += step) {
      const std::uint32_t code = code_value(std::string_view(bytes).substr(i, step));
      auto w = font.widths.find(code);
      width_units += w != font.widths.end() ? w->second : font.default_width;
      if (step == 1 && code == 32) ++spaces;
      if (auto it = font.to_unicode.find(code); it != font.to_unicode.end()) {
        out += it->second;
      } else if (auto d = font.differences.find(code); d != font.differences.end()) {
        out += d->second;
      } else if (step == 1) {
        if (const std::uint32_t cp = winansi_codepoint(static_cast<unsigned char>(code)); cp >= 0x20) {
          append_utf8(out, cp);
        }
      }
    }
    return out;
  };

  // Paints `bytes` at the current text position and advances it.
  auto show = [&](const std::string& bytes, std::string& pending, double& pending_x,
                  double& pending_y, double& pending_size, double& pending_width, bool& have_pending) {
    TextState& ts = gs.text;
    if (!ts.font) ts.font = std::make_shared<Font>();
    if (!ts.font->decodable) return;
    double width_units = 0;
    std::size_t spaces = 0;
    const std::string text = decode(bytes, width_units, spaces);
    const std::size_t glyphs = bytes.size() / static_cast<std::size_t>(std::max(1, ts.font->code_bytes));
    const double tx = (width_units / 1000.0 * ts.font_size + ts.char_spacing * static_cast<double>(glyphs) +
                       ts.word_spacing * static_cast<double>(spaces)) *
                      ts.horizontal_scale;
    const Matrix trm = Matrix::translate(0, ts.rise) * ts.tm * gs.ctm;
    const double scale_x = std::hypot(trm.a, trm.b);
    const double size = ts.font_size * std::hypot(trm.c, trm.d);
    if (!have_pending) {
      pending_x = trm.e;
      pending_y = trm.f;
      pending_size = size;
      pending_width = 0;
      have_pending = true;
    }
    pending += text;
    pending_width += tx * scale_x;
    ts.tm = Matrix::translate(tx, 0) * ts.tm;
  };

  auto emit = [&](std::string& text, double x, double y, double size, double width) {
    if (!text.empty()) runs.push_back({x, y, std::abs(size), width, std::move(text)});
    text.clear();
  };

  auto set_td = [&](double tx, double ty) {
    gs.text.tlm = Matrix::translate(tx, ty) * gs.text.tlm;
    gs.text.tm = gs.text.tlm;
  };

  Parser p(content);
  while (!p.eof()) {
    Object o;
    try {
      o = p.parse();
    } catch (const ParseError& e) {
      warnings.push_back(std::string("content stream: ") + e.what());
      break;
    }
    const Keyword* kw = o.keyword();
    if (!kw) {
      ops.push_back(std::move(o));
      continue;
    }
    const std::string& op = kw->value;
    TextState& ts = gs.text;

    if (op == "q") {
      stack.push_back(gs);
    } else if (op == "Q") {
      if (!stack.empty()) {
        gs = stack.back();
        stack.pop_back();
      }
    } else if (op == "cm" && ops.size() >= 6) {
      const Matrix m{number_at(ops, 0), number_at(ops, 1), number_at(ops, 2),
                     number_at(ops, 3), number_at(ops, 4), number_at(ops, 5)};
      gs.ctm = m * gs.ctm;
    } else if (op == "BT") {
      ts.tm = Matrix{};
      ts.tlm = Matrix{};
    } else if (op == "Tf" && ops.size() >= 2) {
      ts.font_size = number_at(ops, 1);
      const Name* fname = ops[0].name();
      const Dict* fd = fname ? resolve_dict(dict_get(fonts, fname->value)) : nullptr;
      ts.font = load_font(fd);
      if (fname && !ts.font->decodable && warned_fonts.insert(fname->value).second) {
        warnings.push_back("font /" + fname->value + " has no ToUnicode map; its text is skipped");
      }
    } else if (op == "Td" && ops.size() >= 2) {
      set_td(number_at(ops, 0), number_at(ops, 1));
    } else if (op == "TD" && ops.size() >= 2) {
      ts.leading = -number_at(ops, 1);
      set_td(number_at(ops, 0), number_at(ops, 1));
    } else if (op == "Tm" && ops.size() >= 6) {
      ts.tlm = Matrix{number_at(ops, 0), number_at(ops, 1), number_at(ops, 2),
                      number_at(ops, 3), number_at(ops, 4), number_at(ops, 5)};
      ts.tm = ts.tlm;
    } else if (op == "T*") {
      set_td(0, -ts.leading);
    } else if (op == "Tc") {
      ts.char_spacing = number_at(ops, 0);
    } else if (op == "Tw") {
      ts.word_spacing = number_at(ops, 0);
    } else if (op == "Tz") {
      ts.horizontal_scale = number_at(ops, 0) / 100.0;
    } else if (op == "TL") {
      ts.leading = number_at(ops, 0);
    } else if (op == "Ts") {
      ts.rise = number_at(ops, 0);
    } else if (op == "Tj" || op == "'" || op == "\"" || op == "TJ") {
      if (op == "\"" && ops.size() >= 3) {
        ts.word_spacing = number_at(ops, 0);
        ts.char_spacing = number_at(ops, 1);
      }
      if (op == "'" || op == "\"") set_td(0, -ts.leading);
      std::string pending;
      double px = 0, py = 0, psize = 0, pwidth = 0;
      bool have = false;
      if (op == "TJ") {
        const Array* arr = ops.empty() ? nullptr : ops.back().array();
        if (arr) {
          for (const Object& el : *arr) {
            if (const String* s = el.string()) {
              show(s->bytes, pending, px, py, psize, pwidth, have);
            } else if (const double* adj = el.number()) {
              const double tx = -*adj / 1000.0 * ts.font_size * ts.horizontal_scale;
              const Matrix m = ts.tm * gs.ctm;
              const double device = tx * std::hypot(m.a, m.b);
              ts.tm = Matrix::translate(tx, 0) * ts.tm;
              if (have) {
                pwidth += device;
                // A kerning gap wider than ~0.2 em separates words.
                if (-*adj > 200 && !pending.empty() && pending.back() != ' ') pending.push_back(' ');
              }
            }
          }
        }
      } else if (!ops.empty()) {
        if (const String* s = ops.back().string()) show(s->bytes, pending, px, py, psize, pwidth, have);
      }
      emit(pending, px, py, psize, pwidth);
    } else if (op == "Do" && !ops.empty() && depth < 8) {
      const Name* xname = ops[0].name();
      const Object* xo = xname ? dict_get(xobjects, xname->value) : nullptr;
      const Stream* form = xo ? resolve(*xo).stream() : nullptr;
      const Object* st = form ? dict_get(&form->dict, "Subtype") : nullptr;
      if (st && st->name() && st->name()->value == "Form") {
        Matrix fm;
        if (const Array* m = resolve_array(dict_get(&form->dict, "Matrix")); m && m->size() == 6) {
          fm = {number_at(*m, 0), number_at(*m, 1), number_at(*m, 2),
                number_at(*m, 3), number_at(*m, 4), number_at(*m, 5)};
        }
        const Dict* form_res = resolve_dict(dict_get(&form->dict, "Resources"));
        try {
          run_content(decode_stream(*form), form_res ? form_res : resources, fm * gs.ctm, runs,
                      warnings, depth + 1);
        } catch (const ParseError& e) {
          warnings.push_back("form XObject /" + xname->value + ": " + e.what());
        }
      }
    } else if (op == "BI") {
      // Inline image: skip binary payload up to "EI".
      const std::size_t id = content.find("ID", p.pos());
      if (id == std::string_view::npos) break;
      std::size_t at = id + 3;
      while (true) {
        const std::size_t ei = content.find("EI", at);
        if (ei == std::string_view::npos) {
          p.seek(content.size());
          break;
        }
        const bool before = ei > 0 && is_pdf_space(static_cast<unsigned char>(content[ei - 1]));
        const bool after = ei + 2 >= content.size() || is_pdf_space(static_cast<unsigned char>(content[ei + 2]));
        if (before && after) {
          p.seek(ei + 2);
          break;
        }
        at = ei + 2;
      }
    }
    ops.clear();
  }
}

// ---------------------------------------------------------------------------

Document::Document(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
Document::Document(Document&&) noexcept = default;
Document& Document::operator=(Document&&) noexcept = default;
Document::~Document() = default;

Document Document::parse(std::span<const std::uint8_t> bytes) {
  auto impl = std::make_unique<Impl>();
  impl->data.assign(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  const std::string_view head = std::string_view(impl->data).substr(0, 1024);
  if (head.find("%PDF-") == std::string_view::npos) throw ParseError("missing %PDF- header");

  impl->scan_objects();
  impl->expand_object_streams();
  bool encrypted = false;
  const Dict* catalog = impl->find_catalog(encrypted);
  if (encrypted) throw ParseError("document is encrypted");
  if (!catalog) throw ParseError("no document catalog found");

  if (const Object* pages = dict_get(catalog, "Pages")) {
    std::set<const void*> seen;
    impl->collect_pages(*pages, nullptr, seen, 0);
  }
  return Document(std::move(impl));
}

std::size_t Document::page_count() const { return impl_->pages.size(); }

std::vector<TextRun> Document::text_runs(std::size_t page, std::vector<std::string>& warnings) const {
  std::vector<TextRun> runs;
  if (page >= impl_->pages.size()) return runs;
  const auto [page_dict, resources] = impl_->pages[page];
  const Object* contents = dict_get(page_dict, "Contents");
  if (!contents) return runs;

  std::string content;
  auto append = [&](const Object& o) {
    const Stream* s = impl_->resolve(o).stream();
    if (!s) return;
    try {
      content += decode_stream(*s);
      content.push_back('\n');
    } catch (const ParseError& e) {
      warnings.push_back("page " + std::to_string(page + 1) + ": " + e.what());
    }
  };
  const Object& resolved = impl_->resolve(*contents);
  if (const Array* parts = resolved.array()) {
    for (const Object& part : *parts) append(part);
  } else {
    append(resolved);
  }
  impl_->run_content(content, resources, Matrix{}, runs, warnings, 0);
  return runs;
}

}  // namespace tcfd::pdf
