#pragma once

#include <array>
#include <cctype>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "dream/errors.hpp"
#include "dream/util.hpp"

namespace dream {

enum class RelationLabel { kCauseEffect = 0, kComponentWhole = 1, kOther = 2 };

inline constexpr std::size_t kNumClasses = 3;

inline const char* to_string(RelationLabel label) {
  switch (label) {
    case RelationLabel::kCauseEffect: return "cause-effect";
    case RelationLabel::kComponentWhole: return "component-whole";
    case RelationLabel::kOther: return "other";
  }
  return "other";
}

inline RelationLabel relation_label_from_string(std::string_view s) {
  if (s == "cause-effect") return RelationLabel::kCauseEffect;
  if (s == "component-whole") return RelationLabel::kComponentWhole;
  if (s == "other") return RelationLabel::kOther;
  throw ParseError("unknown relation label: '" + std::string(s) + "'");
}

struct Token {
  std::string text;        // lowercased surface form
  std::size_t char_start;  // offsets into the original text, end exclusive
  std::size_t char_end;
};

struct Sentence {
  std::size_t index;
  std::size_t token_begin;  // half-open token-index interval
  std::size_t token_end;
  std::size_t char_begin;  // half-open character interval
  std::size_t char_end;
};

struct Document {
  std::string id;
  std::string raw_text;
  std::vector<Token> tokens;
  std::vector<Sentence> sentences;
  std::optional<int> year;

  std::string_view sentence_text(const Sentence& s) const {
    return std::string_view(raw_text).substr(s.char_begin, s.char_end - s.char_begin);
  }
};

namespace detail {

inline bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

inline bool is_space_byte(unsigned char c) { return std::isspace(c) != 0; }

}  // namespace detail

// Lowercased word tokens; a '-' stays inside a token only when flanked by
// word characters on both sides. All other punctuation separates tokens and
// is dropped. Offsets index the original text.
inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    if (!detail::is_word_byte(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    const std::size_t start = i++;
    while (i < n) {
      const unsigned char c = static_cast<unsigned char>(text[i]);
      if (detail::is_word_byte(c)) {
        ++i;
      } else if (c == '-' && i + 1 < n && detail::is_word_byte(static_cast<unsigned char>(text[i + 1]))) {
        ++i;
      } else {
        break;
      }
    }
    out.push_back(Token{ascii_lower(text.substr(start, i - start)), start, i});
  }
  return out;
}

// Splits after '.', '!' or '?' when followed by whitespace and an uppercase
// letter, or by end of text. Tokens are never split; every token lands in
// exactly one sentence and empty sentences are not emitted.
inline std::vector<Sentence> segment_sentences(std::string_view text, const std::vector<Token>& tokens) {
  std::vector<std::size_t> boundaries;  // positions just after a terminator
  const std::size_t n = text.size();
  for (std::size_t p = 0; p < n; ++p) {
    const char c = text[p];
    if (c != '.' && c != '!' && c != '?') continue;
    const std::size_t q = p + 1;
    std::size_t r = q;
    while (r < n && detail::is_space_byte(static_cast<unsigned char>(text[r]))) ++r;
    const bool at_end = r == n;
    const bool ws_then_upper = r > q && r < n && std::isupper(static_cast<unsigned char>(text[r]));
    if (at_end || ws_then_upper) boundaries.push_back(q);
  }

  std::vector<Sentence> out;
  std::size_t tok = 0;
  std::size_t boundary_idx = 0;
  while (tok < tokens.size()) {
    // Advance past boundaries that precede the next token.
    while (boundary_idx < boundaries.size() && boundaries[boundary_idx] <= tokens[tok].char_start) ++boundary_idx;
    const std::size_t token_begin = tok;
    std::size_t limit = boundary_idx < boundaries.size() ? boundaries[boundary_idx] : n;
    while (tok < tokens.size() && tokens[tok].char_start < limit) ++tok;
    Sentence s;
    s.index = out.size();
    s.token_begin = token_begin;
    s.token_end = tok;
    s.char_begin = tokens[token_begin].char_start;
    const std::size_t last_end = tokens[tok - 1].char_end;
    s.char_end = (boundary_idx < boundaries.size() && boundaries[boundary_idx] >= last_end) ? boundaries[boundary_idx]
                                                                                            : last_end;
    out.push_back(s);
  }
  return out;
}

inline Document make_document(std::string id, std::string text, std::optional<int> year = std::nullopt) {
  Document doc;
  doc.id = std::move(id);
  doc.raw_text = std::move(text);
  doc.tokens = tokenize(doc.raw_text);
  doc.sentences = segment_sentences(doc.raw_text, doc.tokens);
  doc.year = year;
  return doc;
}

struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct SemevalRecord {
  int id = 0;
  std::string sentence_text;  // tag-free
  CharSpan e1_span;
  CharSpan e2_span;
  std::string raw_label;
  RelationLabel folded_label = RelationLabel::kOther;
};

// Cause-Effect and Component-Whole keep their identity (direction discarded);
// the remaining SemEval relation types fold into Other.
inline RelationLabel fold_label(const std::string& raw_label) {
  if (raw_label == "Other") return RelationLabel::kOther;
  const std::size_t paren = raw_label.find('(');
  if (paren == std::string::npos) throw ParseError("unknown relation label: '" + raw_label + "'");
  const std::string name = raw_label.substr(0, paren);
  const std::string dir = raw_label.substr(paren);
  if (dir != "(e1,e2)" && dir != "(e2,e1)") throw ParseError("unknown relation label: '" + raw_label + "'");
  static const std::unordered_set<std::string> kFoldedToOther = {
      "Content-Container", "Entity-Destination", "Entity-Origin",    "Instrument-Agency",
      "Member-Collection", "Message-Topic",      "Product-Producer",
  };
  if (name == "Cause-Effect") return RelationLabel::kCauseEffect;
  if (name == "Component-Whole") return RelationLabel::kComponentWhole;
  if (kFoldedToOther.count(name)) return RelationLabel::kOther;
  throw ParseError("unknown relation label: '" + raw_label + "'");
}

namespace detail {

struct TaggedSentence {
  std::string text;  // tags removed
  CharSpan e1;
  CharSpan e2;
};

inline TaggedSentence strip_entity_tags(std::string_view tagged, const std::string& where) {
  const auto find_tag = [&](std::string_view tag, std::size_t from) {
    const std::size_t pos = tagged.find(tag, from);
    if (pos == std::string_view::npos) throw ParseError(where + ": missing " + std::string(tag));
    return pos;
  };
  const std::size_t e1_open = find_tag("<e1>", 0);
  const std::size_t e1_close = find_tag("</e1>", e1_open);
  const std::size_t e2_open = find_tag("<e2>", e1_close);
  const std::size_t e2_close = find_tag("</e2>", e2_open);

  TaggedSentence out;
  const std::string_view pre = tagged.substr(0, e1_open);
  const std::string_view e1 = tagged.substr(e1_open + 4, e1_close - e1_open - 4);
  const std::string_view mid = tagged.substr(e1_close + 5, e2_open - e1_close - 5);
  const std::string_view e2 = tagged.substr(e2_open + 4, e2_close - e2_open - 4);
  const std::string_view post = tagged.substr(e2_close + 5);
  out.text.reserve(tagged.size());
  out.text.append(pre).append(e1).append(mid).append(e2).append(post);
  out.e1 = {pre.size(), pre.size() + e1.size()};
  out.e2 = {pre.size() + e1.size() + mid.size(), pre.size() + e1.size() + mid.size() + e2.size()};
  return out;
}

}  // namespace detail

// SemEval 2010 Task 8 distribution format: a numbered, quoted sentence with
// <e1>/<e2> markers, a label line, and an optional Comment line, records
// separated by blank lines.
inline std::vector<SemevalRecord> parse_semeval(std::string_view content) {
  const std::vector<std::string> lines = split_lines(content);
  std::vector<SemevalRecord> out;
  std::size_t i = 0;
  while (i < lines.size()) {
    if (trim(lines[i]).empty()) {
      ++i;
      continue;
    }
    const std::size_t ordinal = out.size() + 1;
    const std::string& head = lines[i];
    std::size_t pos = 0;
    while (pos < head.size() && std::isdigit(static_cast<unsigned char>(head[pos]))) ++pos;
    std::string where = "record " + std::to_string(ordinal);
    if (pos == 0) throw ParseError(where + ": expected a numeric record id");
    const int id = std::stoi(head.substr(0, pos));
    where = "record " + std::to_string(id);
    const std::size_t open_quote = head.find('"', pos);
    const std::size_t close_quote = head.rfind('"');
    if (open_quote == std::string::npos || close_quote <= open_quote)
      throw ParseError(where + ": sentence must be enclosed in double quotes");
    const std::string_view tagged = std::string_view(head).substr(open_quote + 1, close_quote - open_quote - 1);

    SemevalRecord rec;
    rec.id = id;
    auto stripped = detail::strip_entity_tags(tagged, where);
    rec.sentence_text = std::move(stripped.text);
    rec.e1_span = stripped.e1;
    rec.e2_span = stripped.e2;

    ++i;
    while (i < lines.size() && trim(lines[i]).empty()) ++i;
    if (i >= lines.size()) throw ParseError(where + ": missing label line");
    rec.raw_label = std::string(trim(lines[i]));
    rec.folded_label = fold_label(rec.raw_label);
    ++i;
    if (i < lines.size() && trim(lines[i]).substr(0, 7) == "Comment") ++i;
    out.push_back(std::move(rec));
  }
  return out;
}

struct CorpusOptions {
  std::optional<int> min_year;  // drop documents older than this (or undated)
};

// One JSON object per line with keys "id", "text" and optional "year".
inline std::vector<Document> load_corpus(std::istream& in, const CorpusOptions& options = {}) {
  std::vector<Document> out;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("corpus line " + std::to_string(line_no) + ": invalid record: " + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string())
      throw ParseError("corpus line " + std::to_string(line_no) + ": missing required field 'id'");
    if (!j.contains("text") || !j["text"].is_string())
      throw ParseError("corpus line " + std::to_string(line_no) + ": missing required field 'text'");
    const std::string id = j["id"].get<std::string>();
    if (id.empty()) throw ParseError("corpus line " + std::to_string(line_no) + ": empty document id");
    if (!seen_ids.insert(id).second)
      throw ParseError("corpus line " + std::to_string(line_no) + ": duplicate document id '" + id + "'");
    std::optional<int> year;
    if (j.contains("year") && !j["year"].is_null()) {
      if (!j["year"].is_number_integer())
        throw ParseError("corpus line " + std::to_string(line_no) + ": field 'year' must be an integer");
      year = j["year"].get<int>();
    }
    if (options.min_year && (!year || *year < *options.min_year)) continue;
    out.push_back(make_document(id, j["text"].get<std::string>(), year));
  }
  return out;
}

}  // namespace dream
