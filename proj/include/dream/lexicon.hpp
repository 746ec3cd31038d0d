#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dream/corpus.hpp"
#include "dream/errors.hpp"
#include "dream/util.hpp"

namespace dream {

struct LexiconEntry {
  std::string canonical_id;
  std::string preferred_name;
  std::vector<std::string> synonyms;
};

struct DrugLexicon {
  std::vector<LexiconEntry> entries;
  // normalized name (tokenized, space-joined) -> canonical id
  std::map<std::string, std::string> name_to_id;
  // canonical id -> preferred display name
  std::map<std::string, std::string> display_names;
  std::size_t max_name_tokens = 0;

  std::size_t name_count() const { return name_to_id.size(); }
};

namespace detail {

inline std::string normalize_name(std::string_view name) {
  const std::vector<Token> toks = tokenize(name);
  std::vector<std::string> parts;
  parts.reserve(toks.size());
  for (const Token& t : toks) parts.push_back(t.text);
  return join(parts, " ");
}

inline std::size_t name_token_count(const std::string& normalized) {
  return normalized.empty() ? 0 : static_cast<std::size_t>(std::count(normalized.begin(), normalized.end(), ' ')) + 1;
}

}  // namespace detail

// Tab-separated lines: canonical_id, preferred_name, zero or more synonyms.
// Lines starting with '#' are comments. A name claimed by two ids is an error.
inline DrugLexicon load_lexicon(std::string_view content) {
  DrugLexicon lex;
  std::size_t line_no = 0;
  for (const std::string& raw_line : split_lines(content)) {
    ++line_no;
    const std::string_view line = trim(raw_line);
    if (line.empty() || line.front() == '#') continue;
    const std::vector<std::string> cols = split(line, '\t');
    if (cols.size() < 2)
      throw ParseError("lexicon line " + std::to_string(line_no) + ": expected id and preferred name");
    LexiconEntry entry;
    entry.canonical_id = std::string(trim(cols[0]));
    entry.preferred_name = std::string(trim(cols[1]));
    if (entry.canonical_id.empty())
      throw ParseError("lexicon line " + std::to_string(line_no) + ": empty canonical id");
    if (lex.display_names.count(entry.canonical_id))
      throw ParseError("lexicon line " + std::to_string(line_no) + ": duplicate canonical id '" +
                       entry.canonical_id + "'");
    for (std::size_t c = 2; c < cols.size(); ++c) {
      const std::string_view syn = trim(cols[c]);
      if (!syn.empty()) entry.synonyms.emplace_back(syn);
    }

    std::vector<std::string> names;
    names.push_back(entry.preferred_name);
    names.insert(names.end(), entry.synonyms.begin(), entry.synonyms.end());
    for (const std::string& name : names) {
      const std::string norm = detail::normalize_name(name);
      if (norm.empty())
        throw ParseError("lexicon line " + std::to_string(line_no) + ": name '" + name +
                         "' is empty after normalization");
      const auto [it, inserted] = lex.name_to_id.emplace(norm, entry.canonical_id);
      if (!inserted && it->second != entry.canonical_id)
        throw ParseError("lexicon name collision: '" + norm + "' claimed by both '" + it->second + "' and '" +
                         entry.canonical_id + "'");
      lex.max_name_tokens = std::max(lex.max_name_tokens, detail::name_token_count(norm));
    }
    lex.display_names[entry.canonical_id] = entry.preferred_name;
    lex.entries.push_back(std::move(entry));
  }
  if (lex.entries.empty()) throw ParseError("lexicon is empty");
  return lex;
}

struct DrugMention {
  std::string doc_id;
  std::size_t sentence_index = 0;
  std::size_t token_begin = 0;  // half-open token interval
  std::size_t token_end = 0;
  std::string surface;  // original (non-lowercased) text
  std::string canonical_id;
};

// Longest-match, non-overlapping, left-to-right scan over each sentence's
// token sequence; matches never cross sentence boundaries.
inline std::vector<DrugMention> find_mentions(const Document& doc, const DrugLexicon& lexicon) {
  std::vector<DrugMention> out;
  if (lexicon.name_to_id.empty()) return out;
  for (const Sentence& sent : doc.sentences) {
    std::size_t i = sent.token_begin;
    while (i < sent.token_end) {
      const std::size_t max_len = std::min(lexicon.max_name_tokens, sent.token_end - i);
      bool matched = false;
      for (std::size_t len = max_len; len >= 1; --len) {
        std::string key = doc.tokens[i].text;
        for (std::size_t j = 1; j < len; ++j) {
          key += ' ';
          key += doc.tokens[i + j].text;
        }
        const auto it = lexicon.name_to_id.find(key);
        if (it == lexicon.name_to_id.end()) continue;
        DrugMention m;
        m.doc_id = doc.id;
        m.sentence_index = sent.index;
        m.token_begin = i;
        m.token_end = i + len;
        const std::size_t cs = doc.tokens[i].char_start;
        const std::size_t ce = doc.tokens[i + len - 1].char_end;
        m.surface = doc.raw_text.substr(cs, ce - cs);
        m.canonical_id = it->second;
        out.push_back(std::move(m));
        i += len;
        matched = true;
        break;
      }
      if (!matched) ++i;
    }
  }
  return out;
}

}  // namespace dream
