#pragma once

#include <string>
#include <string_view>

#include "dream/errors.hpp"
#include "dream/util.hpp"

namespace dream {

struct PromptTemplate {
  std::string system_text;
  std::string user_text;  // carries {sentence}, {ent1}, {ent2}
};

inline constexpr const char* kDefaultSystemPrompt =
    "You are an expert in biomedical language understanding. You carefully assess relationships between "
    "pharmaceutical entities based on the context of the sentence and your knowledge of drug interactions and "
    "classifications.";

inline constexpr const char* kDefaultUserPrompt =
    R"PROMPT(Determine which of the two following semantic relationships best describes the relationship between the two highlighted drug entities in the sentence.

Available relation types:

1. cause-effect:

- Definition: One drug causes, leads to, or affects the function or effectiveness of the other.

- Example: "Combining warfarin with aspirin can increase the risk of bleeding."
→ warfarin <cause-effect> aspirin

2. component-whole:

- Definition: One drug is a part or ingredient of a drug combination or formulation.

- Example: "Vitamin B complex includes B1, B2, and B6."
→ B1 <component-whole> Vitamin B complex

Sentence: "{sentence}"

Entity 1 (e1): "{ent1}"

Entity 2 (e2): "{ent2}"

Choose the most suitable label: cause-effect or component-whole.

Only return one of these labels. No explanation needed.)PROMPT";

inline PromptTemplate default_prompt_template() { return {kDefaultSystemPrompt, kDefaultUserPrompt}; }

// Plain-text template file: system text, a line containing exactly ---,
// then the user text.
inline PromptTemplate parse_prompt_template(std::string_view content) {
  if (content.substr(0, 4) == "---\n") throw ConfigError("prompt template: empty system section");
  const std::string separator = "\n---\n";
  const std::size_t pos = content.find(separator);
  if (pos == std::string_view::npos) throw ConfigError("prompt template: missing --- separator line");
  PromptTemplate t;
  t.system_text = std::string(content.substr(0, pos));
  t.user_text = std::string(content.substr(pos + separator.size()));
  if (!t.user_text.empty() && t.user_text.back() == '\n') t.user_text.pop_back();
  return t;
}

struct RenderedPrompt {
  std::string system_text;
  std::string user_text;
};

inline RenderedPrompt render_prompt(const PromptTemplate& tpl, std::string_view sentence, std::string_view ent1,
                                    std::string_view ent2) {
  if (sentence.empty()) throw Error("render_prompt: empty sentence");
  if (ent1.empty()) throw Error("render_prompt: empty ent1");
  if (ent2.empty()) throw Error("render_prompt: empty ent2");
  // One left-to-right pass over the template, matching all three placeholders
  // at once; substituted values are never rescanned, so placeholder-shaped
  // text inside the values stays untouched.
  const std::string_view keys[3] = {"{sentence}", "{ent1}", "{ent2}"};
  const std::string_view values[3] = {sentence, ent1, ent2};
  bool found[3] = {false, false, false};
  const std::string_view text = tpl.user_text;
  std::string user;
  user.reserve(text.size() + sentence.size() + ent1.size() + ent2.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t hit = std::string_view::npos;
    std::size_t which = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      const std::size_t h = text.find(keys[k], pos);
      if (h < hit) {
        hit = h;
        which = k;
      }
    }
    if (hit == std::string_view::npos) break;
    user.append(text.substr(pos, hit - pos));
    user.append(values[which]);
    found[which] = true;
    pos = hit + keys[which].size();
  }
  user.append(text.substr(pos));
  if (!found[0]) throw Error("render_prompt: template lacks {sentence}");
  if (!found[1]) throw Error("render_prompt: template lacks {ent1}");
  if (!found[2]) throw Error("render_prompt: template lacks {ent2}");
  return {tpl.system_text, std::move(user)};
}

enum class LlmLabel { kCauseEffect, kComponentWhole, kIndeterminate };

inline const char* to_string(LlmLabel label) {
  switch (label) {
    case LlmLabel::kCauseEffect: return "cause-effect";
    case LlmLabel::kComponentWhole: return "component-whole";
    case LlmLabel::kIndeterminate: return "indeterminate";
  }
  return "indeterminate";
}

// Exact match after trimming and lowercasing; otherwise a unique substring
// mention decides; anything else is indeterminate.
inline LlmLabel parse_label(std::string_view raw) {
  const std::string text = ascii_lower(trim(raw));
  if (text == "cause-effect") return LlmLabel::kCauseEffect;
  if (text == "component-whole") return LlmLabel::kComponentWhole;
  const bool ce = text.find("cause-effect") != std::string::npos;
  const bool cw = text.find("component-whole") != std::string::npos;
  if (ce && !cw) return LlmLabel::kCauseEffect;
  if (cw && !ce) return LlmLabel::kComponentWhole;
  return LlmLabel::kIndeterminate;
}

}  // namespace dream
