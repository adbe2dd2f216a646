// Copyright 2026 The Marsad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <cstdint>
#include <string>

#include "marsad/embedded_data.hpp"
#include "marsad/error.hpp"
#include "marsad/ingest.hpp"

namespace marsad::ingest {
namespace {

constexpr UChar32 kTatweel = 0x0640;
constexpr UChar32 kAlef = 0x0627;
constexpr UChar32 kAlefHamzaAbove = 0x0623;
constexpr UChar32 kAlefHamzaBelow = 0x0625;
constexpr UChar32 kAlefMadda = 0x0622;
constexpr UChar32 kAlefMaksura = 0x0649;
constexpr UChar32 kYeh = 0x064A;

bool is_arabic_diacritic(UChar32 c) { return c >= 0x064B && c <= 0x065F; }

bool is_arabic_letter_block(UChar32 c) {
  return (c >= 0x0600 && c <= 0x06FF) || (c >= 0x0750 && c <= 0x077F) ||
         (c >= 0x08A0 && c <= 0x08FF) || (c >= 0xFB50 && c <= 0xFDFF) ||
         (c >= 0xFE70 && c <= 0xFEFF);
}

bool is_latin(UChar32 c) {
  UBlockCode block = ublock_getCode(c);
  return block == UBLOCK_BASIC_LATIN || block == UBLOCK_LATIN_1_SUPPLEMENT ||
         block == UBLOCK_LATIN_EXTENDED_A || block == UBLOCK_LATIN_EXTENDED_B ||
         block == UBLOCK_LATIN_EXTENDED_ADDITIONAL || block == UBLOCK_IPA_EXTENSIONS;
}

bool is_control(UChar32 c) {
  int8_t cat = u_charType(c);
  return cat == U_CONTROL_CHAR || cat == U_FORMAT_CHAR;
}

bool is_separator(UChar32 c) {
  if (u_isUWhiteSpace(c) || u_ispunct(c) || is_control(c)) return true;
  int8_t cat = u_charType(c);
  return cat == U_MATH_SYMBOL || cat == U_CURRENCY_SYMBOL || cat == U_MODIFIER_SYMBOL ||
         cat == U_OTHER_SYMBOL;
}

void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  UBool error = false;
  U8_APPEND(reinterpret_cast<uint8_t*>(buf), len, U8_MAX_LENGTH, c, error);
  if (!error) out.append(buf, static_cast<std::size_t>(len));
}

template <typename Fn>
void for_each_codepoint(std::string_view s, Fn&& fn) {
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  auto length = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < length) {
    int32_t start = i;
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) continue;  // ill-formed sequence: dropped
    fn(c, static_cast<std::size_t>(start), static_cast<std::size_t>(i));
  }
}

std::string nfc(const std::string& s) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error(Errc::kInternal, "ICU NFC normalizer unavailable");
  icu::UnicodeString src = icu::UnicodeString::fromUTF8(s);
  if (normalizer->isNormalized(src, status) && U_SUCCESS(status)) return s;
  status = U_ZERO_ERROR;
  icu::UnicodeString dst = normalizer->normalize(src, status);
  if (U_FAILURE(status)) throw Error(Errc::kInternal, "NFC normalization failed");
  std::string out;
  dst.toUTF8String(out);
  return out;
}

// One folding pass: drops control and format characters, applies Arabic
// orthographic folding, lowercases, and collapses whitespace runs.
std::string fold(std::string_view s, bool arabic_rules) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for_each_codepoint(s, [&](UChar32 c, std::size_t, std::size_t) {
    if (u_isUWhiteSpace(c)) {
      pending_space = !out.empty();
      return;
    }
    if (is_control(c)) return;
    if (arabic_rules) {
      if (is_arabic_diacritic(c) || c == kTatweel) return;
      if (c == kAlefHamzaAbove || c == kAlefHamzaBelow || c == kAlefMadda) c = kAlef;
      if (c == kAlefMaksura) c = kYeh;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    append_utf8(out, u_tolower(c));
  });
  return out;
}

void load_stopwords(std::string_view content, StopwordSet& into) {
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty() || line.front() == '#') continue;
    std::string word = normalize_text(line);
    if (!word.empty()) into.insert(std::move(word));
  }
}

}  // namespace

std::string normalize_text(std::string_view text, Lang lang_hint) {
  bool arabic_rules = lang_hint != Lang::kEn;
  std::string current = nfc(std::string(text));
  // Folding can expose new compositions (and vice versa), so iterate to a
  // fixpoint; this is what makes the function idempotent.
  for (int round = 0; round < 8; ++round) {
    std::string next = nfc(fold(current, arabic_rules));
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

std::vector<std::string> tokenize(std::string_view norm_text, const StopwordSet& stopwords) {
  std::vector<std::string> tokens;
  std::string token;
  std::size_t codepoints = 0;
  auto flush = [&] {
    if (codepoints >= 2 && !stopwords.contains(token)) tokens.push_back(token);
    token.clear();
    codepoints = 0;
  };
  for_each_codepoint(norm_text, [&](UChar32 c, std::size_t begin, std::size_t end) {
    if (is_separator(c)) {
      flush();
      return;
    }
    token.append(norm_text.substr(begin, end - begin));
    ++codepoints;
  });
  flush();
  return tokens;
}

std::vector<Span> find_phrase(std::string_view norm_text, std::string_view phrase) {
  std::vector<Span> out;
  if (phrase.empty()) return out;
  std::vector<bool> starts(norm_text.size() + 1, false);
  std::vector<bool> ends(norm_text.size() + 1, false);
  bool in_word = false;
  for_each_codepoint(norm_text, [&](UChar32 c, std::size_t begin, std::size_t) {
    bool sep = is_separator(c);
    if (!sep && !in_word) starts[begin] = true;
    if (sep && in_word) ends[begin] = true;
    in_word = !sep;
  });
  if (in_word) ends[norm_text.size()] = true;
  for (std::size_t i = 0; i + phrase.size() <= norm_text.size(); ++i) {
    if (!starts[i] || !ends[i + phrase.size()]) continue;
    if (norm_text.compare(i, phrase.size(), phrase) == 0) out.push_back({i, i + phrase.size()});
  }
  return out;
}

Lang detect_language(std::string_view text) {
  std::size_t letters = 0;
  std::size_t arabic = 0;
  std::size_t latin = 0;
  for_each_codepoint(text, [&](UChar32 c, std::size_t, std::size_t) {
    if (!u_isalpha(c)) return;
    ++letters;
    if (is_arabic_letter_block(c))
      ++arabic;
    else if (is_latin(c))
      ++latin;
  });
  if (letters == 0) return Lang::kUnknown;
  if (2 * arabic >= letters) return Lang::kAr;
  if (2 * latin >= letters) return Lang::kEn;
  return Lang::kUnknown;
}

const StopwordSet& builtin_stopwords() {
  static const StopwordSet words = [] {
    StopwordSet set;
    load_stopwords(embedded::file("stopwords_en.txt"), set);
    load_stopwords(embedded::file("stopwords_ar.txt"), set);
    return set;
  }();
  return words;
}

Post make_post(std::string id, std::string text, Instant timestamp, const TextOptions& options) {
  Post post;
  post.id = std::move(id);
  post.text = std::move(text);
  post.timestamp = timestamp;
  post.lang = detect_language(post.text);
  post.norm_text = normalize_text(post.text, post.lang);
  post.tokens = tokenize(post.norm_text, options.stopword_set());
  return post;
}

bool is_valid_utf8(std::string_view bytes) {
  const auto* s = reinterpret_cast<const uint8_t*>(bytes.data());
  auto length = static_cast<int32_t>(bytes.size());
  if (bytes.size() > static_cast<std::size_t>(INT32_MAX)) return false;
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(s, i, length, c);
    if (c < 0) return false;
  }
  return true;
}

}  // namespace marsad::ingest
