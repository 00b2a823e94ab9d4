#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace stackrag {

inline bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

inline std::string trim_copy(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_ascii_space(s[b])) ++b;
  while (e > b && is_ascii_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

// Runs of whitespace become one space; leading/trailing whitespace is dropped.
inline std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_ascii_space(c)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    }
  }
  return out;
}

inline std::string to_upper_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

namespace detail {

inline void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x110000) {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Decodes the entity starting at s[i] (s[i] == '&'). Returns true and
// advances i past the entity when one is recognized; unknown sequences are
// left untouched so they pass through verbatim.
inline bool decode_entity_at(std::string_view s, std::size_t& i,
                             std::string& out) {
  std::size_t semi = s.find(';', i + 1);
  if (semi == std::string_view::npos || semi - i > 12) return false;
  std::string_view name = s.substr(i + 1, semi - i - 1);
  if (name.empty()) return false;

  if (name[0] == '#') {
    unsigned long cp = 0;
    bool ok = false;
    if (name.size() > 1 && (name[1] == 'x' || name[1] == 'X')) {
      for (std::size_t k = 2; k < name.size(); ++k) {
        char c = name[k];
        int digit;
        if (c >= '0' && c <= '9') digit = c - '0';
        else if (c >= 'a' && c <= 'f') digit = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') digit = c - 'A' + 10;
        else return false;
        cp = cp * 16 + static_cast<unsigned long>(digit);
        ok = true;
      }
    } else {
      for (std::size_t k = 1; k < name.size(); ++k) {
        char c = name[k];
        if (c < '0' || c > '9') return false;
        cp = cp * 10 + static_cast<unsigned long>(c - '0');
        ok = true;
      }
    }
    if (!ok || cp == 0 || cp >= 0x110000) return false;
    append_utf8(out, cp);
    i = semi + 1;
    return true;
  }

  struct Named {
    std::string_view name;
    std::string_view value;
  };
  static constexpr Named kNamed[] = {
      {"amp", "&"},   {"lt", "<"},   {"gt", ">"},      {"quot", "\""},
      {"apos", "'"},  {"nbsp", " "}, {"hellip", "..."},
  };
  for (const auto& e : kNamed) {
    if (name == e.name) {
      out.append(e.value);
      i = semi + 1;
      return true;
    }
  }
  return false;
}

// Inline formatting tags vanish without a separator so text such as
// "use <code>x</code>." keeps its punctuation attached. Every other tag
// (block elements, declarations, unknown names) reads as an element
// boundary and becomes a single space.
inline bool is_inline_tag(std::string_view inside) {
  if (!inside.empty() && inside.front() == '/') inside.remove_prefix(1);
  std::size_t len = 0;
  while (len < inside.size() &&
         std::isalpha(static_cast<unsigned char>(inside[len])))
    ++len;
  if (len == 0 || (len < inside.size() &&
                   !is_ascii_space(inside[len]) && inside[len] != '/'))
    return false;
  static constexpr std::string_view kInline[] = {
      "a",  "abbr", "b",      "code",   "em",  "i",  "kbd", "mark", "s",
      "small", "span", "strike", "strong", "sub", "sup", "tt", "u",
  };
  std::string name;
  name.reserve(len);
  for (std::size_t k = 0; k < len; ++k)
    name.push_back(static_cast<char>(
        std::tolower(static_cast<unsigned char>(inside[k]))));
  for (std::string_view tag : kInline)
    if (name == tag) return true;
  return false;
}

// One pass of lenient HTML-to-text: drop tags and comments (keeping their
// text content), decode entities, collapse whitespace.
inline std::string strip_html_once(std::string_view html) {
  std::string text;
  text.reserve(html.size());
  std::size_t i = 0;
  const std::size_t n = html.size();
  while (i < n) {
    char c = html[i];
    if (c == '<' && i + 1 < n) {
      char next = html[i + 1];
      if (html.compare(i, 4, "<!--") == 0) {
        std::size_t end = html.find("-->", i + 4);
        i = (end == std::string_view::npos) ? n : end + 3;
        text.push_back(' ');
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(next)) || next == '/' ||
          next == '!' || next == '?') {
        std::size_t end = html.find('>', i + 1);
        if (end != std::string_view::npos) {
          if (!is_inline_tag(html.substr(i + 1, end - i - 1)))
            text.push_back(' ');
          i = end + 1;
          continue;
        }
        // No closing '>' in the rest of the input: this is not markup, so
        // the '<' stays as literal text.
      }
    }
    if (c == '&') {
      if (decode_entity_at(html, i, text)) continue;
    }
    text.push_back(c);
    ++i;
  }
  return collapse_whitespace(text);
}

}  // namespace detail

// Lenient HTML-to-plain-text conversion: tags and comments are removed, text
// content (including code-block contents) is kept, entities are decoded and
// whitespace is collapsed. Block tags separate words; inline formatting tags
// do not. The pass is iterated to a fixed point, which makes
// the function idempotent even when decoded entities themselves form markup.
// Every changing pass strictly shrinks the string, so the loop terminates.
inline std::string strip_html(std::string_view html) {
  std::string current = detail::strip_html_once(html);
  for (;;) {
    std::string next = detail::strip_html_once(current);
    if (next == current) return current;
    current = std::move(next);
  }
}

// Lowercase tokens split on any non-alphanumeric byte. ASCII only: no
// stemming, no stopword removal, multibyte characters act as separators.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    unsigned char u = static_cast<unsigned char>(c);
    if ((u >= 'a' && u <= 'z') || (u >= '0' && u <= '9')) {
      current.push_back(c);
    } else if (u >= 'A' && u <= 'Z') {
      current.push_back(static_cast<char>(u - 'A' + 'a'));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

inline std::string truncate_to_bytes(std::string_view text, std::size_t max) {
  if (text.size() <= max) return std::string(text);
  return std::string(text.substr(0, max));
}

inline std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : text) {
    if (is_ascii_space(c)) {
      if (!current.empty()) {
        parts.push_back(std::move(current));
        current.clear();
      }
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) parts.push_back(std::move(current));
  return parts;
}

inline std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::string current;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(current);
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  if (!current.empty()) lines.push_back(current);
  return lines;
}

}  // namespace stackrag
