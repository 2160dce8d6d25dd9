#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace flowvs::test {

// Minimal well-formedness check: balanced tags, quoted attributes, known
// entities only. Enough for the SVG the plotter emits.
inline bool well_formed_xml(std::string_view s) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  if (s.starts_with("<?xml")) {
    i = s.find("?>");
    if (i == std::string_view::npos) return false;
    i += 2;
  }
  bool seen_root = false;
  while (i < s.size()) {
    if (s[i] == '&') {
      const std::size_t semi = s.find(';', i);
      if (semi == std::string_view::npos) return false;
      const auto ent = s.substr(i, semi - i + 1);
      if (ent != "&amp;" && ent != "&lt;" && ent != "&gt;" && ent != "&quot;" && ent != "&apos;")
        return false;
      i = semi + 1;
      continue;
    }
    if (s[i] != '<') {
      if (stack.empty() && s[i] != '\n' && s[i] != ' ') return false;
      ++i;
      continue;
    }
    const std::size_t close = s.find('>', i);
    if (close == std::string_view::npos) return false;
    std::string_view tag = s.substr(i + 1, close - i - 1);
    i = close + 1;
    if (tag.starts_with('/')) {
      if (stack.empty() || stack.back() != tag.substr(1)) return false;
      stack.pop_back();
      continue;
    }
    const bool self_closing = tag.ends_with('/');
    if (self_closing) tag.remove_suffix(1);
    const std::string name(tag.substr(0, tag.find_first_of(" \n")));
    if (name.empty()) return false;
    // Attribute values must be quoted and contain no raw '<'.
    bool in_quote = false;
    for (char c : tag) {
      if (c == '"') in_quote = !in_quote;
      if (c == '<') return false;
    }
    if (in_quote) return false;
    if (stack.empty()) {
      if (seen_root) return false;
      seen_root = true;
    }
    if (!self_closing) stack.push_back(name);
  }
  return seen_root && stack.empty();
}

}  // namespace flowvs::test
