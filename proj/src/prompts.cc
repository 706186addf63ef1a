// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#include "fewtype/prompts.h"

#include <cctype>
#include <map>

#include <fmt/format.h>

#include "fewtype/error.h"

namespace fewtype {

namespace {

void RequireCount(std::string_view pattern, std::string_view placeholder,
                  std::size_t min, std::size_t max, std::string_view which) {
  std::size_t n = CountOccurrences(pattern, placeholder);
  if (n < min || n > max) {
    throw ConfigError(fmt::format("{} pattern '{}' must contain {} {} time(s)",
                                  which, pattern, placeholder,
                                  min == max ? std::to_string(min)
                                             : fmt::format("{}..{}", min, max)));
  }
}

// Substitutes placeholders in one left-to-right pass so that replacement text
// is never rescanned.
std::string Substitute(std::string_view pattern,
                       const std::map<std::string, std::string>& values,
                       bool drop_context) {
  std::string out;
  std::size_t i = 0;
  while (i < pattern.size()) {
    if (pattern[i] == '{') {
      std::size_t close = pattern.find('}', i);
      if (close != std::string_view::npos) {
        std::string name(pattern.substr(i + 1, close - i - 1));
        auto it = values.find(name);
        if (it != values.end()) {
          i = close + 1;
          if (name == "x" && drop_context) {
            while (i < pattern.size() && pattern[i] != '{' &&
                   (std::ispunct(static_cast<unsigned char>(pattern[i])) ||
                    std::isspace(static_cast<unsigned char>(pattern[i])))) {
              ++i;
            }
            continue;
          }
          out += it->second;
          continue;
        }
      }
    }
    out += pattern[i++];
  }
  return out;
}

void CheckText(std::string_view text, std::string_view mask_token,
               std::string_view what) {
  if (CountOccurrences(text, mask_token) != 0) {
    throw ContractError(
        fmt::format("{} must not contain the mask token {}", what, mask_token));
  }
}

}  // namespace

void TemplateSpec::Validate() const {
  RequireCount(typing_pattern, "{mask}", 1, 1, "typing");
  RequireCount(typing_pattern, "{m}", 1, 1, "typing");
  RequireCount(typing_pattern, "{x}", 0, 1, "typing");
  RequireCount(generation_pattern, "{masks}", 1, 1, "generation");
  RequireCount(generation_pattern, "{t}", 1, 1, "generation");
  RequireCount(generation_pattern, "{m}", 1, 1, "generation");
  RequireCount(generation_pattern, "{x}", 0, 1, "generation");
}

RenderedPrompt RenderTyping(const TemplateSpec& spec, std::string_view context,
                            std::string_view mention,
                            std::string_view mask_token) {
  spec.Validate();
  if (mention.empty()) throw ContractError("typing prompt: empty mention");
  CheckText(context, mask_token, "context");
  CheckText(mention, mask_token, "mention");
  RenderedPrompt out;
  out.text = Substitute(spec.typing_pattern,
                        {{"x", std::string(context)},
                         {"m", std::string(mention)},
                         {"mask", std::string(mask_token)}},
                        context.empty());
  out.mask_positions = {0};
  return out;
}

RenderedPrompt RenderGeneration(const TemplateSpec& spec,
                                std::string_view context,
                                std::string_view mention,
                                std::string_view type_word,
                                std::size_t mask_count,
                                std::string_view mask_token) {
  spec.Validate();
  if (mask_count < 1) throw ContractError("generation prompt: mask count < 1");
  if (mention.empty()) throw ContractError("generation prompt: empty mention");
  if (type_word.empty()) throw ContractError("generation prompt: empty type word");
  CheckText(context, mask_token, "context");
  CheckText(mention, mask_token, "mention");
  CheckText(type_word, mask_token, "type word");
  std::string masks(mask_token);
  for (std::size_t i = 1; i < mask_count; ++i) {
    masks += ' ';
    masks += mask_token;
  }
  RenderedPrompt out;
  out.text = Substitute(spec.generation_pattern,
                        {{"x", std::string(context)},
                         {"m", std::string(mention)},
                         {"masks", masks},
                         {"t", std::string(type_word)}},
                        context.empty());
  for (std::size_t i = 0; i < mask_count; ++i) out.mask_positions.push_back(i);
  return out;
}

}  // namespace fewtype
