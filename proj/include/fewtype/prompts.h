// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

#include "fewtype/backend.h"

namespace fewtype {

inline constexpr std::string_view kDefaultMaskToken = "[MASK]";

// Cloze patterns. Placeholders: {x} context, {m} mention, {mask} the single
// typing mask, {masks} the run of generation masks, {t} the type word.
// When the context is empty, {x} is dropped together with the punctuation and
// whitespace that follow it.
struct TemplateSpec {
  std::string typing_pattern = "{x}. {m} is a {mask}.";
  std::string generation_pattern = "{x}. {m}, as well as {masks}, is a {t}.";

  // Throws ConfigError when a placeholder is missing or repeated.
  void Validate() const;
};

RenderedPrompt RenderTyping(const TemplateSpec& spec, std::string_view context,
                            std::string_view mention,
                            std::string_view mask_token = kDefaultMaskToken);

// Exactly `mask_count` sentinels, space separated, in the {masks} slot.
RenderedPrompt RenderGeneration(const TemplateSpec& spec,
                                std::string_view context,
                                std::string_view mention,
                                std::string_view type_word,
                                std::size_t mask_count,
                                std::string_view mask_token = kDefaultMaskToken);

}  // namespace fewtype
