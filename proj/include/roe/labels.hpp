/*
 * Copyright 2026 The roe-kg Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cctype>
#include <set>
#include <string>
#include <string_view>

namespace roe {

/// Answer-label normalization shared by the reward engine and evaluation:
/// ASCII case folding, trimming, and collapsing internal whitespace runs to a
/// single space. Bytes outside ASCII pass through unchanged.
inline std::string normalize_label(std::string_view label) {
  std::string out;
  out.reserve(label.size());
  bool pending_space = false;
  for (char c : label) {
    const auto uc = static_cast<unsigned char>(c);
    if (uc == ' ' || uc == '\t' || uc == '\n' || uc == '\r' || uc == '\f' ||
        uc == '\v') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(uc < 0x80 ? static_cast<char>(std::tolower(uc)) : c);
  }
  return out;
}

template <class Range>
std::set<std::string> normalized_set(const Range& labels) {
  std::set<std::string> out;
  for (const auto& l : labels) out.insert(normalize_label(l));
  return out;
}

}  // namespace roe
