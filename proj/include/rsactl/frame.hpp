// Copyright 2026 The rsactl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "rsactl/backend.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace rsactl {

enum class AttributeRole { Target, Distractor };

/// Placeholder that, in ablation mode only, is replaced by the content text
/// when a frame is bound.
inline constexpr std::string_view kContentPlaceholder = "{content}";

struct AttributeSpec {
    std::string name;
    std::string prompt; // control prompt text
    AttributeRole role = AttributeRole::Distractor;
};

/// Frame as written in a config file, before tokenization.
struct FrameSpec {
    std::vector<AttributeSpec> attributes;
    bool content_placeholders = false; // set only for the conditional-independence ablation

    /// Parses {"attributes": [{"name", "prompt", "role"}]}. Prompts holding
    /// "{content}" are rejected unless `allow_content` is true.
    static FrameSpec from_json(std::string_view text, bool allow_content = false);
    static FrameSpec load(const std::string &path, bool allow_content = false);
    std::string to_json() const;
};

struct Attribute {
    std::string name;
    std::vector<TokenId> prompt;
    AttributeRole role = AttributeRole::Distractor;
};

/// One target attribute plus at least one distractor, each with a tokenized
/// control prompt.
class AttributeFrame {
public:
    explicit AttributeFrame(std::vector<Attribute> attributes);

    const std::vector<Attribute> &attributes() const noexcept {
        return m_attributes;
    }
    std::size_t size() const noexcept {
        return m_attributes.size();
    }
    std::size_t target() const noexcept {
        return m_target;
    }
    std::vector<std::string> names() const;

    /// Same attributes with `index` as the target and every other one a distractor.
    AttributeFrame retargeted(std::size_t index) const;

private:
    std::vector<Attribute> m_attributes;
    std::size_t m_target = 0;
};

/// Tokenizes a spec with `lm`. In ablation mode "{content}" is replaced by
/// `content_text` first.
AttributeFrame bind_frame(const FrameSpec &spec, const LanguageModel &lm, std::string_view content_text = {});

} // namespace rsactl
