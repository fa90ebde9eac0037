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

#include "rsactl/frame.hpp"

#include "rsactl/error.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace rsactl {

using nlohmann::json;

FrameSpec FrameSpec::from_json(std::string_view text, bool allow_content) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception &e) {
        throw Error(ErrorCode::InvalidFrame, std::string("frame is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("attributes") || !j["attributes"].is_array()) {
        throw Error(ErrorCode::InvalidFrame, "frame needs an \"attributes\" array");
    }
    FrameSpec spec;
    spec.content_placeholders = allow_content;
    for (const auto &a : j["attributes"]) {
        if (!a.is_object() || !a.contains("name") || !a.contains("prompt") || !a.contains("role") ||
            !a["name"].is_string() || !a["prompt"].is_string() || !a["role"].is_string()) {
            throw Error(ErrorCode::InvalidFrame, "each attribute needs string name, prompt and role");
        }
        AttributeSpec attr;
        attr.name = a["name"].get<std::string>();
        attr.prompt = a["prompt"].get<std::string>();
        const auto role = a["role"].get<std::string>();
        if (role == "target") {
            attr.role = AttributeRole::Target;
        } else if (role == "distractor") {
            attr.role = AttributeRole::Distractor;
        } else {
            throw Error(ErrorCode::InvalidFrame, "unknown role '" + role + "'");
        }
        if (!allow_content && attr.prompt.find(kContentPlaceholder) != std::string::npos) {
            throw Error(ErrorCode::InvalidFrame, "prompt for '" + attr.name +
                                                     "' contains {content}; control prompts must be "
                                                     "content-free unless the ablation flag is set");
        }
        spec.attributes.push_back(std::move(attr));
    }
    return spec;
}

FrameSpec FrameSpec::load(const std::string &path, bool allow_content) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::InvalidFrame, "cannot read frame file '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str(), allow_content);
}

std::string FrameSpec::to_json() const {
    json arr = json::array();
    for (const auto &a : attributes) {
        arr.push_back({{"name", a.name},
                       {"prompt", a.prompt},
                       {"role", a.role == AttributeRole::Target ? "target" : "distractor"}});
    }
    return json{{"attributes", arr}}.dump(2);
}

AttributeFrame::AttributeFrame(std::vector<Attribute> attributes) : m_attributes(std::move(attributes)) {
    if (m_attributes.size() < 2) {
        throw Error(ErrorCode::InvalidFrame, "a frame needs a target and at least one distractor");
    }
    std::set<std::string> seen;
    std::size_t targets = 0;
    for (std::size_t i = 0; i < m_attributes.size(); ++i) {
        const auto &a = m_attributes[i];
        if (!seen.insert(a.name).second) {
            throw Error(ErrorCode::InvalidFrame, "duplicate attribute name '" + a.name + "'");
        }
        if (a.prompt.empty()) {
            throw Error(ErrorCode::InvalidFrame, "attribute '" + a.name + "' has an empty prompt");
        }
        if (a.role == AttributeRole::Target) {
            ++targets;
            m_target = i;
        }
    }
    if (targets != 1) {
        throw Error(ErrorCode::InvalidFrame, "a frame needs exactly one target attribute");
    }
}

std::vector<std::string> AttributeFrame::names() const {
    std::vector<std::string> out;
    for (const auto &a : m_attributes) {
        out.push_back(a.name);
    }
    return out;
}

AttributeFrame AttributeFrame::retargeted(std::size_t index) const {
    auto attrs = m_attributes;
    for (std::size_t i = 0; i < attrs.size(); ++i) {
        attrs[i].role = i == index ? AttributeRole::Target : AttributeRole::Distractor;
    }
    return AttributeFrame(std::move(attrs));
}

AttributeFrame bind_frame(const FrameSpec &spec, const LanguageModel &lm, std::string_view content_text) {
    std::vector<Attribute> attrs;
    for (const auto &a : spec.attributes) {
        std::string prompt = a.prompt;
        if (spec.content_placeholders) {
            for (auto pos = prompt.find(kContentPlaceholder); pos != std::string::npos;
                 pos = prompt.find(kContentPlaceholder, pos + content_text.size())) {
                prompt.replace(pos, kContentPlaceholder.size(), content_text);
            }
        } else if (prompt.find(kContentPlaceholder) != std::string::npos) {
            throw Error(ErrorCode::InvalidFrame, "prompt for '" + a.name + "' contains {content}");
        }
        attrs.push_back({a.name, lm.tokenize(prompt), a.role});
    }
    return AttributeFrame(std::move(attrs));
}

} // namespace rsactl
