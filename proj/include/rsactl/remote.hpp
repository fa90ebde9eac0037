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

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace rsactl {

struct RemoteOptions {
    std::string endpoint; // e.g. "http://127.0.0.1:8080"
    std::string model;    // empty accepts whatever /v1/meta reports
    std::optional<std::string> bearer_token;
    int connect_timeout_ms = 2000;
    int read_timeout_ms = 60000;
    int busy_retries = 3; // extra attempts after a 503
};

/// Client for the JSON-over-HTTP logits protocol.
///
/// Each distinct prompt is registered once as a server session; later
/// queries reuse the longest idle session whose token history is a prefix of
/// the requested context and append only the missing tokens. Sessions are
/// owned by one request at a time, which serializes appends per session.
/// next_dist_batch issues every context as its own concurrent request.
class RemoteModel final : public LanguageModel {
public:
    explicit RemoteModel(RemoteOptions opts);
    ~RemoteModel() override;

    BackendKind kind() const override {
        return BackendKind::Remote;
    }
    std::size_t vocab_size() const override {
        return m_vocab_size;
    }
    TokenId bos() const override {
        return m_bos;
    }
    TokenId eos() const override {
        return m_eos;
    }
    std::string tokenizer_name() const override {
        return "remote:" + m_model;
    }
    std::vector<TokenId> tokenize(std::string_view text) const override;
    std::string token_text(TokenId id) const override; // "#<id>"; the protocol has no detokenizer
    TokenDist next_dist(const Context &ctx) const override;
    std::vector<TokenDist> next_dist_batch(std::span<const Context> contexts) const override;

    const std::string &model_name() const noexcept {
        return m_model;
    }
    std::size_t session_count() const;

private:
    struct Session;
    class Http;

    std::shared_ptr<Session> acquire(const std::vector<TokenId> &full, const std::vector<TokenId> &prompt) const;
    void release(const std::vector<TokenId> &prompt, const std::shared_ptr<Session> &s, bool keep) const;
    TokenDist fetch(const Context &ctx) const;

    RemoteOptions m_opts;
    std::unique_ptr<Http> m_http;
    std::string m_model;
    std::size_t m_vocab_size = 0;
    TokenId m_bos = 0;
    TokenId m_eos = 0;

    mutable std::mutex m_mutex;
    mutable std::map<std::vector<TokenId>, std::vector<std::shared_ptr<Session>>> m_sessions;
};

} // namespace rsactl
