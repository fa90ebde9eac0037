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

#include "rsactl/remote.hpp"

#include "rsactl/error.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <thread>

namespace rsactl {

using nlohmann::json;

namespace {

// Logprobs at or below this are read as excluded tokens.
constexpr double kWireExcluded = -1e29;

constexpr std::size_t kMaxSessionsPerPrompt = 64;

// A 404 means the server forgot the session; callers drop it and retry.
struct SessionLost {};

bool is_prefix(const std::vector<TokenId> &prefix, const std::vector<TokenId> &seq) {
    return prefix.size() <= seq.size() && std::equal(prefix.begin(), prefix.end(), seq.begin());
}

} // namespace

struct RemoteModel::Session {
    std::string id;
    std::vector<TokenId> tokens; // everything appended so far
    bool busy = false;
};

class RemoteModel::Http {
public:
    explicit Http(const RemoteOptions &opts) : m_opts(opts) {}

    json get(const std::string &path) const {
        return call(path, nullptr);
    }
    json post(const std::string &path, const json &body) const {
        return call(path, &body);
    }

private:
    json call(const std::string &path, const json *body) const {
        for (int attempt = 0;; ++attempt) {
            httplib::Client cli(m_opts.endpoint);
            cli.set_connection_timeout(std::chrono::milliseconds(m_opts.connect_timeout_ms));
            cli.set_read_timeout(std::chrono::milliseconds(m_opts.read_timeout_ms));
            if (m_opts.bearer_token) {
                cli.set_bearer_token_auth(*m_opts.bearer_token);
            }
            auto res = body ? cli.Post(path, body->dump(), "application/json") : cli.Get(path);
            if (!res) {
                throw Error(ErrorCode::RemoteUnavailable,
                            m_opts.endpoint + path + ": " + httplib::to_string(res.error()));
            }
            if (res->status == 503 && attempt < m_opts.busy_retries) {
                std::this_thread::sleep_for(std::chrono::milliseconds(50 << attempt));
                continue;
            }
            switch (res->status) {
            case 200:
                break;
            case 404:
                throw SessionLost{};
            case 503:
                throw Error(ErrorCode::RemoteUnavailable, path + ": model busy");
            case 422:
                throw Error(ErrorCode::ProtocolViolation, path + ": server rejected token ids");
            default:
                throw Error(ErrorCode::ProtocolViolation, path + ": HTTP " + std::to_string(res->status));
            }
            try {
                return json::parse(res->body);
            } catch (const json::exception &e) {
                throw Error(ErrorCode::ProtocolViolation, path + ": malformed JSON: " + e.what());
            }
        }
    }

    RemoteOptions m_opts;
};

namespace {

template <typename T> T field(const json &j, const char *name, const char *path) {
    try {
        return j.at(name).get<T>();
    } catch (const json::exception &) {
        throw Error(ErrorCode::ProtocolViolation, std::string(path) + ": missing or mistyped '" + name + "'");
    }
}

} // namespace

RemoteModel::RemoteModel(RemoteOptions opts) : m_opts(std::move(opts)), m_http(std::make_unique<Http>(m_opts)) {
    json meta;
    try {
        meta = m_http->get("/v1/meta");
    } catch (const SessionLost &) {
        throw Error(ErrorCode::ProtocolViolation, "/v1/meta: HTTP 404");
    }
    m_model = field<std::string>(meta, "model", "/v1/meta");
    const auto vocab = field<std::int64_t>(meta, "vocab_size", "/v1/meta");
    const auto bos = field<std::int64_t>(meta, "bos_id", "/v1/meta");
    const auto eos = field<std::int64_t>(meta, "eos_id", "/v1/meta");
    if (vocab < 1 || bos < 0 || eos < 0 || bos >= vocab || eos >= vocab) {
        throw Error(ErrorCode::ProtocolViolation, "/v1/meta: inconsistent vocabulary constants");
    }
    if (!m_opts.model.empty() && m_opts.model != m_model) {
        throw Error(ErrorCode::ProtocolViolation,
                    "server hosts '" + m_model + "' but '" + m_opts.model + "' was requested");
    }
    m_vocab_size = static_cast<std::size_t>(vocab);
    m_bos = static_cast<TokenId>(bos);
    m_eos = static_cast<TokenId>(eos);
}

RemoteModel::~RemoteModel() = default;

std::vector<TokenId> RemoteModel::tokenize(std::string_view text) const {
    json res;
    try {
        res = m_http->post("/v1/tokenize", json{{"text", text}});
    } catch (const SessionLost &) {
        throw Error(ErrorCode::ProtocolViolation, "/v1/tokenize: HTTP 404");
    }
    auto ids = field<std::vector<std::int64_t>>(res, "token_ids", "/v1/tokenize");
    std::vector<TokenId> out;
    out.reserve(ids.size());
    for (auto id : ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= m_vocab_size) {
            throw Error(ErrorCode::ProtocolViolation, "/v1/tokenize: id out of range");
        }
        out.push_back(static_cast<TokenId>(id));
    }
    return out;
}

std::string RemoteModel::token_text(TokenId id) const {
    return "#" + std::to_string(id);
}

std::size_t RemoteModel::session_count() const {
    std::lock_guard lock(m_mutex);
    std::size_t n = 0;
    for (const auto &[prompt, list] : m_sessions) {
        n += list.size();
    }
    return n;
}

std::shared_ptr<RemoteModel::Session> RemoteModel::acquire(const std::vector<TokenId> &full,
                                                           const std::vector<TokenId> &prompt) const {
    {
        std::lock_guard lock(m_mutex);
        auto &list = m_sessions[prompt];
        std::shared_ptr<Session> best;
        for (const auto &s : list) {
            if (!s->busy && is_prefix(s->tokens, full) && (!best || s->tokens.size() > best->tokens.size())) {
                best = s;
            }
        }
        if (best) {
            best->busy = true;
            return best;
        }
    }

    json res;
    try {
        res = m_http->post("/v1/session", json{{"model", m_model}, {"prompt_text", ""}});
    } catch (const SessionLost &) {
        throw Error(ErrorCode::ProtocolViolation, "/v1/session: HTTP 404");
    }
    auto s = std::make_shared<Session>();
    s->id = field<std::string>(res, "session_id", "/v1/session");
    for (auto id : field<std::vector<std::int64_t>>(res, "prompt_token_ids", "/v1/session")) {
        s->tokens.push_back(static_cast<TokenId>(id));
    }
    if (!is_prefix(s->tokens, full)) {
        throw Error(ErrorCode::ProtocolViolation, "/v1/session: empty prompt produced unexpected tokens");
    }
    s->busy = true;

    std::lock_guard lock(m_mutex);
    auto &list = m_sessions[prompt];
    if (list.size() >= kMaxSessionsPerPrompt) {
        auto victim = std::min_element(list.begin(), list.end(), [](const auto &a, const auto &b) {
            if (a->busy != b->busy) {
                return !a->busy;
            }
            return a->tokens.size() < b->tokens.size();
        });
        if (!(*victim)->busy) {
            list.erase(victim);
        }
    }
    list.push_back(s);
    return s;
}

void RemoteModel::release(const std::vector<TokenId> &prompt, const std::shared_ptr<Session> &s, bool keep) const {
    std::lock_guard lock(m_mutex);
    s->busy = false;
    if (!keep) {
        auto &list = m_sessions[prompt];
        list.erase(std::remove(list.begin(), list.end(), s), list.end());
    }
}

TokenDist RemoteModel::fetch(const Context &ctx) const {
    std::vector<TokenId> full = ctx.prompt_tokens;
    full.insert(full.end(), ctx.generated_tokens.begin(), ctx.generated_tokens.end());
    for (TokenId id : full) {
        if (id >= m_vocab_size) {
            throw Error(ErrorCode::InvalidArgument, "context token id out of range");
        }
    }

    for (int attempt = 0;; ++attempt) {
        auto session = acquire(full, ctx.prompt_tokens);
        try {
            if (session->tokens.size() < full.size()) {
                std::vector<TokenId> missing(full.begin() + static_cast<std::ptrdiff_t>(session->tokens.size()),
                                             full.end());
                m_http->post("/v1/append", json{{"session_id", session->id}, {"token_ids", missing}});
                session->tokens = full;
            }
            json res = m_http->post("/v1/logprobs", json{{"session_id", session->id}});
            const auto n = field<std::int64_t>(res, "vocab_size", "/v1/logprobs");
            auto values = field<std::vector<double>>(res, "logprobs", "/v1/logprobs");
            if (n < 0 || static_cast<std::size_t>(n) != m_vocab_size || values.size() != m_vocab_size) {
                throw Error(ErrorCode::ProtocolViolation, "/v1/logprobs: vector length disagrees with /v1/meta");
            }
            for (double &v : values) {
                if (!std::isfinite(v)) {
                    throw Error(ErrorCode::ProtocolViolation, "/v1/logprobs: non-finite value");
                }
                // JSON cannot carry -inf; servers send a huge negative number instead
                if (v <= kWireExcluded) {
                    v = kNegInf;
                }
            }
            release(ctx.prompt_tokens, session, true);
            return normalize(TokenDist(std::move(values)));
        } catch (const SessionLost &) {
            release(ctx.prompt_tokens, session, false);
            if (attempt >= 1) {
                throw Error(ErrorCode::ProtocolViolation, "server lost a freshly created session");
            }
        } catch (...) {
            release(ctx.prompt_tokens, session, false);
            throw;
        }
    }
}

TokenDist RemoteModel::next_dist(const Context &ctx) const {
    return fetch(ctx);
}

std::vector<TokenDist> RemoteModel::next_dist_batch(std::span<const Context> contexts) const {
    std::vector<std::future<TokenDist>> pending;
    pending.reserve(contexts.size());
    for (const auto &ctx : contexts) {
        pending.push_back(std::async(std::launch::async, [this, &ctx] { return fetch(ctx); }));
    }
    std::vector<TokenDist> out;
    out.reserve(contexts.size());
    std::exception_ptr first_error;
    for (auto &f : pending) {
        try {
            out.push_back(f.get());
        } catch (...) {
            if (!first_error) {
                first_error = std::current_exception();
            }
        }
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
    return out;
}

} // namespace rsactl
