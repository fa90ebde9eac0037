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

#include "stub_server.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <stdexcept>
#include <thread>

namespace rsactl::testing {

using nlohmann::json;

namespace {

// JSON has no -Infinity; excluded tokens go out as a very negative number.
constexpr double kWireNegInf = -1e30;

void reply(httplib::Response &res, int status, const json &body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

} // namespace

StubServer::StubServer(const LanguageModel &lm, std::string model_name, std::optional<std::string> required_token)
    : m_lm(lm), m_model(std::move(model_name)), m_token(std::move(required_token)),
      m_server(std::make_unique<httplib::Server>()) {
    auto &srv = *m_server;

    srv.set_pre_routing_handler([this](const httplib::Request &req, httplib::Response &res) {
        const auto now = ++m_in_flight;
        auto prev = m_max_in_flight.load();
        while (now > prev && !m_max_in_flight.compare_exchange_weak(prev, now)) {
        }
        {
            std::lock_guard lock(m_mutex);
            ++m_requests[req.path];
            if (m_fail > 0) {
                --m_fail;
                --m_in_flight;
                reply(res, 503, {{"error", "model busy"}});
                return httplib::Server::HandlerResponse::Handled;
            }
        }
        if (m_token && req.get_header_value("Authorization") != "Bearer " + *m_token) {
            --m_in_flight;
            reply(res, 401, {{"error", "unauthorized"}});
            return httplib::Server::HandlerResponse::Handled;
        }
        return httplib::Server::HandlerResponse::Unhandled;
    });
    srv.set_post_routing_handler([this](const httplib::Request &, httplib::Response &) { --m_in_flight; });

    srv.Get("/v1/meta", [this](const httplib::Request &, httplib::Response &res) {
        std::size_t vocab = m_lm.vocab_size();
        {
            std::lock_guard lock(m_mutex);
            vocab = m_advertised.value_or(vocab);
        }
        reply(res, 200, {{"model", m_model}, {"vocab_size", vocab}, {"bos_id", m_lm.bos()}, {"eos_id", m_lm.eos()}});
    });

    srv.Get("/v1/health", [this](const httplib::Request &, httplib::Response &res) {
        reply(res, 200, {{"status", "ok"}, {"model", m_model}, {"queue_depth", 0}});
    });

    srv.Post("/v1/tokenize", [this](const httplib::Request &req, httplib::Response &res) {
        try {
            const auto body = json::parse(req.body);
            reply(res, 200, {{"token_ids", m_lm.tokenize(body.at("text").get<std::string>())}});
        } catch (const std::exception &e) {
            reply(res, 422, {{"error", e.what()}});
        }
    });

    srv.Post("/v1/session", [this](const httplib::Request &req, httplib::Response &res) {
        json body;
        try {
            body = json::parse(req.body);
        } catch (const std::exception &e) {
            reply(res, 422, {{"error", e.what()}});
            return;
        }
        const auto model = body.value("model", std::string{});
        if (!model.empty() && model != m_model) {
            reply(res, 404, {{"error", "unknown model"}});
            return;
        }
        Session s;
        try {
            s.prompt = m_lm.tokenize(body.value("prompt_text", std::string{}));
        } catch (const std::exception &e) {
            reply(res, 422, {{"error", e.what()}});
            return;
        }
        std::string id;
        {
            std::lock_guard lock(m_mutex);
            id = "s" + std::to_string(m_next_id++);
            ++m_created;
            m_sessions[id] = s;
        }
        reply(res, 200, {{"session_id", id}, {"prompt_token_ids", s.prompt}});
    });

    srv.Post("/v1/append", [this](const httplib::Request &req, httplib::Response &res) {
        json body;
        std::vector<std::int64_t> ids;
        std::string id;
        try {
            body = json::parse(req.body);
            id = body.at("session_id").get<std::string>();
            ids = body.at("token_ids").get<std::vector<std::int64_t>>();
        } catch (const std::exception &e) {
            reply(res, 422, {{"error", e.what()}});
            return;
        }
        std::lock_guard lock(m_mutex);
        auto it = m_sessions.find(id);
        if (it == m_sessions.end()) {
            reply(res, 404, {{"error", "unknown session"}});
            return;
        }
        for (auto t : ids) {
            if (t < 0 || static_cast<std::size_t>(t) >= m_lm.vocab_size()) {
                reply(res, 422, {{"error", "invalid token id"}});
                return;
            }
        }
        for (auto t : ids) {
            it->second.appended.push_back(static_cast<TokenId>(t));
        }
        m_appended += ids.size();
        reply(res, 200, {{"ok", true}});
    });

    srv.Post("/v1/logprobs", [this](const httplib::Request &req, httplib::Response &res) {
        std::string id;
        try {
            id = json::parse(req.body).at("session_id").get<std::string>();
        } catch (const std::exception &e) {
            reply(res, 422, {{"error", e.what()}});
            return;
        }
        Session s;
        std::optional<std::vector<double>> fixed;
        std::chrono::milliseconds delay{0};
        {
            std::lock_guard lock(m_mutex);
            auto it = m_sessions.find(id);
            if (it == m_sessions.end()) {
                reply(res, 404, {{"error", "unknown session"}});
                return;
            }
            s = it->second;
            fixed = m_fixed;
            delay = m_latency;
        }
        std::this_thread::sleep_for(delay);
        std::vector<double> values;
        if (fixed) {
            values = *fixed;
        } else {
            const auto d = m_lm.next_dist(Context{s.prompt, s.appended});
            values.assign(d.logp().begin(), d.logp().end());
        }
        for (double &v : values) {
            if (is_excluded(v)) {
                v = kWireNegInf;
            }
        }
        reply(res, 200, {{"vocab_size", values.size()}, {"logprobs", values}});
    });

    m_port = srv.bind_to_any_port("127.0.0.1");
    if (m_port <= 0) {
        throw std::runtime_error("stub server could not bind");
    }
    m_thread = std::thread([this] { m_server->listen_after_bind(); });
    m_server->wait_until_ready();
}

StubServer::~StubServer() {
    m_server->stop();
    if (m_thread.joinable()) {
        m_thread.join();
    }
}

std::string StubServer::endpoint() const {
    return "http://127.0.0.1:" + std::to_string(m_port);
}

void StubServer::set_fixed_logprobs(std::vector<double> values) {
    std::lock_guard lock(m_mutex);
    m_fixed = std::move(values);
}

void StubServer::set_advertised_vocab(std::size_t size) {
    std::lock_guard lock(m_mutex);
    m_advertised = size;
}

void StubServer::set_latency(std::chrono::milliseconds delay) {
    std::lock_guard lock(m_mutex);
    m_latency = delay;
}

void StubServer::fail_next(int count) {
    std::lock_guard lock(m_mutex);
    m_fail = count;
}

void StubServer::forget_sessions() {
    std::lock_guard lock(m_mutex);
    m_sessions.clear();
}

std::size_t StubServer::requests(const std::string &path) const {
    std::lock_guard lock(m_mutex);
    auto it = m_requests.find(path);
    return it == m_requests.end() ? 0 : it->second;
}

std::size_t StubServer::sessions_created() const {
    std::lock_guard lock(m_mutex);
    return m_created;
}

std::size_t StubServer::appended_tokens() const {
    std::lock_guard lock(m_mutex);
    return m_appended;
}

} // namespace rsactl::testing
