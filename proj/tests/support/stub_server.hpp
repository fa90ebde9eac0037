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

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace rsactl::testing {

/// In-process implementation of the logits wire protocol over any
/// LanguageModel. Serves on 127.0.0.1 with an ephemeral port.
class StubServer {
public:
    explicit StubServer(const LanguageModel &lm, std::string model_name = "stub",
                        std::optional<std::string> required_token = std::nullopt);
    ~StubServer();

    StubServer(const StubServer &) = delete;
    StubServer &operator=(const StubServer &) = delete;

    int port() const noexcept {
        return m_port;
    }
    std::string endpoint() const;

    /// Every /v1/logprobs answers with this raw vector instead of the model.
    void set_fixed_logprobs(std::vector<double> values);
    /// The next `count` requests answer 503.
    void fail_next(int count);
    /// /v1/meta reports this vocabulary size instead of the model's.
    void set_advertised_vocab(std::size_t size);
    /// Every /v1/logprobs sleeps this long before answering.
    void set_latency(std::chrono::milliseconds delay);
    /// Drops every session, so the next use of an old id gets 404.
    void forget_sessions();

    std::size_t requests(const std::string &path) const;
    std::size_t sessions_created() const;
    std::size_t appended_tokens() const;
    std::size_t max_in_flight() const noexcept {
        return m_max_in_flight.load();
    }

private:
    struct Session {
        std::vector<TokenId> prompt;
        std::vector<TokenId> appended;
    };

    const LanguageModel &m_lm;
    std::string m_model;
    std::optional<std::string> m_token;
    std::unique_ptr<httplib::Server> m_server;
    std::thread m_thread;
    int m_port = 0;

    mutable std::mutex m_mutex;
    std::map<std::string, Session> m_sessions;
    std::map<std::string, std::size_t> m_requests;
    std::optional<std::vector<double>> m_fixed;
    std::optional<std::size_t> m_advertised;
    std::chrono::milliseconds m_latency{0};
    int m_fail = 0;
    std::size_t m_next_id = 0;
    std::size_t m_created = 0;
    std::size_t m_appended = 0;
    std::atomic<std::size_t> m_in_flight{0};
    std::atomic<std::size_t> m_max_in_flight{0};
};

} // namespace rsactl::testing
