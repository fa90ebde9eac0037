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

// Drives the rsactl binary as a subprocess.

#include "fixture.hpp"
#include "rsactl/decode.hpp"
#include "stub_server.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rsactl;

namespace {

struct Run {
    int rc = -1;
    std::string out;
    std::string err;
};

fs::path work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::path(RSACTL_TEST_WORK) / "cli";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path put(const std::string &name, const std::string &content) {
    const auto p = work_dir() / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
}

std::string q(const std::string &s) {
    std::string r = "'";
    for (char c : s) {
        r += c == '\'' ? std::string("'\\''") : std::string(1, c);
    }
    return r + "'";
}

Run cli(const std::string &args) {
    const auto err = work_dir() / "stderr.txt";
    const std::string cmd = q(RSACTL_CLI) + " " + args + " 2>" + q(err.string());
    Run r;
    FILE *pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) {
        r.out.append(buf, n);
    }
    const int status = pclose(pipe);
    r.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(err);
    return r;
}

// Trained once; shared by the generate tests.
struct StyleFiles {
    fs::path corpus, model, frame, config;
    std::vector<std::string> prompts;
};

const StyleFiles &style_files() {
    static const StyleFiles files = [] {
        const auto fx = rsactl::testing::make_style_fixture();
        StyleFiles f;
        std::string corpus;
        for (const auto &line : fx.training_lines) {
            corpus += line + "\n";
        }
        f.corpus = put("style.txt", corpus);
        f.model = work_dir() / "style.bin";
        f.frame = put("style_frame.json", fx.frame.to_json());
        f.config = put("style.json", json{{"backend", {{"type", "ngram"}, {"model", "style.bin"}}},
                                          {"frame", "style_frame.json"},
                                          {"rationality", {{"alpha0", 5.0}}},
                                          {"decode", {{"strategy", "greedy"}, {"max_new_tokens", 12}}}}
                                         .dump(2));
        f.prompts = fx.prompts;
        const auto r = cli("train " + q(f.corpus.string()) + " -o " + q(f.model.string()));
        REQUIRE(r.rc == 0);
        return f;
    }();
    return files;
}

std::string prompt_args(const std::vector<std::string> &prompts, std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n && i < prompts.size(); ++i) {
        s += " -p " + q(prompts[i]);
    }
    return s;
}

} // namespace

TEST_CASE("train reports the vocabulary and n-gram counts") {
    const auto corpus = put("two.txt", "the cat sat\nthe dog sat down\n");
    const auto out = work_dir() / "two.bin";
    const auto r = cli("train " + q(corpus.string()) + " --order 2 -o " + q(out.string()));
    REQUIRE(r.rc == 0);
    const auto j = json::parse(r.out);
    // the, cat, sat, dog, down + <s>, </s>, <unk>
    CHECK(j.at("vocab_size") == 5 + 3);
    CHECK(j.at("schema_version") == 1);
    // unigrams: 7 word tokens + 2 </s>; bigram types:
    // <s>-the, the-cat, cat-sat, sat-</s>, the-dog, dog-sat, sat-down, down-</s>
    CHECK(j.at("ngram_counts")[1] == 8);
    CHECK(fs::exists(out));

    const auto again = work_dir() / "two_again.bin";
    REQUIRE(cli("train " + q(corpus.string()) + " --order 2 -o " + q(again.string())).rc == 0);
    CHECK(slurp(out) == slurp(again));
}

TEST_CASE("train error paths") {
    const auto empty = put("empty.txt", "");
    const auto r = cli("train " + q(empty.string()) + " -o " + q((work_dir() / "e.bin").string()));
    CHECK(r.rc == 2);
    CHECK(r.err.find("empty corpus") != std::string::npos);
    CHECK(r.out.empty());

    CHECK(cli("train /nonexistent/corpus.txt -o x.bin").rc == 2);
    const auto ok = put("one.txt", "a b\n");
    CHECK(cli("train " + q(ok.string()) + " -o /nonexistent/dir/m.bin").rc == 3);
    CHECK(cli("train " + q(ok.string()) + " --lambda 1.5 -o " + q((work_dir() / "l.bin").string())).rc == 2);
    CHECK(cli("").rc == 1);
}

TEST_CASE("generate without control equals raw decoding") {
    const auto &f = style_files();
    const auto prompts = prompt_args(f.prompts, 10);
    for (const char *strategy : {"greedy", "beam --beam-size 3", "nucleus --top-p 0.9 --seed 11"}) {
        const auto s = std::string(" --strategy ") + strategy;
        const auto controlled = cli("generate -c " + q(f.config.string()) + " --alpha0 0 --alpha1 0" + s + prompts);
        const auto raw = cli("generate -c " + q(f.config.string()) + " --raw" + s + prompts);
        REQUIRE(controlled.rc == 0);
        REQUIRE(raw.rc == 0);
        CHECK(controlled.out == raw.out);
        CHECK(std::count(raw.out.begin(), raw.out.end(), '\n') == 10);
    }
}

TEST_CASE("adaptive rationality stays in range in every trace") {
    const auto &f = style_files();
    const auto trace = work_dir() / "adaptive.json";
    const auto r = cli("generate -c " + q(f.config.string()) + " --mode adaptive --alpha0 2 --alpha1 3 --trace " +
                          q(trace.string()) + prompt_args(f.prompts, 5));
    REQUIRE(r.rc == 0);
    std::size_t steps = 0;
    for (std::size_t i = 0; i < 5; ++i) {
        const auto t = parse_trace_json(slurp(work_dir() / ("adaptive." + std::to_string(i) + ".json")));
        for (const auto &s : t.steps) {
            CHECK(s.alpha_used >= 2.0);
            CHECK(s.alpha_used <= 5.0);
            ++steps;
        }
    }
    CHECK(steps >= 5);
}

TEST_CASE("generate matches the golden snapshot") {
    const auto &f = style_files();
    const auto r = cli("generate -c " + q(f.config.string()) + " --strategy nucleus --seed 3" + prompt_args(f.prompts, 8));
    REQUIRE(r.rc == 0);
    const auto golden = fs::path(RSACTL_TEST_SOURCE) / "golden" / "style_generate.txt";
    if (!fs::exists(golden)) {
        std::ofstream(golden, std::ios::binary) << r.out;
        FAIL("golden file was missing; wrote " << golden.string() << " for review");
    }
    CHECK(r.out == slurp(golden));
}

TEST_CASE("flags override the config and change the hash") {
    const auto &f = style_files();
    const auto a = work_dir() / "report_a.json";
    const auto b = work_dir() / "report_b.json";
    const auto c = work_dir() / "report_c.json";
    const std::string base = "generate -c " + q(f.config.string()) + prompt_args(f.prompts, 3);
    REQUIRE(cli(base + " --report " + q(a.string())).rc == 0);
    REQUIRE(cli(base + " --report " + q(b.string())).rc == 0);
    REQUIRE(cli(base + " --alpha0 1 --report " + q(c.string())).rc == 0);
    const auto ja = json::parse(slurp(a));
    const auto jc = json::parse(slurp(c));
    CHECK(ja.at("config").at("rationality").at("alpha0") == 5.0);
    CHECK(jc.at("config").at("rationality").at("alpha0") == 1.0);
    CHECK(ja.at("config_hash").get<std::string>().size() == 16);
    CHECK(ja.at("config_hash") != jc.at("config_hash"));
    CHECK(ja.at("schema_version") == 1);
    // same command twice: same bytes, apart from the report path itself
    auto ja2 = json::parse(slurp(b));
    ja2["config"]["output"]["report"] = ja["config"]["output"]["report"];
    CHECK(ja2.at("results") == ja.at("results"));
    CHECK(ja2.at("results").size() == 3);
}

TEST_CASE("generate error exits") {
    const auto &f = style_files();
    const auto bad_frame = put("bad_frame.json", R"({"attributes":[{"name":"a","prompt":"polite","role":"target"}]})");
    CHECK(cli("generate -c " + q(f.config.string()) + " --frame " + q(bad_frame.string()) + " -p hi").rc == 5);
    CHECK(cli("generate -c " + q(f.config.string()) + " --frame /nonexistent.json -p hi").rc == 5);
    CHECK(cli("generate --endpoint http://127.0.0.1:1 --raw -p hi").rc == 4);
    CHECK(cli("generate --model /nonexistent.bin --raw -p hi").rc == 4);
    CHECK(cli("generate -c " + q(f.config.string()) + " --trace /nonexistent/dir/t.json -p hi").rc == 3);
    CHECK(cli("generate -c " + q(f.config.string()) + " --depth 3 -p hi").rc == 2);
    CHECK(cli("generate -c " + q(f.config.string())).rc == 2);
    const auto broken = put("broken.json", "{ not json");
    CHECK(cli("generate -c " + q(broken.string()) + " -p hi").rc == 2);
}

TEST_CASE("eval readability reports the hand-computed score") {
    const auto text = put("cat.txt", "The cat sat.\n");
    const auto r = cli("eval readability " + q(text.string()));
    REQUIRE(r.rc == 0);
    const auto j = json::parse(r.out);
    CHECK(std::abs(j.at("mean").at("fre").get<double>() - 119.19) <= 1e-6);
    CHECK(j.at("per_document")[0].at("syllables") == 3);
    CHECK(j.contains("config_hash"));
    CHECK(cli("eval readability " + q(put("blank.txt", "\n\n").string())).rc == 2);
}

TEST_CASE("eval pairs and classify") {
    const auto &f = style_files();
    CHECK(cli("eval pairs -c " + q(f.config.string()) + " " + q(put("no_pairs.tsv", "").string())).rc == 2);
    CHECK(cli("eval pairs -c " + q(f.config.string()) + " " + q(put("bad_pairs.tsv", "a\tb\n").string())).rc == 2);

    const auto pairs = put("pairs.tsv", "polite kind thanks\trude nasty insult\tstyle\n"
                                        "rude nasty insult\tpolite kind thanks\tstyle\n");
    const auto r = cli("eval pairs -c " + q(f.config.string()) + " " + q(pairs.string()));
    REQUIRE(r.rc == 0);
    const auto j = json::parse(r.out);
    CHECK(j.at("pairs") == 2);
    // a pair and its swap: one of the two must win unless they tie
    CHECK(j.at("raw").at("score").get<double>() <= 50.0);
    CHECK(j.contains("pragmatic"));

    const auto fx = rsactl::testing::make_style_fixture();
    std::string rows;
    for (std::size_t i = 0; i < 20; ++i) {
        rows += fx.heldout[i * 10].text + "\t" + fx.heldout[i * 10].label + "\n";
    }
    const auto cls = cli("eval classify -c " + q(f.config.string()) + " " + q(put("labeled.tsv", rows).string()));
    REQUIRE(cls.rc == 0);
    const auto jc = json::parse(cls.out);
    CHECK(jc.at("examples") == 20);
    CHECK(jc.at("accuracy").get<double>() >= 0.9);
}

TEST_CASE("eval ppl of a deterministic remote model is exactly one") {
    TableModel lm({"<s>", "</s>", "x", "y"}, TokenDist::from_probs(std::vector<double>{0, 1, 0, 0}));
    lm.set({}, {}, TokenDist::from_probs(std::vector<double>{0, 0, 1, 0}));
    lm.set({}, {2}, TokenDist::from_probs(std::vector<double>{0, 0, 0, 1}));
    rsactl::testing::StubServer srv(lm, "toy", std::string("s3cret"));
    const auto rows = put("ppl.tsv", "x y\n");

    ::setenv("RSA_REMOTE_TOKEN", "wrong", 1);
    CHECK(cli("eval ppl --endpoint " + srv.endpoint() + " " + q(rows.string())).rc == 4);
    ::setenv("RSA_REMOTE_TOKEN", "s3cret", 1);
    const auto r = cli("eval ppl --endpoint " + srv.endpoint() + " " + q(rows.string()));
    ::unsetenv("RSA_REMOTE_TOKEN");
    REQUIRE(r.rc == 0);
    const auto j = json::parse(r.out);
    CHECK(j.at("mean_ppl").get<double>() == 1.0);
    CHECK(j.at("per_row")[0].at("ppl").get<double>() == 1.0);
}

TEST_CASE("eval rerank reports every sample count") {
    const auto &f = style_files();
    std::string prompts;
    for (std::size_t i = 0; i < 3; ++i) {
        prompts += f.prompts[i] + "\n";
    }
    const auto r = cli("eval rerank -c " + q(f.config.string()) + " -n 1,5 " + q(put("prompts.txt", prompts).string()));
    REQUIRE(r.rc == 0);
    const auto j = json::parse(r.out);
    CHECK(j.at("prompts") == 3);
    REQUIRE(j.at("rerank").size() == 2);
    CHECK(j.at("rerank")[1].at("n") == 5);
    const double p1 = j.at("rerank")[0].at("mean_target_posterior");
    const double p5 = j.at("rerank")[1].at("mean_target_posterior");
    CHECK(p5 >= p1);
}

TEST_CASE("content placeholders need the ablation switch") {
    const auto &f = style_files();
    const auto frame = put("ablation_frame.json", R"({"attributes":[)"
                                                  R"({"name":"polite","prompt":"polite {content}","role":"target"},)"
                                                  R"({"name":"rude","prompt":"rude {content}","role":"distractor"}]})");
    const std::string base = "generate -c " + q(f.config.string()) + " --frame " + q(frame.string()) + " -p " + q(f.prompts[0]);
    CHECK(cli(base).rc == 5);
    const auto r = cli(base + " --content-ablation");
    CHECK(r.rc == 0);
    CHECK(!r.out.empty());
}
