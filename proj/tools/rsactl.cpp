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

// rsactl: train n-gram models, run controlled decoding, evaluate.
//
// Exit codes: 0 ok, 1 usage, 2 bad data or config, 3 write failure,
// 4 backend failure (remote unreachable, model unloadable), 5 invalid frame.

#include "rsactl/decode.hpp"
#include "rsactl/error.hpp"
#include "rsactl/eval.hpp"
#include "rsactl/frame.hpp"
#include "rsactl/ngram.hpp"
#include "rsactl/remote.hpp"
#include "rsactl/rsa.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifndef RSACTL_DATA_DIR
#define RSACTL_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rsactl;

namespace {

constexpr int kSchemaVersion = 1;

enum Exit : int { kOk = 0, kUsage = 1, kBadData = 2, kWriteFailed = 3, kBackendFailed = 4, kBadFrame = 5 };

struct Failure {
    int code;
    std::string message;
};

int exit_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::RemoteUnavailable:
    case ErrorCode::ProtocolViolation: return kBackendFailed;
    case ErrorCode::InvalidFrame: return kBadFrame;
    default: return kBadData;
    }
}

// Runs `fn`, turning any library error into a Failure with `code`.
template <class Fn>
auto guarded(int code, Fn &&fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error &e) {
        throw Failure{code, e.what()};
    } catch (const std::exception &e) {
        throw Failure{code, e.what()};
    }
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Failure{kBadData, "cannot read '" + path + "'"};
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary);
    if (out) {
        out << content;
        out.flush();
    }
    if (!out) {
        throw Failure{kWriteFailed, "cannot write '" + path + "'"};
    }
}

std::vector<std::string> read_lines(const std::string &path) {
    std::istringstream in(read_file(path));
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") != std::string::npos) {
            lines.push_back(line);
        }
    }
    return lines;
}

// ---------------------------------------------------------------------------
// Run configuration: a JSON file, then flags on top.

struct RunConfig {
    std::string backend = "ngram"; // ngram | remote
    std::string model_path;
    std::string endpoint;
    std::string remote_model;
    std::string frame_path;
    RationalityConfig rationality;
    DecodeConfig decode;
    bool raw = false; // decode straight from the backend, no frame
    bool content_ablation = false; // frame prompts may embed "{content}"
    std::string trace_path;
    std::string trace_format; // json | tsv; empty picks by extension
    std::string report_path;
    std::string familiar_words;

    json to_json() const {
        return {{"backend",
                 {{"type", backend}, {"model", backend == "ngram" ? model_path : remote_model}, {"endpoint", endpoint}}},
                {"frame", frame_path},
                {"rationality",
                 {{"alpha0", rationality.alpha0},
                  {"alpha1", rationality.alpha1},
                  {"mode", rationality.mode == RationalityMode::Adaptive ? "adaptive" : "fixed"},
                  {"top_m", rationality.top_m},
                  {"depth", rationality.recursion_depth},
                  {"inner_alpha", rationality.inner_alpha}}},
                {"decode",
                 {{"strategy", std::string(to_string(decode.strategy))},
                  {"beam_size", decode.beam_size},
                  {"top_p", decode.top_p},
                  {"max_new_tokens", decode.max_new_tokens},
                  {"seed", decode.seed},
                  {"raw", raw}}},
                {"output", {{"trace", trace_path}, {"trace_format", trace_format}, {"report", report_path}}},
                {"familiar_words", familiar_words},
                {"content_ablation", content_ablation}};
    }

    std::string hash() const {
        return hex64(fnv1a64(to_json().dump()));
    }
};

RationalityMode parse_mode(const std::string &s) {
    if (s == "fixed") {
        return RationalityMode::Fixed;
    }
    if (s == "adaptive") {
        return RationalityMode::Adaptive;
    }
    throw Failure{kBadData, "unknown rationality mode '" + s + "' (fixed|adaptive)"};
}

// Relative paths inside a config file are taken from the file's directory.
std::string relative_to(const fs::path &base, const std::string &p) {
    if (p.empty() || fs::path(p).is_absolute()) {
        return p;
    }
    return (base / p).lexically_normal().string();
}

void apply_json(RunConfig &cfg, const json &j, const fs::path &base) {
    if (j.contains("backend")) {
        const auto &b = j.at("backend");
        cfg.backend = b.value("type", cfg.backend);
        if (cfg.backend == "ngram") {
            cfg.model_path = relative_to(base, b.value("model", cfg.model_path));
        } else {
            cfg.remote_model = b.value("model", cfg.remote_model);
        }
        cfg.endpoint = b.value("endpoint", cfg.endpoint);
    }
    if (j.contains("frame")) {
        cfg.frame_path = relative_to(base, j.at("frame").get<std::string>());
    }
    if (j.contains("rationality")) {
        const auto &r = j.at("rationality");
        cfg.rationality.alpha0 = r.value("alpha0", cfg.rationality.alpha0);
        cfg.rationality.alpha1 = r.value("alpha1", cfg.rationality.alpha1);
        if (r.contains("mode")) {
            cfg.rationality.mode = parse_mode(r.at("mode").get<std::string>());
        }
        cfg.rationality.top_m = r.value("top_m", cfg.rationality.top_m);
        cfg.rationality.recursion_depth = r.value("depth", cfg.rationality.recursion_depth);
        cfg.rationality.inner_alpha = r.value("inner_alpha", cfg.rationality.inner_alpha);
    }
    if (j.contains("decode")) {
        const auto &d = j.at("decode");
        if (d.contains("strategy")) {
            cfg.decode.strategy = parse_strategy(d.at("strategy").get<std::string>());
        }
        cfg.decode.beam_size = d.value("beam_size", cfg.decode.beam_size);
        cfg.decode.top_p = d.value("top_p", cfg.decode.top_p);
        cfg.decode.max_new_tokens = d.value("max_new_tokens", cfg.decode.max_new_tokens);
        cfg.decode.seed = d.value("seed", cfg.decode.seed);
        cfg.raw = d.value("raw", cfg.raw);
    }
    if (j.contains("output")) {
        const auto &o = j.at("output");
        cfg.trace_path = relative_to(base, o.value("trace", cfg.trace_path));
        cfg.trace_format = o.value("trace_format", cfg.trace_format);
        cfg.report_path = relative_to(base, o.value("report", cfg.report_path));
    }
    cfg.content_ablation = j.value("content_ablation", cfg.content_ablation);
    if (j.contains("familiar_words")) {
        cfg.familiar_words = relative_to(base, j.at("familiar_words").get<std::string>());
    }
}

/// Flag overrides. Each string flag is bound to a local, applied only when given.
struct Overrides {
    std::string config;
    std::string model, endpoint, remote_model, frame, mode, strategy, trace, trace_format, report, familiar;
    double alpha0 = 0, alpha1 = 0, inner_alpha = 0, top_p = 0;
    std::size_t top_m = 0, beam_size = 0, max_new_tokens = 0;
    int depth = 0;
    std::uint64_t seed = 0;
    bool raw = false;
    bool content_ablation = false;

    void attach(CLI::App &app) {
        app.add_option("-c,--config", config, "run configuration (JSON)");
        app.add_option("--model", model, "n-gram model file (selects the ngram backend)");
        app.add_option("--endpoint", endpoint, "logits server URL (selects the remote backend)");
        app.add_option("--remote-model", remote_model, "model name expected from the server");
        app.add_option("--frame", frame, "attribute frame (JSON)");
        app.add_option("--alpha0", alpha0);
        app.add_option("--alpha1", alpha1);
        app.add_option("--mode", mode, "fixed | adaptive");
        app.add_option("--top-m", top_m);
        app.add_option("--depth", depth, "1 = S1, 2 = S2");
        app.add_option("--inner-alpha", inner_alpha);
        app.add_option("--strategy", strategy, "greedy | beam | nucleus");
        app.add_option("--beam-size", beam_size);
        app.add_option("--top-p", top_p);
        app.add_option("--max-new-tokens", max_new_tokens);
        app.add_option("--seed", seed);
        app.add_flag("--raw", raw, "decode from the backend alone, without control");
        app.add_flag("--content-ablation", content_ablation, "substitute the content prompt for {content} in the frame");
        app.add_option("--trace", trace, "trace output path");
        app.add_option("--trace-format", trace_format, "json | tsv");
        app.add_option("--report", report, "JSON report output path");
        app.add_option("--familiar-words", familiar, "word list for Dale-Chall");
    }

    RunConfig resolve(const CLI::App &app) const {
        RunConfig cfg;
        if (!config.empty()) {
            const fs::path base = fs::path(config).parent_path();
            try {
                apply_json(cfg, json::parse(read_file(config)), base);
            } catch (const json::exception &e) {
                throw Failure{kBadData, "config '" + config + "': " + e.what()};
            } catch (const Error &e) {
                throw Failure{kBadData, "config '" + config + "': " + e.what()};
            }
        }
        auto given = [&](const char *name) { return app.get_option(name)->count() > 0; };
        if (given("--model")) {
            cfg.backend = "ngram";
            cfg.model_path = model;
        }
        if (given("--endpoint")) {
            cfg.backend = "remote";
            cfg.endpoint = endpoint;
        }
        if (given("--remote-model")) {
            cfg.remote_model = remote_model;
        }
        if (given("--frame")) {
            cfg.frame_path = frame;
        }
        if (given("--alpha0")) {
            cfg.rationality.alpha0 = alpha0;
        }
        if (given("--alpha1")) {
            cfg.rationality.alpha1 = alpha1;
        }
        if (given("--mode")) {
            cfg.rationality.mode = parse_mode(mode);
        }
        if (given("--top-m")) {
            cfg.rationality.top_m = top_m;
        }
        if (given("--depth")) {
            cfg.rationality.recursion_depth = depth;
        }
        if (given("--inner-alpha")) {
            cfg.rationality.inner_alpha = inner_alpha;
        }
        if (given("--strategy")) {
            cfg.decode.strategy = guarded(kBadData, [&] { return parse_strategy(strategy); });
        }
        if (given("--beam-size")) {
            cfg.decode.beam_size = beam_size;
        }
        if (given("--top-p")) {
            cfg.decode.top_p = top_p;
        }
        if (given("--max-new-tokens")) {
            cfg.decode.max_new_tokens = max_new_tokens;
        }
        if (given("--seed")) {
            cfg.decode.seed = seed;
        }
        if (raw) {
            cfg.raw = true;
        }
        if (content_ablation) {
            cfg.content_ablation = true;
        }
        if (given("--trace")) {
            cfg.trace_path = trace;
        }
        if (given("--trace-format")) {
            cfg.trace_format = trace_format;
        }
        if (given("--report")) {
            cfg.report_path = report;
        }
        if (given("--familiar-words")) {
            cfg.familiar_words = familiar;
        }
        guarded(kBadData, [&] {
            cfg.rationality.validate();
            cfg.decode.validate();
        });
        if (cfg.backend != "ngram" && cfg.backend != "remote") {
            throw Failure{kBadData, "unknown backend '" + cfg.backend + "' (ngram|remote)"};
        }
        if (!cfg.trace_format.empty() && cfg.trace_format != "json" && cfg.trace_format != "tsv") {
            throw Failure{kBadData, "unknown trace format '" + cfg.trace_format + "' (json|tsv)"};
        }
        return cfg;
    }
};

std::unique_ptr<LanguageModel> open_backend(const RunConfig &cfg) {
    if (cfg.backend == "ngram") {
        if (cfg.model_path.empty()) {
            throw Failure{kBadData, "no backend: give --model or --endpoint"};
        }
        return guarded(kBackendFailed,
                       [&]() -> std::unique_ptr<LanguageModel> {
                           return std::make_unique<NGramModel>(NGramModel::load_file(cfg.model_path));
                       });
    }
    if (cfg.endpoint.empty()) {
        throw Failure{kBadData, "remote backend needs an endpoint"};
    }
    RemoteOptions opts;
    opts.endpoint = cfg.endpoint;
    opts.model = cfg.remote_model;
    if (const char *token = std::getenv("RSA_REMOTE_TOKEN"); token && *token) {
        opts.bearer_token = token;
    }
    return guarded(kBackendFailed, [&]() -> std::unique_ptr<LanguageModel> { return std::make_unique<RemoteModel>(opts); });
}

FrameSpec load_frame(const RunConfig &cfg) {
    if (cfg.frame_path.empty()) {
        throw Failure{kBadFrame, "no attribute frame configured (--frame)"};
    }
    return guarded(kBadFrame, [&] { return FrameSpec::load(cfg.frame_path, cfg.content_ablation); });
}

AttributeFrame open_frame(const RunConfig &cfg, const LanguageModel &lm, std::string_view content = {}) {
    const auto spec = load_frame(cfg);
    return guarded(kBadFrame, [&] { return bind_frame(spec, lm, content); });
}

// Library calls that talk to the backend.
template <class Fn>
auto on_backend(Fn &&fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error &e) {
        throw Failure{exit_for(e.code()), e.what()};
    }
}

json report_header(const std::string &command, const RunConfig *cfg) {
    json j{{"schema_version", kSchemaVersion}, {"command", command}};
    if (cfg != nullptr) {
        j["config"] = cfg->to_json();
        j["config_hash"] = cfg->hash();
    }
    return j;
}

void emit_report(const json &report, const std::string &path) {
    const std::string text = report.dump(2) + "\n";
    if (!path.empty()) {
        write_file(path, text);
    }
    std::cout << text;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string corpus;
    std::string out;
    NGramOptions opts;
};

int cmd_train(const TrainArgs &a) {
    std::ifstream in(a.corpus, std::ios::binary);
    if (!in) {
        throw Failure{kBadData, "cannot read corpus '" + a.corpus + "'"};
    }
    const auto model = guarded(kBadData, [&] { return NGramModel::train(in, a.opts); });
    try {
        model.save_file(a.out);
    } catch (const Error &e) {
        throw Failure{kWriteFailed, e.what()};
    }
    json counts = json::array();
    for (std::size_t n = 1; n <= model.options().order; ++n) {
        counts.push_back(model.ngram_count(n));
    }
    json report = report_header("train", nullptr);
    report["model"] = a.out;
    report["order"] = model.options().order;
    report["lambda"] = model.options().lambda;
    report["delta"] = model.options().delta;
    report["vocab_size"] = model.vocab_size();
    report["ngram_counts"] = counts;
    emit_report(report, "");
    return kOk;
}

std::string trace_path_for(const std::string &base, std::size_t index, std::size_t total) {
    if (total == 1) {
        return base;
    }
    fs::path p(base);
    return (p.parent_path() / (p.stem().string() + "." + std::to_string(index) + p.extension().string())).string();
}

TraceFormat trace_format_of(const RunConfig &cfg) {
    if (cfg.trace_format == "tsv") {
        return TraceFormat::Tsv;
    }
    if (cfg.trace_format.empty() && fs::path(cfg.trace_path).extension() == ".tsv") {
        return TraceFormat::Tsv;
    }
    return TraceFormat::Json;
}

int cmd_generate(const RunConfig &cfg, const std::vector<std::string> &prompts) {
    if (prompts.empty()) {
        throw Failure{kBadData, "nothing to generate: give --prompt or --prompts"};
    }
    const auto lm = open_backend(cfg);
    std::optional<FrameSpec> spec;
    if (!cfg.raw) {
        spec = load_frame(cfg);
    }
    const auto stop = stop_set(*lm, cfg.decode);

    json results = json::array();
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        std::optional<AttributeFrame> frame;
        if (spec) {
            frame = guarded(kBadFrame, [&] { return bind_frame(*spec, *lm, prompts[i]); });
        }
        const auto prompt = on_backend([&] { return lm->tokenize(prompts[i]); });
        const auto res = on_backend([&] {
            return frame ? decode(*lm, *frame, prompt, cfg.rationality, cfg.decode) : decode_raw(*lm, prompt, cfg.decode);
        });
        const auto &best = res.best();
        const auto out = best.output_tokens(stop);
        const std::string text = lm->detokenize(out);
        std::cout << text << "\n";

        json r{{"prompt", prompts[i]},
               {"text", text},
               {"tokens", out},
               {"status", res.status == DecodeStatus::Ok ? "ok" : "zero_length_output"},
               {"cum_logp", best.cum_logp}};
        if (frame) {
            r["target_posterior"] = best.belief.posterior(frame->target());
            double lo = 0.0;
            double hi = 0.0;
            for (std::size_t s = 0; s < best.trace.steps.size(); ++s) {
                const double a = best.trace.steps[s].alpha_used;
                lo = s == 0 ? a : std::min(lo, a);
                hi = s == 0 ? a : std::max(hi, a);
            }
            r["alpha_used_min"] = lo;
            r["alpha_used_max"] = hi;
        }
        if (!cfg.trace_path.empty()) {
            const auto path = trace_path_for(cfg.trace_path, i, prompts.size());
            write_file(path, export_trace(best.trace, trace_format_of(cfg)));
            r["trace"] = path;
        }
        results.push_back(std::move(r));
    }
    std::cout.flush();

    if (!cfg.report_path.empty()) {
        json report = report_header("generate", &cfg);
        report["results"] = results;
        write_file(cfg.report_path, report.dump(2) + "\n");
    }
    return kOk;
}

std::string familiar_words_path(const RunConfig &cfg) {
    if (!cfg.familiar_words.empty()) {
        return cfg.familiar_words;
    }
    return std::string(RSACTL_DATA_DIR) + "/familiar_words.txt";
}

int cmd_eval_readability(const RunConfig &cfg, const std::string &data) {
    const auto familiar = guarded(kBadData, [&] { return load_word_set(familiar_words_path(cfg)); });
    const auto docs = read_lines(data);
    if (docs.empty()) {
        throw Failure{kBadData, "no text in '" + data + "'"};
    }
    json rows = json::array();
    double fre = 0, dcr = 0, gfi = 0, cli = 0;
    for (const auto &doc : docs) {
        const auto r = guarded(kBadData, [&] { return readability(doc, familiar); });
        fre += r.fre;
        dcr += r.dcr;
        gfi += r.gfi;
        cli += r.cli_index;
        rows.push_back({{"fre", r.fre},
                        {"dcr", r.dcr},
                        {"gfi", r.gfi},
                        {"cli", r.cli_index},
                        {"words", r.word_count},
                        {"sentences", r.sentence_count},
                        {"syllables", r.syllable_count}});
    }
    const double n = static_cast<double>(docs.size());
    json report = report_header("eval readability", &cfg);
    report["documents"] = docs.size();
    report["mean"] = {{"fre", fre / n}, {"dcr", dcr / n}, {"gfi", gfi / n}, {"cli", cli / n}};
    report["per_document"] = rows;
    emit_report(report, cfg.report_path);
    return kOk;
}

int cmd_eval_classify(const RunConfig &cfg, const std::string &data) {
    const auto dataset = guarded(kBadData, [&] { return load_labeled_tsv(data); });
    const auto lm = open_backend(cfg);
    const auto frame = open_frame(cfg, *lm);
    if (frame.size() != 2) {
        throw Failure{kBadFrame, "classification needs a two-attribute frame"};
    }
    std::size_t correct = 0;
    std::map<std::string, std::map<std::string, std::size_t>> confusion; // label -> guess -> count
    for (const auto &ex : dataset) {
        const auto guess = on_backend([&] { return classify(*lm, frame, ex.text); });
        correct += guess == ex.label;
        ++confusion[ex.label][guess];
    }
    json report = report_header("eval classify", &cfg);
    report["examples"] = dataset.size();
    report["correct"] = correct;
    report["accuracy"] = static_cast<double>(correct) / static_cast<double>(dataset.size());
    report["confusion"] = confusion;
    emit_report(report, cfg.report_path);
    return kOk;
}

int cmd_eval_pairs(const RunConfig &cfg, const std::string &data) {
    const auto pairs = guarded(kBadData, [&] { return load_pairs_tsv(data); });
    const auto lm = open_backend(cfg);
    json report = report_header("eval pairs", &cfg);
    report["pairs"] = pairs.size();

    auto score_all = [&](const SequenceScorer &scorer) {
        json by_type = json::object();
        std::map<std::string, std::vector<PairExample>> groups;
        for (const auto &p : pairs) {
            groups[p.bias_type].push_back(p);
        }
        for (const auto &[type, group] : groups) {
            by_type[type] = on_backend([&] { return pairwise_bias_score(group, scorer); });
        }
        return json{{"score", on_backend([&] { return pairwise_bias_score(pairs, scorer); })}, {"by_bias_type", by_type}};
    };
    report["raw"] = score_all(raw_scorer(*lm));
    if (!cfg.frame_path.empty()) {
        const auto frame = open_frame(cfg, *lm);
        const auto scorer = guarded(kBadData, [&] { return pragmatic_scorer(*lm, frame, cfg.rationality); });
        report["pragmatic"] = score_all(scorer);
    }
    emit_report(report, cfg.report_path);
    return kOk;
}

// One "prompt<TAB>continuation" per line; a line without a tab is a continuation
// with an empty prompt.
int cmd_eval_ppl(const RunConfig &cfg, const std::string &data) {
    const auto lines = read_lines(data);
    if (lines.empty()) {
        throw Failure{kBadData, "no rows in '" + data + "'"};
    }
    const auto lm = open_backend(cfg);
    json rows = json::array();
    double sum = 0.0;
    for (const auto &line : lines) {
        const auto tab = line.find('\t');
        const std::string prompt = tab == std::string::npos ? std::string{} : line.substr(0, tab);
        const std::string cont = tab == std::string::npos ? line : line.substr(tab + 1);
        const double ppl = on_backend([&] { return conditional_ppl(*lm, lm->tokenize(prompt), lm->tokenize(cont)); });
        sum += ppl;
        rows.push_back({{"prompt", prompt}, {"continuation", cont}, {"ppl", ppl}});
    }
    json report = report_header("eval ppl", &cfg);
    report["rows"] = lines.size();
    report["mean_ppl"] = sum / static_cast<double>(lines.size());
    report["per_row"] = rows;
    emit_report(report, cfg.report_path);
    return kOk;
}

// Mean final listener posterior: incremental decoding against rerank of n samples.
int cmd_eval_rerank(const RunConfig &cfg, const std::string &data, const std::vector<std::size_t> &sizes) {
    const auto prompts = read_lines(data);
    if (prompts.empty()) {
        throw Failure{kBadData, "no prompts in '" + data + "'"};
    }
    if (sizes.empty()) {
        throw Failure{kBadData, "no sample counts"};
    }
    const auto lm = open_backend(cfg);
    const auto frame = open_frame(cfg, *lm);
    DecodeConfig sampling = cfg.decode;
    sampling.strategy = Strategy::Nucleus;

    double incremental = 0.0;
    std::vector<double> reranked(sizes.size(), 0.0);
    for (const auto &p : prompts) {
        const auto prompt = on_backend([&] { return lm->tokenize(p); });
        const auto res = on_backend([&] { return decode(*lm, frame, prompt, cfg.rationality, cfg.decode); });
        incremental += res.best().belief.posterior(frame.target());
        for (std::size_t k = 0; k < sizes.size(); ++k) {
            const auto rr = on_backend([&] { return rerank_samples(*lm, frame, prompt, sizes[k], sampling); });
            reranked[k] += rr.target_posteriors[rr.best];
        }
    }
    const double n = static_cast<double>(prompts.size());
    json rerank = json::array();
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        rerank.push_back({{"n", sizes[k]}, {"mean_target_posterior", reranked[k] / n}});
    }
    json report = report_header("eval rerank", &cfg);
    report["prompts"] = prompts.size();
    report["incremental_mean_target_posterior"] = incremental / n;
    report["rerank"] = rerank;
    emit_report(report, cfg.report_path);
    return kOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Pragmatic (RSA) controllable decoding toolkit"};
    app.require_subcommand(1);

    TrainArgs train;
    auto *train_cmd = app.add_subcommand("train", "train an interpolated n-gram model");
    train_cmd->add_option("corpus", train.corpus, "one document per line")->required();
    train_cmd->add_option("-o,--out", train.out, "model output path")->required();
    train_cmd->add_option("--order", train.opts.order)->capture_default_str();
    train_cmd->add_option("--lambda", train.opts.lambda)->capture_default_str();
    train_cmd->add_option("--delta", train.opts.delta)->capture_default_str();

    Overrides gen_over;
    std::vector<std::string> gen_prompts;
    std::string gen_prompt_file;
    auto *gen_cmd = app.add_subcommand("generate", "controlled decoding from one or more prompts");
    gen_over.attach(*gen_cmd);
    gen_cmd->add_option("-p,--prompt", gen_prompts, "content prompt (repeatable)");
    gen_cmd->add_option("--prompts", gen_prompt_file, "file with one prompt per line");

    auto *eval_cmd = app.add_subcommand("eval", "evaluation protocols");
    eval_cmd->require_subcommand(1);
    struct EvalSub {
        CLI::App *cmd = nullptr;
        Overrides over;
        std::string data;
    };
    std::map<std::string, EvalSub> subs;
    std::vector<std::size_t> rerank_sizes{1, 5, 10, 20};
    for (const char *name : {"classify", "pairs", "readability", "ppl", "rerank"}) {
        auto &s = subs[name];
        s.cmd = eval_cmd->add_subcommand(name);
        s.over.attach(*s.cmd);
        s.cmd->add_option("data", s.data, "input data file")->required();
    }
    subs["classify"].cmd->description("listener accuracy on text<TAB>label rows");
    subs["pairs"].cmd->description("pairwise preference score on sent_more<TAB>sent_less<TAB>type rows");
    subs["readability"].cmd->description("FRE, DCR, GFI and CLI per line of text");
    subs["ppl"].cmd->description("conditional perplexity of prompt<TAB>continuation rows");
    subs["rerank"].cmd->description("incremental decoding against sample reranking, one prompt per line");
    subs["rerank"].cmd->add_option("-n,--samples", rerank_sizes, "sample counts")->delimiter(',')->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*train_cmd) {
            return cmd_train(train);
        }
        if (*gen_cmd) {
            const auto cfg = gen_over.resolve(*gen_cmd);
            auto prompts = gen_prompts;
            if (!gen_prompt_file.empty()) {
                const auto more = read_lines(gen_prompt_file);
                prompts.insert(prompts.end(), more.begin(), more.end());
            }
            return cmd_generate(cfg, prompts);
        }
        for (auto &[name, s] : subs) {
            if (!*s.cmd) {
                continue;
            }
            const auto cfg = s.over.resolve(*s.cmd);
            if (name == "classify") {
                return cmd_eval_classify(cfg, s.data);
            }
            if (name == "pairs") {
                return cmd_eval_pairs(cfg, s.data);
            }
            if (name == "readability") {
                return cmd_eval_readability(cfg, s.data);
            }
            if (name == "ppl") {
                return cmd_eval_ppl(cfg, s.data);
            }
            return cmd_eval_rerank(cfg, s.data, rerank_sizes);
        }
    } catch (const Failure &f) {
        std::cerr << "rsactl: " << f.message << "\n";
        return f.code;
    } catch (const Error &e) {
        std::cerr << "rsactl: " << e.what() << "\n";
        return exit_for(e.code());
    } catch (const std::exception &e) {
        std::cerr << "rsactl: " << e.what() << "\n";
        return kBadData;
    }
    return kUsage;
}
