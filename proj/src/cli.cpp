// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0

#include "revkit/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "revkit/common.hpp"
#include "revkit/corpus.hpp"
#include "revkit/ingest.hpp"
#include "revkit/manifest.hpp"
#include "revkit/metrics.hpp"
#include "revkit/model.hpp"
#include "revkit/objectives.hpp"
#include "revkit/tokenizer.hpp"
#include "revkit/trainer.hpp"

namespace revkit {

namespace {

namespace fs = std::filesystem;

std::string now_rfc3339() {
    auto now = std::chrono::system_clock::now();
    return format_rfc3339(
        std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count());
}

// Tracks artifacts so a failed command leaves nothing half-written behind.
struct OutputGuard {
    std::vector<std::string> paths;
    bool committed = false;

    void track(const std::string& p) { paths.push_back(p); }
    void commit() { committed = true; }
    ~OutputGuard() {
        if (committed) return;
        for (const auto& p : paths) {
            std::error_code ec;
            fs::remove_all(p, ec);
        }
    }
};

RunManifest begin_manifest(const std::string& command, std::uint64_t seed) {
    RunManifest m;
    m.command = command;
    m.seed = seed;
    m.tool_version = kToolVersion;
    m.started_at = now_rfc3339();
    return m;
}

void finish_manifest(RunManifest& m, const std::string& path) {
    m.finished_at = now_rfc3339();
    m.write_atomic(path);
}

template <typename T, typename Fn>
void write_jsonl(const std::string& path, const std::vector<T>& items, Fn&& to_json) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& item : items) out << to_json(item).dump() << "\n";
}

template <typename Fn>
auto read_jsonl(const std::string& path, Fn&& from_json)
    -> std::vector<decltype(from_json(nlohmann::json{}))> {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::vector<decltype(from_json(nlohmann::json{}))> items;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        items.push_back(from_json(nlohmann::json::parse(line)));
    }
    return items;
}

// ---------------------------------------------------------------- ingest --

struct IngestArgs {
    std::string repo;
    std::string fixtures;
    std::string out;
    int max_prs = 200;
    std::string token_env = "CODEHOST_TOKEN";
    std::string base_url = "https://api.github.com";
};

int cmd_ingest(const IngestArgs& args) {
    if (args.repo.empty() == args.fixtures.empty()) {
        std::cerr << "ingest: exactly one of --repo or --fixtures is required\n";
        return 2;
    }
    OutputGuard guard;
    guard.track(args.out);
    RunManifest manifest = begin_manifest("ingest", 0);

    std::vector<RawPullRequest> prs;
    std::vector<std::string> warnings;
    if (!args.fixtures.empty()) {
        manifest.inputs.push_back(args.fixtures);
        prs = load_fixtures(args.fixtures, &warnings);
    } else {
        manifest.inputs.push_back(args.base_url + "/" + args.repo);
        std::string token;
        if (const char* env = std::getenv(args.token_env.c_str())) token = env;
        FetchOptions options;
        options.base_url = args.base_url;
        prs = fetch_pull_requests(args.repo, token, args.max_prs, options);
    }
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

    write_jsonl(args.out, prs, raw_pr_to_json);
    manifest.outputs.push_back(args.out);
    manifest.extra["pull_requests"] = std::to_string(prs.size());
    manifest.extra["warnings"] = std::to_string(warnings.size());
    finish_manifest(manifest, args.out + ".manifest.json");
    guard.commit();
    std::cerr << "ingested " << prs.size() << " pull requests -> " << args.out << "\n";
    return 0;
}

// ----------------------------------------------------------------- build --

struct BuildArgs {
    std::string task;
    std::string prs_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::string split_config;
    int vocab_size = 8000;
    std::string revision_match = "overlap";
};

SplitConfig load_split_config(const std::string& path, std::uint64_t seed) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read split config " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    SplitConfig cfg;
    for (const auto& p : j.at("train_projects")) cfg.train_projects.insert(p.get<std::string>());
    for (const auto& p : j.at("eval_projects")) cfg.eval_projects.insert(p.get<std::string>());
    cfg.valid_fraction = j.value("valid_fraction", 0.5);
    cfg.seed = seed;
    return cfg;
}

int cmd_build(const BuildArgs& args) {
    OutputGuard guard;
    guard.track(args.out_dir);
    fs::create_directories(args.out_dir);
    RunManifest manifest = begin_manifest("build", args.seed);
    manifest.inputs = {args.prs_path, args.split_config};
    manifest.config_path = args.split_config;

    NormalizeOptions norm_options;
    norm_options.revision_match = args.revision_match == "exact"
                                      ? NormalizeOptions::RevisionMatch::Exact
                                      : NormalizeOptions::RevisionMatch::Overlap;

    auto prs = read_jsonl(args.prs_path, raw_pr_from_json);
    std::vector<ReviewRecord> records;
    std::vector<std::string> warnings;
    for (const auto& pr : prs) {
        auto batch = normalize(pr, norm_options, &warnings);
        records.insert(records.end(), batch.begin(), batch.end());
    }
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

    CleanRules rules;
    records = clean_comments(std::move(records), rules);
    SplitResult split = split_by_project(records, load_split_config(args.split_config, args.seed));
    for (const auto& w : split.warnings) std::cerr << "warning: " << w << "\n";

    struct Part {
        const char* name;
        const std::vector<ReviewRecord>* records;
    };
    const Part parts[] = {{"train", &split.train}, {"valid", &split.valid}, {"test", &split.test}};

    auto out_path = [&](const std::string& stem) { return args.out_dir + "/" + stem; };
    for (const auto& part : parts) {
        std::string path;
        if (args.task == "quality") {
            auto ds = build_quality_dataset(*part.records,
                                            mix64(args.seed, fnv1a64(part.name)));
            path = out_path("quality." + std::string(part.name) + ".jsonl");
            write_jsonl(path, ds, quality_sample_to_json);
            manifest.extra[std::string("count_") + part.name] = std::to_string(ds.size());
        } else if (args.task == "comment") {
            auto ds = build_comment_dataset(*part.records);
            path = out_path("comment." + std::string(part.name) + ".jsonl");
            write_jsonl(path, ds, comment_sample_to_json);
            manifest.extra[std::string("count_") + part.name] = std::to_string(ds.size());
        } else if (args.task == "refine") {
            auto ds = build_refinement_dataset(*part.records);
            path = out_path("refine." + std::string(part.name) + ".jsonl");
            write_jsonl(path, ds, refinement_sample_to_json);
            manifest.extra[std::string("count_") + part.name] = std::to_string(ds.size());
        } else if (args.task == "pretrain") {
            auto ds = build_pretrain_dataset(*part.records);
            path = out_path("pretrain." + std::string(part.name) + ".jsonl");
            write_jsonl(path, ds, pretrain_example_to_json);
            manifest.extra[std::string("count_") + part.name] = std::to_string(ds.size());
        } else {
            std::cerr << "build: unknown --task " << args.task << "\n";
            return 2;
        }
        manifest.outputs.push_back(path);
    }

    if (args.task == "pretrain") {
        // Train the tokenizer on the training split only.
        std::vector<std::string> corpus;
        for (const auto& r : split.train) {
            for (const auto& line : r.hunk.lines) corpus.push_back(line.content + "\n");
            if (r.comment) corpus.push_back(r.comment->body);
        }
        Vocab vocab = train_bpe(corpus, args.vocab_size);
        vocab.save(out_path("vocab.json"));
        manifest.outputs.push_back(out_path("vocab.json"));
        manifest.extra["vocab_size"] = std::to_string(vocab.size());
        manifest.extra["vocab_fingerprint"] = std::to_string(vocab.fingerprint());
    }

    manifest.extra["records"] = std::to_string(records.size());
    manifest.extra["clean_rules"] =
        "min_words=" + std::to_string(rules.min_words) +
        ",max_words=" + std::to_string(rules.max_words) + ",non_ascii_ratio=" +
        std::to_string(rules.max_non_ascii_ratio) + ",version=" + std::to_string(rules.version);
    finish_manifest(manifest, out_path("manifest.json"));
    guard.commit();
    return 0;
}

// ----------------------------------------------------------------- train --

struct TrainArgs {
    std::string stage;
    std::string task;
    std::string data;
    std::string vocab_path;
    std::string config_path;
    std::string init_ckpt;
    std::string out_dir;
    std::string log_path;
};

void parse_train_config(const std::string& path, TrainConfig& tc, ModelConfig& mc) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read config " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.contains("model")) {
        const auto& m = j["model"];
        mc.n_enc_layers = m.value("n_enc_layers", mc.n_enc_layers);
        mc.n_dec_layers = m.value("n_dec_layers", mc.n_dec_layers);
        mc.n_heads = m.value("n_heads", mc.n_heads);
        mc.d_model = m.value("d_model", mc.d_model);
        mc.d_ff = m.value("d_ff", mc.d_ff);
        mc.vocab_size = m.value("vocab_size", 0);  // 0 = size of --vocab
        mc.max_len = m.value("max_len", mc.max_len);
        mc.dropout = m.value("dropout", mc.dropout);
    }
    if (j.contains("train")) {
        const auto& t = j["train"];
        tc.lr = t.value("lr", tc.lr);
        tc.batch_size = t.value("batch_size", tc.batch_size);
        tc.warmup_steps = t.value("warmup_steps", tc.warmup_steps);
        tc.total_steps = t.value("total_steps", tc.total_steps);
        tc.seed = t.value("seed", tc.seed);
        tc.grad_clip_norm = t.value("grad_clip_norm", tc.grad_clip_norm);
        tc.eval_every = t.value("eval_every", tc.eval_every);
        tc.weight_decay = t.value("weight_decay", tc.weight_decay);
        tc.max_len = t.value("max_len", tc.max_len);
        if (t.contains("task_mix")) {
            for (auto it = t["task_mix"].begin(); it != t["task_mix"].end(); ++it)
                tc.task_mix[task_kind_from_name(it.key())] = it.value().get<double>();
        }
    }
}

int cmd_train(const TrainArgs& args) {
    if (args.stage != "pretrain" && args.stage != "finetune") {
        std::cerr << "train: --stage must be pretrain or finetune\n";
        return 2;
    }
    if (args.stage == "finetune" && args.task != "quality" && args.task != "comment" &&
        args.task != "refine") {
        std::cerr << "train: --task must be quality|comment|refine for finetune\n";
        return 2;
    }
    TrainConfig tc;
    ModelConfig mc;
    parse_train_config(args.config_path, tc, mc);
    Vocab vocab = Vocab::load(args.vocab_path);
    if (mc.vocab_size <= 0) mc.vocab_size = vocab.size();
    tc.max_len = std::min(tc.max_len, mc.max_len);

    OutputGuard guard;
    guard.track(args.out_dir);
    fs::create_directories(args.out_dir);
    RunManifest manifest = begin_manifest("train", tc.seed);
    manifest.config_path = args.config_path;
    manifest.inputs = {args.data, args.vocab_path};
    if (!args.init_ckpt.empty()) manifest.inputs.push_back(args.init_ckpt);

    Checkpoint init = args.init_ckpt.empty() ? init_model(mc, tc.seed)
                                             : Checkpoint::load(args.init_ckpt);
    if (init.vocab_fingerprint != 0 && init.vocab_fingerprint != vocab.fingerprint())
        std::cerr << "warning: checkpoint was trained with a different vocabulary\n";

    std::vector<TrainLogEntry> log;
    Checkpoint result;
    if (args.stage == "pretrain") {
        auto examples = read_jsonl(args.data, pretrain_example_from_json);
        result = pretrain(PretrainData::from_examples(examples), init, tc, vocab, &log,
                          args.out_dir);
    } else if (args.stage == "finetune") {
        auto data_file = [&](const char* split) {
            return args.data + "/" + args.task + "." + split + ".jsonl";
        };
        if (args.task == "quality") {
            auto train = read_jsonl(data_file("train"), quality_sample_from_json);
            auto valid = read_jsonl(data_file("valid"), quality_sample_from_json);
            result = finetune_classification(train, valid, init, tc, vocab, &log);
        } else if (args.task == "comment") {
            auto train = read_jsonl(data_file("train"), comment_sample_from_json);
            auto valid = read_jsonl(data_file("valid"), comment_sample_from_json);
            result = finetune_generation(train, valid, init, tc, vocab, &log);
        } else if (args.task == "refine") {
            auto train = read_jsonl(data_file("train"), refinement_sample_from_json);
            auto valid = read_jsonl(data_file("valid"), refinement_sample_from_json);
            result = finetune_refinement(train, valid, init, tc, vocab, &log);
        } else {
            std::cerr << "train: --task must be quality|comment|refine for finetune\n";
            return 2;
        }
        result.save(args.out_dir + "/best");
        manifest.outputs.push_back(args.out_dir + "/best");
    } else {
        std::cerr << "train: --stage must be pretrain or finetune\n";
        return 2;
    }

    std::string log_path = args.log_path.empty() ? args.out_dir + "/train_log.jsonl"
                                                 : args.log_path;
    append_train_log(log_path, log);
    manifest.outputs.push_back(log_path);
    if (args.stage == "pretrain") manifest.outputs.push_back(args.out_dir + "/last");
    manifest.extra["steps"] = std::to_string(log.size());
    if (!log.empty()) manifest.extra["final_loss"] = std::to_string(log.back().loss);
    finish_manifest(manifest, args.out_dir + "/manifest.json");
    guard.commit();
    return 0;
}

// ------------------------------------------------------------------ eval --

struct EvalArgs {
    std::string task;
    std::string data;
    std::string vocab_path;
    std::string ckpt;
    std::string report;
    int beam = 10;
    int max_new_tokens = 128;
    bool naive_copy_mode = false;
    std::string predictions;
    std::string annotation_sheet;
};

std::string decode_generated(const std::vector<int>& ids, const Vocab& vocab) {
    std::vector<int> content;
    for (int id : ids)
        if (!Vocab::is_special(id)) content.push_back(id);
    return decode(content, vocab);
}

int cmd_eval(const EvalArgs& args) {
    if (args.ckpt.empty() && !args.naive_copy_mode) {
        std::cerr << "eval: --ckpt is required unless --naive-copy is set\n";
        return 2;
    }
    if (args.naive_copy_mode && args.task != "refine") {
        std::cerr << "eval: --naive-copy only applies to --task refine\n";
        return 2;
    }
    Vocab vocab = Vocab::load(args.vocab_path);
    OutputGuard guard;
    guard.track(args.report);
    RunManifest manifest = begin_manifest("eval", 0);
    manifest.inputs = {args.data, args.vocab_path};

    EvalReport report;
    report.task = args.task;
    report.notes = "corpus-level BLEU";
    std::uint64_t fp = vocab.fingerprint();
    std::vector<std::string> pred_texts, ref_texts, input_texts;

    std::optional<Model> model;
    int max_len = 512;
    if (!args.naive_copy_mode) {
        Checkpoint ckpt = Checkpoint::load(args.ckpt);
        fp = mix64(fp, fnv1a64(nlohmann::json{{"beam", args.beam},
                                              {"d_model", ckpt.config.d_model},
                                              {"step", ckpt.step}}
                                   .dump()));
        max_len = ckpt.config.max_len;
        model.emplace(ckpt);
        manifest.inputs.push_back(args.ckpt);
    }
    report.config_fingerprint = fp;

    if (args.task == "quality") {
        auto samples = read_jsonl(args.data, quality_sample_from_json);
        std::vector<int> preds, labels;
        for (const auto& q : samples) {
            auto ids = make_quality_sample(q.hunk, q.label, vocab, max_len).input_ids;
            preds.push_back(model->classify(ids) > 0.5 ? 1 : 0);
            labels.push_back(q.label);
        }
        auto m = classification_metrics(preds, labels);
        report.metrics = {{"accuracy", m.accuracy},
                          {"precision", m.precision},
                          {"recall", m.recall},
                          {"f1", m.f1}};
        report.n_samples = static_cast<int>(samples.size());
    } else if (args.task == "comment") {
        auto samples = read_jsonl(args.data, comment_sample_from_json);
        std::vector<std::vector<std::string>> cands, refs;
        for (const auto& s : samples) {
            auto input = encode_hunk(s.hunk, vocab, max_len);
            auto out_ids = model->generate_beam(input, args.beam, args.max_new_tokens);
            std::string text = decode_generated(out_ids, vocab);
            pred_texts.push_back(text);
            ref_texts.push_back(s.target_comment);
            input_texts.push_back(to_unified_text(s.hunk));
            cands.push_back(tokenize_comment(text));
            refs.push_back(tokenize_comment(s.target_comment));
        }
        report.metrics = {{"bleu4", bleu4(cands, refs)}};
        report.n_samples = static_cast<int>(samples.size());
    } else if (args.task == "refine") {
        auto samples = read_jsonl(args.data, refinement_sample_from_json);
        std::vector<std::vector<int>> cands, refs;
        std::vector<std::string> ref_strings;
        for (const auto& s : samples) {
            std::string text;
            if (args.naive_copy_mode) {
                text = join_lines(s.old_code);
            } else {
                auto input = encode_code_and_comment(s.old_code, s.comment, vocab, max_len);
                auto out_ids = model->generate_beam(input, args.beam, args.max_new_tokens);
                text = decode_generated(out_ids, vocab);
            }
            pred_texts.push_back(text);
            std::string ref = join_lines(s.new_code);
            ref_texts.push_back(ref);
            input_texts.push_back(join_lines(s.old_code));
            cands.push_back(encode(text, vocab));
            refs.push_back(encode(ref, vocab));
        }
        report.metrics = {{"bleu4", bleu4(cands, refs)},
                          {"exact_match", exact_match(pred_texts, ref_texts)}};
        report.n_samples = static_cast<int>(samples.size());
    } else {
        std::cerr << "eval: unknown --task " << args.task << "\n";
        return 2;
    }

    report.save(args.report);
    manifest.outputs.push_back(args.report);
    if (!args.predictions.empty()) {
        std::ofstream out(args.predictions, std::ios::binary);
        for (std::size_t i = 0; i < pred_texts.size(); ++i)
            out << nlohmann::json{{"id", i}, {"text", pred_texts[i]}}.dump() << "\n";
        manifest.outputs.push_back(args.predictions);
    }
    if (!args.annotation_sheet.empty()) {
        write_annotation_sheet_csv(args.annotation_sheet, input_texts, ref_texts, pred_texts);
        manifest.outputs.push_back(args.annotation_sheet);
    }
    finish_manifest(manifest, args.report + ".manifest.json");
    guard.commit();
    for (const auto& [name, value] : report.metrics)
        std::cout << args.task << " " << name << " = " << value << "\n";
    return 0;
}

// --------------------------------------------------------------- predict --

struct PredictArgs {
    std::string task;
    std::string data;
    std::string vocab_path;
    std::string ckpt;
    std::string out;
    int beam = 10;
    int max_new_tokens = 128;
};

int cmd_predict(const PredictArgs& args) {
    Vocab vocab = Vocab::load(args.vocab_path);
    Checkpoint ckpt = Checkpoint::load(args.ckpt);
    Model model(ckpt);
    OutputGuard guard;
    guard.track(args.out);
    RunManifest manifest = begin_manifest("predict", 0);
    manifest.inputs = {args.data, args.vocab_path, args.ckpt};

    std::ofstream out(args.out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + args.out);
    std::size_t id = 0;
    if (args.task == "quality") {
        for (const auto& q : read_jsonl(args.data, quality_sample_from_json)) {
            auto ids = make_quality_sample(q.hunk, q.label, vocab, ckpt.config.max_len).input_ids;
            double p = model.classify(ids);
            out << nlohmann::json{{"id", id++}, {"p_needs_comment", p}}.dump() << "\n";
        }
    } else if (args.task == "comment") {
        for (const auto& s : read_jsonl(args.data, comment_sample_from_json)) {
            auto input = encode_hunk(s.hunk, vocab, ckpt.config.max_len);
            auto ids = model.generate_beam(input, args.beam, args.max_new_tokens);
            out << nlohmann::json{{"id", id++}, {"text", decode_generated(ids, vocab)}}.dump()
                << "\n";
        }
    } else if (args.task == "refine") {
        for (const auto& s : read_jsonl(args.data, refinement_sample_from_json)) {
            auto input = encode_code_and_comment(s.old_code, s.comment, vocab,
                                                 ckpt.config.max_len);
            auto ids = model.generate_beam(input, args.beam, args.max_new_tokens);
            out << nlohmann::json{{"id", id++}, {"text", decode_generated(ids, vocab)}}.dump()
                << "\n";
        }
    } else {
        std::cerr << "predict: unknown --task " << args.task << "\n";
        return 2;
    }
    manifest.outputs.push_back(args.out);
    finish_manifest(manifest, args.out + ".manifest.json");
    guard.commit();
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"code review learning toolkit"};
    app.require_subcommand(1);

    IngestArgs ingest_args;
    auto* ingest_cmd = app.add_subcommand("ingest", "fetch or load pull-request data");
    ingest_cmd->add_option("--repo", ingest_args.repo, "owner/name to fetch");
    ingest_cmd->add_option("--fixtures", ingest_args.fixtures, "directory of *.jsonl fixtures");
    ingest_cmd->add_option("--out", ingest_args.out, "output JSONL path")->required();
    ingest_cmd->add_option("--max-prs", ingest_args.max_prs, "fetch at most this many PRs");
    ingest_cmd->add_option("--token-env", ingest_args.token_env,
                           "environment variable holding the API token");
    ingest_cmd->add_option("--base-url", ingest_args.base_url, "API base url");

    BuildArgs build_args;
    auto* build_cmd = app.add_subcommand("build", "build datasets from ingested PRs");
    build_cmd->add_option("--task", build_args.task, "quality|comment|refine|pretrain")
        ->required();
    build_cmd->add_option("--prs", build_args.prs_path, "raw pull-request JSONL")->required();
    build_cmd->add_option("--out", build_args.out_dir, "output directory")->required();
    build_cmd->add_option("--seed", build_args.seed, "sampling seed");
    build_cmd->add_option("--split-config", build_args.split_config,
                          "JSON with train_projects/eval_projects/valid_fraction")
        ->required();
    build_cmd->add_option("--vocab-size", build_args.vocab_size,
                          "tokenizer size for --task pretrain");
    build_cmd->add_option("--revision-match", build_args.revision_match,
                          "overlap|exact comment-to-revision matching");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "pre-train or fine-tune a model");
    train_cmd->add_option("--stage", train_args.stage, "pretrain|finetune")->required();
    train_cmd->add_option("--task", train_args.task, "quality|comment|refine (finetune)");
    train_cmd->add_option("--data", train_args.data,
                          "pretrain: JSONL file; finetune: dataset directory")
        ->required();
    train_cmd->add_option("--vocab", train_args.vocab_path, "vocab.json")->required();
    train_cmd->add_option("--config", train_args.config_path, "train config JSON")->required();
    train_cmd->add_option("--init-ckpt", train_args.init_ckpt, "checkpoint to start from");
    train_cmd->add_option("--out", train_args.out_dir, "checkpoint output directory")
        ->required();
    train_cmd->add_option("--log", train_args.log_path, "training log JSONL path");

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint or baseline");
    eval_cmd->add_option("--task", eval_args.task, "quality|comment|refine")->required();
    eval_cmd->add_option("--data", eval_args.data, "dataset JSONL")->required();
    eval_cmd->add_option("--vocab", eval_args.vocab_path, "vocab.json")->required();
    eval_cmd->add_option("--ckpt", eval_args.ckpt, "checkpoint directory");
    eval_cmd->add_option("--report", eval_args.report, "metrics JSON output")->required();
    eval_cmd->add_option("--beam", eval_args.beam, "beam size (default 10)");
    eval_cmd->add_option("--max-new", eval_args.max_new_tokens, "generation cap");
    eval_cmd->add_flag("--naive-copy", eval_args.naive_copy_mode,
                       "score the copy baseline instead of a model");
    eval_cmd->add_option("--predictions", eval_args.predictions, "write predictions JSONL");
    eval_cmd->add_option("--annotation-sheet", eval_args.annotation_sheet,
                         "write a blank human-annotation CSV");

    PredictArgs predict_args;
    auto* predict_cmd = app.add_subcommand("predict", "run a checkpoint over inputs");
    predict_cmd->add_option("--task", predict_args.task, "quality|comment|refine")->required();
    predict_cmd->add_option("--data", predict_args.data, "dataset JSONL")->required();
    predict_cmd->add_option("--vocab", predict_args.vocab_path, "vocab.json")->required();
    predict_cmd->add_option("--ckpt", predict_args.ckpt, "checkpoint directory")->required();
    predict_cmd->add_option("--out", predict_args.out, "predictions JSONL")->required();
    predict_cmd->add_option("--beam", predict_args.beam, "beam size");
    predict_cmd->add_option("--max-new", predict_args.max_new_tokens, "generation cap");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*ingest_cmd) return cmd_ingest(ingest_args);
        if (*build_cmd) return cmd_build(build_args);
        if (*train_cmd) return cmd_train(train_args);
        if (*eval_cmd) return cmd_eval(eval_args);
        if (*predict_cmd) return cmd_predict(predict_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace revkit
