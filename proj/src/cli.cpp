#include "sentlab/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "sentlab/checkpoint.hpp"
#include "sentlab/config.hpp"
#include "sentlab/corpus.hpp"
#include "sentlab/errors.hpp"
#include "sentlab/eval.hpp"
#include "sentlab/extract.hpp"
#include "sentlab/gradcheck.hpp"
#include "sentlab/report.hpp"
#include "sentlab/synth.hpp"
#include "sentlab/train.hpp"

namespace sentlab::cli {

namespace fs = std::filesystem;

namespace {

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string(what) + " path not set");
  if (!fs::exists(path))
    throw DataError(std::string(what) + " not found: " + path);
}

std::string dataset_name(const std::string& path) {
  return fs::path(path).stem().string();
}

std::string vocab_sidecar(const std::string& checkpoint_path,
                          const std::string& explicit_path) {
  return explicit_path.empty() ? checkpoint_path + ".vocab" : explicit_path;
}

struct LoadedModel {
  model::Parameters<float> params;
  model::ModelConfig config;
  corpus::Vocab vocab;
  std::string fingerprint;
};

LoadedModel load_model(const std::string& checkpoint_path,
                       const std::string& vocab_path) {
  require_file(checkpoint_path, "checkpoint");
  const std::string vpath = vocab_sidecar(checkpoint_path, vocab_path);
  require_file(vpath, "vocabulary");
  auto [params, config] = model::load_checkpoint(checkpoint_path);
  std::ifstream vin(vpath);
  LoadedModel m{std::move(params), config, corpus::Vocab::load(vin), ""};
  if (m.vocab.size() != m.config.vocab_size)
    throw DataError("vocabulary size " + std::to_string(m.vocab.size()) +
                    " does not match checkpoint vocab_size " +
                    std::to_string(m.config.vocab_size));
  m.fingerprint = model::model_fingerprint(m.params, m.config);
  return m;
}

int cmd_train(const std::string& config_path, bool seed_set, uint64_t seed) {
  require_file(config_path, "config");
  RunConfig cfg = load_run_config(config_path);
  if (seed_set) cfg.model.seed = seed;
  cfg.model.validate();
  require_file(cfg.corpus_path, "corpus");
  if (cfg.checkpoint_path.empty())
    throw UsageError("config: checkpoint path not set");

  corpus::Vocab vocab =
      corpus::build_vocab_file(cfg.corpus_path, cfg.model.vocab_size);
  cfg.model.vocab_size = vocab.size();  // shrink-to-fit small corpora
  auto sentences =
      corpus::encode_corpus_file(cfg.corpus_path, vocab, cfg.model.max_len);
  auto pairs = corpus::build_pairs(sentences);
  auto result = model::train<float>(cfg.model, pairs);

  if (!cfg.out_dir.empty()) fs::create_directories(cfg.out_dir);
  model::save_checkpoint(result.params, cfg.model, cfg.checkpoint_path);
  {
    const std::string vpath =
        vocab_sidecar(cfg.checkpoint_path, cfg.vocab_path);
    std::ofstream vout(vpath, std::ios::trunc);
    if (!vout) throw DataError("cannot write vocabulary " + vpath);
    vocab.save(vout);
  }

  std::printf("epoch,mean_nll_per_word\n");
  for (const auto& st : result.history)
    std::printf("%u,%.6f\n", st.epoch, st.mean_nll_per_word);
  return 0;
}

int cmd_embed(const std::string& checkpoint, const std::string& input,
              const std::string& spec_str, const std::string& out,
              const std::string& vocab_path) {
  LoadedModel m = load_model(checkpoint, vocab_path);
  require_file(input, "input");
  const auto spec = extract::ReprSpec::parse(spec_str);
  spec.validate(m.config);

  std::ofstream os(out, std::ios::trunc);
  if (!os) throw DataError("cannot write " + out);
  os << "# dim=" << spec.dim(m.config) << " spec=" << spec.to_string()
     << " model=" << m.fingerprint << "\n";
  const auto lines = corpus::read_lines(input);
  char buf[32];
  for (size_t i = 0; i < lines.size(); ++i) {
    const auto sent = corpus::encode_sentence(
        m.vocab, corpus::tokenize(lines[i]), m.config.max_len);
    const auto e = extract::embed(m.params, m.config, sent, spec);
    os << i << '\t';
    for (size_t j = 0; j < e.values.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.9g", double(e.values[j]));
      if (j) os << ' ';
      os << buf;
    }
    os << '\n';
  }
  if (!os) throw DataError("write failed for " + out);
  return 0;
}

int cmd_eval_sts(const std::string& checkpoint,
                 const std::vector<std::string>& sts_paths,
                 const std::string& spec_str, const std::string& sim_str,
                 const std::string& out, const std::string& vocab_path) {
  LoadedModel m = load_model(checkpoint, vocab_path);
  const auto spec = extract::ReprSpec::parse(spec_str);
  const auto kind = extract::similarity_from_string(sim_str);
  std::vector<eval::EvalReport> reports;
  for (const auto& path : sts_paths) {
    require_file(path, "sts file");
    const auto records = eval::read_sts_file(path);
    auto r = eval::sts_eval(m.params, m.config, m.vocab, spec, kind,
                            records, dataset_name(path));
    r.fingerprint = m.fingerprint;
    reports.push_back(std::move(r));
  }
  eval::emit_report(reports, eval::ReportFormat::csv, out);
  std::fputs(eval::render_report_csv(reports).c_str(), stdout);
  return 0;
}

int cmd_eval_transfer(const std::string& checkpoint, const std::string& data,
                      const std::string& spec_str, uint32_t folds,
                      const std::string& vocab_path) {
  LoadedModel m = load_model(checkpoint, vocab_path);
  require_file(data, "transfer file");
  const auto spec = extract::ReprSpec::parse(spec_str);
  const auto records = eval::read_transfer_file(data);
  auto r = eval::transfer_eval_cv(m.params, m.config, m.vocab, spec, records,
                                  folds, dataset_name(data));
  r.fingerprint = m.fingerprint;
  std::fputs(eval::render_report_csv({&r, 1}).c_str(), stdout);
  return 0;
}

int cmd_sweep(const std::string& checkpoint, const std::string& sts_path,
              uint32_t n_max, const std::string& out_dir,
              const std::string& sim_str, const std::string& vocab_path) {
  LoadedModel m = load_model(checkpoint, vocab_path);
  require_file(sts_path, "sts file");
  const auto kind = extract::similarity_from_string(sim_str);
  const auto records = eval::read_sts_file(sts_path);
  auto rows = eval::unroll_sweep(m.params, m.config, m.vocab, kind, records,
                                 n_max, dataset_name(sts_path));
  for (auto& r : rows) r.fingerprint = m.fingerprint;
  fs::create_directories(out_dir);
  eval::emit_report(rows, eval::ReportFormat::csv,
                    (fs::path(out_dir) / "sweep.csv").string());
  eval::emit_report(rows, eval::ReportFormat::svg,
                    (fs::path(out_dir) / "sweep.svg").string());
  std::fputs(eval::render_report_csv(rows).c_str(), stdout);
  return 0;
}

// Random ids in [GO+1, V); every sentence ends with EOS inside max_len.
corpus::SentenceIds random_sentence(SeededRng& rng,
                                    const model::ModelConfig& cfg) {
  corpus::SentenceIds s;
  const uint32_t words = 1 + uint32_t(rng.next_bounded(cfg.max_len - 1));
  for (uint32_t i = 0; i < words; ++i)
    s.ids.push_back(corpus::kGoId + 1 +
                    corpus::TokenId(rng.next_bounded(
                        cfg.vocab_size - corpus::kGoId - 1)));
  s.ids.push_back(corpus::kEosId);
  s.true_len = uint32_t(s.ids.size());
  s.ids.resize(cfg.max_len, corpus::kPadId);
  return s;
}

int cmd_gradcheck(uint64_t seed) {
  using model::Arch;
  bool all_ok = true;
  std::printf("model,max_rel_err\n");
  for (Arch enc : {Arch::bow, Arch::rnn}) {
    for (Arch dec : {Arch::bow, Arch::rnn}) {
      model::ModelConfig cfg;
      cfg.encoder = enc;
      cfg.decoder = dec;
      cfg.embed_dim = 8;
      cfg.hidden_dim = 12;
      cfg.vocab_size = 20;
      cfg.max_len = 6;
      cfg.seed = seed;

      SeededRng rng(seed);
      auto params = model::init_parameters<double>(cfg, rng);
      std::vector<corpus::ContextPair> batch(2);
      for (auto& pair : batch) {
        pair.centre = random_sentence(rng, cfg);
        pair.prev = random_sentence(rng, cfg);
        pair.next = random_sentence(rng, cfg);
      }

      auto loss_fn = [&](const std::vector<double>& theta) {
        model::unflatten(std::span<const double>(theta), params);
        return model::loss_batch(params, cfg,
                                 std::span<const corpus::ContextPair>(batch))
            .nll_per_word;
      };
      auto grad_fn = [&](const std::vector<double>& theta) {
        model::unflatten(std::span<const double>(theta), params);
        auto loss = model::loss_batch(
            params, cfg, std::span<const corpus::ContextPair>(batch));
        return model::flatten(loss.grads);
      };
      const double err =
          grad_check(loss_fn, grad_fn, model::flatten(params), 1e-5);
      std::printf("%s-%s,%.3e\n", model::arch_name(enc), model::arch_name(dec),
                  err);
      if (!(err <= 1e-4)) all_ok = false;
    }
  }
  if (!all_ok) {
    std::fprintf(stderr, "gradcheck: a model exceeded max relative error 1e-4\n");
    return 2;
  }
  return 0;
}

int cmd_synth(const synth::SynthSpec& spec, const std::string& out_dir) {
  auto files = synth::generate_synthetic(spec, out_dir);
  std::printf("%s\n%s\n%s\n", files.corpus_path.c_str(), files.sts_path.c_str(),
              files.transfer_path.c_str());
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"sentence representation laboratory"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "train a model from a config file");
  std::string train_config;
  uint64_t train_seed = 0;
  train->add_option("--config", train_config, "run config path")->required();
  auto* seed_opt = train->add_option("--seed", train_seed, "override config seed");

  // embed
  auto* embed = app.add_subcommand("embed", "write embeddings for a sentence file");
  std::string e_ckpt, e_input, e_spec, e_out, e_vocab;
  embed->add_option("--checkpoint", e_ckpt)->required();
  embed->add_option("--input", e_input)->required();
  embed->add_option("--spec", e_spec, "encoder|concat:N|mean:N")->required();
  embed->add_option("--out", e_out)->required();
  embed->add_option("--vocab", e_vocab, "default: <checkpoint>.vocab");

  // eval-sts
  auto* es = app.add_subcommand("eval-sts", "similarity evaluation against gold scores");
  std::string s_ckpt, s_spec, s_sim = "dot", s_out, s_vocab;
  std::vector<std::string> s_sts;
  es->add_option("--checkpoint", s_ckpt)->required();
  es->add_option("--sts", s_sts, "one or more TSV files")->required();
  es->add_option("--spec", s_spec)->required();
  es->add_option("--sim", s_sim, "dot|cosine");
  es->add_option("--out", s_out, "report CSV path")->required();
  es->add_option("--vocab", s_vocab);

  // eval-transfer
  auto* et = app.add_subcommand("eval-transfer", "cross-validated classification on frozen embeddings");
  std::string t_ckpt, t_data, t_spec, t_vocab;
  uint32_t t_folds = 10;
  et->add_option("--checkpoint", t_ckpt)->required();
  et->add_option("--data", t_data)->required();
  et->add_option("--spec", t_spec)->required();
  et->add_option("--folds", t_folds);
  et->add_option("--vocab", t_vocab);

  // sweep
  auto* sw = app.add_subcommand("sweep", "correlation vs unroll depth, CSV + SVG");
  std::string w_ckpt, w_sts, w_out_dir, w_sim = "dot", w_vocab;
  uint32_t w_nmax = 10;
  sw->add_option("--checkpoint", w_ckpt)->required();
  sw->add_option("--sts", w_sts)->required();
  sw->add_option("--nmax", w_nmax);
  sw->add_option("--out-dir", w_out_dir)->required();
  sw->add_option("--sim", w_sim);
  sw->add_option("--vocab", w_vocab);

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "finite-difference check of all model gradients");
  uint64_t gc_seed = 7;
  gc->add_option("--seed", gc_seed);

  // synth
  auto* sy = app.add_subcommand("synth", "generate a synthetic corpus and eval files");
  synth::SynthSpec sspec;
  std::string sy_out_dir;
  sy->add_option("--topics", sspec.topics);
  sy->add_option("--sentences", sspec.sentences);
  sy->add_option("--persist", sspec.persistence);
  sy->add_option("--seed", sspec.seed);
  sy->add_option("--out-dir", sy_out_dir)->required();
  sy->add_option("--sts-pairs", sspec.sts_pairs);
  sy->add_option("--transfer-records", sspec.transfer_records);
  sy->add_option("--words-per-topic", sspec.words_per_topic);
  sy->add_option("--len-lo", sspec.len_lo);
  sy->add_option("--len-hi", sspec.len_hi);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // drop program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message
    return 1;
  }

  try {
    if (train->parsed())
      return cmd_train(train_config, seed_opt->count() > 0, train_seed);
    if (embed->parsed()) return cmd_embed(e_ckpt, e_input, e_spec, e_out, e_vocab);
    if (es->parsed())
      return cmd_eval_sts(s_ckpt, s_sts, s_spec, s_sim, s_out, s_vocab);
    if (et->parsed())
      return cmd_eval_transfer(t_ckpt, t_data, t_spec, t_folds, t_vocab);
    if (sw->parsed())
      return cmd_sweep(w_ckpt, w_sts, w_nmax, w_out_dir, w_sim, w_vocab);
    if (gc->parsed()) return cmd_gradcheck(gc_seed);
    if (sy->parsed()) return cmd_synth(sspec, sy_out_dir);
    std::fprintf(stderr, "no subcommand given\n");
    return 1;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

}  // namespace sentlab::cli
