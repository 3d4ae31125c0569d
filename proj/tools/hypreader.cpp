// hypreader command-line interface: extract candidates, train/evaluate the
// three models, run the end-to-end pipeline, explain detector decisions, and
// generate synthetic corpora.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hypreader/config.hpp"
#include "hypreader/detector.hpp"
#include "hypreader/evalkit.hpp"
#include "hypreader/explainer.hpp"
#include "hypreader/ingest.hpp"
#include "hypreader/jsonl.hpp"
#include "hypreader/linker.hpp"
#include "hypreader/pipeline.hpp"
#include "hypreader/synth.hpp"
#include "hypreader/tagger.hpp"

#include "CLI11.hpp"

namespace {

using namespace hypreader;

std::optional<std::string> extractor_from(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("HYPREADER_EXTRACTOR"); env && *env)
    return std::string(env);
  return std::nullopt;
}

StopwordSet stopwords_from(const std::string& path) {
  return path.empty() ? default_stopwords() : load_stopwords(path);
}

DetectorConfig detector_config(const Config& cfg, std::uint64_t seed) {
  DetectorConfig dc;
  dc.ngram = cfg.get_int("ngram", dc.ngram);
  dc.lr = cfg.get_double("lr", dc.lr);
  dc.dim = cfg.get_int("dim", dc.dim);
  const auto loss = cfg.get_string("loss", "negative_sampling");
  if (loss == "softmax")
    dc.loss = DetectorLoss::softmax;
  else if (loss == "negative_sampling")
    dc.loss = DetectorLoss::negative_sampling;
  else
    throw Error("BadConfig", "loss must be softmax or negative_sampling");
  dc.epochs = cfg.get_int("epochs", dc.epochs);
  dc.neg_samples = cfg.get_int("neg_samples", dc.neg_samples);
  dc.bucket_count = cfg.get_int("bucket_count", static_cast<int>(dc.bucket_count));
  dc.seed = cfg.get_u64("seed", seed);
  return dc;
}

TaggerConfig tagger_config(const Config& cfg, std::uint64_t seed) {
  TaggerConfig tc;
  tc.pad_len = cfg.get_int("pad_len", tc.pad_len);
  tc.lstm1_units = cfg.get_int("lstm1_units", tc.lstm1_units);
  tc.lstm2_units = cfg.get_int("lstm2_units", tc.lstm2_units);
  tc.spatial_dropout = cfg.get_double("spatial_dropout", tc.spatial_dropout);
  tc.recurrent_dropout = cfg.get_double("recurrent_dropout", tc.recurrent_dropout);
  tc.lr = cfg.get_double("lr", tc.lr);
  tc.rho = cfg.get_double("rho", tc.rho);
  tc.epsilon = cfg.get_double("epsilon", tc.epsilon);
  tc.batch_size = cfg.get_int("batch_size", tc.batch_size);
  tc.epochs = cfg.get_int("epochs", tc.epochs);
  tc.validation_split = cfg.get_double("validation_split", tc.validation_split);
  tc.seed = cfg.get_u64("seed", seed);
  return tc;
}

void print_metrics_line(const std::string& name, const Metrics& m) {
  std::printf("%-24s acc %.4f  precision %.4f  recall %.4f  f1 %.4f\n",
              name.c_str(), m.accuracy, m.precision, m.recall, m.f1);
}

std::vector<double> parse_grid(const std::string& spec) {
  if (spec.empty()) return default_reg_grid();
  std::vector<double> grid;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    auto comma = spec.find(',', pos);
    if (comma == std::string::npos) comma = spec.size();
    const auto field = trim(spec.substr(pos, comma - pos));
    if (!field.empty()) grid.push_back(std::stod(field));
    pos = comma + 1;
  }
  if (grid.empty()) throw Error("EmptyGrid", "no grid points in: " + spec);
  return grid;
}

int cmd_extract(const std::string& input_dir, const std::string& output,
                const std::string& extractor_flag, std::size_t max_words,
                bool stats) {
  const auto extractor = extractor_from(extractor_flag);
  RunConfig list_cfg;
  list_cfg.input_dir = input_dir;
  list_cfg.extractor = extractor;
  const auto paths = list_input_files(list_cfg);
  std::vector<CandidateSentence> all;
  std::size_t failed = 0;
  for (const auto& path : paths) {
    try {
      const auto doc = load_document(path, extractor);
      const auto cands =
          censor_by_length(extract_candidates(segment_sentences(doc)), max_words);
      all.insert(all.end(), cands.begin(), cands.end());
    } catch (const std::exception& e) {
      std::cerr << "warning: skipping " << path << ": " << e.what() << "\n";
      ++failed;
    }
  }
  write_file(output, candidates_to_jsonl(all));
  std::cerr << "extracted " << all.size() << " candidates from "
            << (paths.size() - failed) << "/" << paths.size() << " documents\n";
  if (stats && !all.empty()) {
    const auto cs = corpus_stats(all);
    std::printf("sentences %zu  mean_words %.2f  sd_words %.2f\n",
                cs.sentence_count, cs.mean_words, cs.sd_words);
    for (const auto& [words, freq] : cs.histogram)
      std::printf("%zu,%zu\n", words, freq);
  }
  return failed ? 1 : 0;
}

int cmd_train_detector(const std::string& data, const std::string& config_path,
                       const std::string& out, std::uint64_t seed,
                       const std::string& stopwords_path) {
  const auto cfg = config_path.empty() ? Config{} : Config::load(config_path);
  const auto dc = detector_config(cfg, seed);
  const auto corpus = read_labeled_sentences(data, stopwords_from(stopwords_path));
  const auto model = train_detector(corpus, dc);
  save_detector(model, out);
  std::vector<int> preds, golds;
  for (const auto& s : corpus) {
    preds.push_back(predict(model, s.tokens).label);
    golds.push_back(s.label);
  }
  print_metrics_line("detector (train set)", binary_metrics(preds, golds, 1));
  std::printf("final epoch mean loss %.6f\n", model.epoch_mean_loss.back());
  return 0;
}

int cmd_train_tagger(const std::string& data, const std::string& glove,
                     const std::string& config_path, const std::string& out,
                     std::uint64_t seed, const std::string& epoch_log) {
  const auto cfg = config_path.empty() ? Config{} : Config::load(config_path);
  const auto tc = tagger_config(cfg, seed);
  const auto corpus = read_tag_sequences(data);
  const auto vectors = load_glove(glove);
  const auto model = train_tagger(corpus, vectors, tc);
  save_tagger(model, out);
  if (!epoch_log.empty()) write_file(epoch_log, epoch_log_csv(model));
  const auto& last = model.epoch_log.back();
  std::printf("epoch %d  train_acc %.4f", last.epoch, last.train_acc);
  if (last.val_acc) std::printf("  val_acc %.4f", *last.val_acc);
  std::printf("\n");
  return 0;
}

int cmd_train_linker(const std::string& data, const std::string& config_path,
                     const std::string& out, std::uint64_t seed, bool do_tune,
                     int folds, int repeats, const std::string& grid_spec,
                     const std::string& stopwords_path) {
  const auto cfg = config_path.empty() ? Config{} : Config::load(config_path);
  LinkTrainOptions opts;
  opts.max_n = cfg.get_int("max_n", opts.max_n);
  opts.min_count = static_cast<std::size_t>(cfg.get_int("min_count", 1));
  opts.causality_reg = cfg.get_double("causality_reg", opts.causality_reg);
  opts.direction_reg = cfg.get_double("direction_reg", opts.direction_reg);
  const auto examples = read_link_examples(data, stopwords_from(stopwords_path));
  if (do_tune) {
    std::vector<std::vector<std::string>> corpus;
    for (const auto& e : examples) corpus.push_back(e.tokens);
    const auto vocab = build_vocabulary(corpus, opts.max_n, opts.min_count,
                                        VocabNormalization::stem);
    std::vector<SparseVector> xs;
    std::vector<std::size_t> y_causal, y_dir;
    for (const auto& e : examples) {
      xs.push_back(featurize(vocab, e.tokens));
      y_causal.push_back(static_cast<std::size_t>(e.causal));
      y_dir.push_back(static_cast<std::size_t>(e.direction));
    }
    const auto grid = parse_grid(grid_spec);
    const auto tc = tune(xs, y_causal, causality_classes(), vocab.size(), grid,
                         folds, repeats, seed);
    const auto td = tune(xs, y_dir, direction_classes(), vocab.size(), grid,
                         folds, repeats, seed);
    opts.causality_reg = tc.best.reg_strength;
    opts.direction_reg = td.best.reg_strength;
    std::printf("tuned causality reg %g (cv f1 %.4f), direction reg %g (cv macro f1 %.4f)\n",
                tc.best.reg_strength, tc.best.metrics.f1, td.best.reg_strength,
                td.best.metrics.f1);
  }
  const auto model = train_link_model(examples, opts);
  save_link_model(model, out);
  std::vector<std::size_t> cp, cg, dp, dg;
  for (const auto& e : examples) {
    const auto x = featurize(model.vocab, e.tokens);
    cp.push_back(model.causality.predict_class(x));
    cg.push_back(static_cast<std::size_t>(e.causal));
    dp.push_back(model.direction.predict_class(x));
    dg.push_back(static_cast<std::size_t>(e.direction));
  }
  print_metrics_line("causality (train set)", binary_metrics(cp, cg, std::size_t{1}));
  std::vector<Metrics> per_class;
  for (std::size_t c = 0; c < 3; ++c)
    per_class.push_back(binary_metrics(dp, dg, c));
  print_metrics_line("direction (train set)", macro_average(per_class));
  return 0;
}

int cmd_run(RunConfig cfg, const std::string& extractor_flag) {
  cfg.extractor = extractor_from(extractor_flag);
  const auto models =
      load_pipeline_models(cfg.detector_path, cfg.tagger_path, cfg.linker_path);
  const auto result = run_pipeline(models, cfg);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  std::cerr << result.records << " records from " << result.documents
            << " documents (" << result.failed_documents << " failed, "
            << result.incomplete_records << " incomplete)\n";
  return result.failed_documents ? 1 : 0;
}

int cmd_eval_detector(const std::string& data, const std::string& protocol,
                      int folds, std::uint64_t seed,
                      const std::string& config_path,
                      const std::string& report_csv,
                      const std::string& stopwords_path) {
  const auto cfg = config_path.empty() ? Config{} : Config::load(config_path);
  auto dc = detector_config(cfg, seed);
  dc.seed = seed;
  const auto corpus = read_labeled_sentences(data, stopwords_from(stopwords_path));
  std::vector<ReportRow> rows;
  if (protocol == "kfold") {
    const auto cv = cross_validate_detector(corpus, dc, folds);
    rows.push_back({"fastText-style detector (fold mean)", "stop-words removed",
                    cv.mean});
    rows.push_back({"fastText-style detector (pooled)", "stop-words removed",
                    cv.pooled});
  } else if (protocol == "holdout") {
    rows.push_back({"fastText-style detector (75/25 holdout)",
                    "stop-words removed",
                    holdout_evaluate_detector(corpus, dc)});
  } else {
    throw Error("BadProtocol", "protocol must be kfold or holdout");
  }
  std::fputs(metrics_report_table(rows).c_str(), stdout);
  if (!report_csv.empty()) write_file(report_csv, metrics_report_csv(rows));
  return 0;
}

int cmd_eval_tagger(const std::string& data, const std::string& glove,
                    const std::string& config_path, double train_fraction,
                    std::uint64_t seed, const std::string& report_csv) {
  const auto cfg = config_path.empty() ? Config{} : Config::load(config_path);
  auto tc = tagger_config(cfg, seed);
  const auto corpus = read_tag_sequences(data);
  const auto vectors = load_glove(glove);
  const auto split = holdout_split(corpus.size(), train_fraction, seed);
  std::vector<TagSequence> train, test;
  for (const auto i : split.train_ids) train.push_back(corpus[i]);
  for (const auto i : split.test_ids) test.push_back(corpus[i]);
  const auto model = train_tagger(train, vectors, tc);
  std::vector<TagSequence> preds;
  for (const auto& ts : test) {
    auto p = tag(model, ts.tokens);
    if (p.tags.size() > ts.tags.size()) p.tags.resize(ts.tags.size());
    preds.push_back(std::move(p));
  }
  std::vector<TagSequence> golds = test;
  for (auto& g : golds)
    if (g.tokens.size() > static_cast<std::size_t>(tc.pad_len)) {
      g.tokens.resize(static_cast<std::size_t>(tc.pad_len));
      g.tags.resize(static_cast<std::size_t>(tc.pad_len));
    }
  for (auto& p : preds)
    if (p.tokens.size() > static_cast<std::size_t>(tc.pad_len)) {
      p.tokens.resize(static_cast<std::size_t>(tc.pad_len));
      p.tags.resize(static_cast<std::size_t>(tc.pad_len));
    }
  const auto report = per_class_metrics(preds, golds);
  std::vector<ReportRow> rows;
  rows.push_back({"Overall (All Nodes)", "none", report.overall_nodes});
  rows.push_back({"Non-Label (0)", "none", report.per_class[0]});
  rows.push_back({"Cause (1)", "none", report.per_class[1]});
  rows.push_back({"Outcome (2)", "none", report.per_class[2]});
  std::fputs(metrics_report_table(rows).c_str(), stdout);
  std::printf("token accuracy %.4f over %zu tokens (macro-all-classes f1 %.4f)\n",
              report.token_accuracy, report.token_count,
              report.overall_macro_all.f1);
  if (!report_csv.empty()) write_file(report_csv, metrics_report_csv(rows));
  return 0;
}

int cmd_eval_linker(const std::string& data, const std::string& task,
                    const std::string& grid_spec, int folds, int repeats,
                    std::uint64_t seed, const std::string& report_csv,
                    const std::string& stopwords_path) {
  const auto examples = read_link_examples(data, stopwords_from(stopwords_path));
  std::vector<std::vector<std::string>> corpus;
  for (const auto& e : examples) corpus.push_back(e.tokens);
  const auto vocab = build_vocabulary(corpus, 3, 1, VocabNormalization::stem);
  std::vector<SparseVector> xs;
  std::vector<std::size_t> ys;
  const bool causality = task == "causality";
  if (!causality && task != "direction")
    throw Error("BadTask", "task must be causality or direction");
  for (const auto& e : examples) {
    xs.push_back(featurize(vocab, e.tokens));
    ys.push_back(causality ? static_cast<std::size_t>(e.causal)
                           : static_cast<std::size_t>(e.direction));
  }
  const auto grid = parse_grid(grid_spec);
  const auto& classes = causality ? causality_classes() : direction_classes();
  const auto result = tune(xs, ys, classes, vocab.size(), grid, folds, repeats, seed);
  std::vector<ReportRow> rows;
  for (const auto& point : result.grid) {
    char name[64];
    std::snprintf(name, sizeof(name), "Logistic Regression (reg=%g)",
                  point.reg_strength);
    rows.push_back({name, "Stemming", point.metrics});
  }
  std::fputs(metrics_report_table(rows).c_str(), stdout);
  std::printf("best reg %g  f1 %.4f", result.best.reg_strength,
              result.best.metrics.f1);
  if (!causality)
    std::printf("  (weighted f1 %.4f)", result.best.weighted.f1);
  std::printf("\n");
  if (!report_csv.empty()) write_file(report_csv, metrics_report_csv(rows));
  return 0;
}

int cmd_explain(const std::string& model_path, const std::string& text,
                int n_random, std::uint64_t seed, double ridge,
                const std::string& stopwords_path) {
  const auto model = load_detector(model_path);
  const auto& stopwords = stopwords_from(stopwords_path);
  // Explanations cover the visible tokens; the detector internally applies
  // the stop-word policy it was trained with.
  const auto tokens =
      normalize_tokens(tokenize(text), NormalizeOpts{true, false, true});
  if (tokens.empty()) throw Error("EmptySentence", "no tokens in --text");
  ProbFn fn = [&](const std::vector<std::string>& ts) {
    return model.probabilities(
        normalize_tokens(ts, NormalizeOpts{true, true, true}, stopwords))[1];
  };
  ExplainOptions opts;
  opts.n_random = n_random;
  opts.seed = seed;
  opts.ridge = ridge;
  const auto ex = explain(fn, tokens, opts);
  std::printf("%s\n", explanation_to_json(ex, text).dump(2).c_str());
  return 0;
}

int cmd_synth(const std::string& kind, const std::string& out,
              std::uint64_t seed, std::size_t n_pos, std::size_t n_neg,
              std::size_t count, std::size_t dim,
              const std::vector<std::string>& token_sources) {
  if (kind == "detector") {
    std::string body;
    for (const auto& s : synth_detector_corpus(n_pos, n_neg, seed)) {
      body += nlohmann::json{{"text", s.text}, {"label", s.label}}.dump();
      body += '\n';
    }
    write_file(out, body);
  } else if (kind == "tagger") {
    std::string body;
    for (const auto& ts : synth_tagger_corpus(count, seed)) {
      body += nlohmann::json{{"tokens", ts.tokens}, {"tags", ts.tags}}.dump();
      body += '\n';
    }
    write_file(out, body);
  } else if (kind == "linker") {
    std::string body;
    for (const auto& s : synth_link_corpus(count, seed)) {
      body += nlohmann::json{{"text", s.text},
                             {"causal", s.causal},
                             {"direction", to_string(s.direction)}}.dump();
      body += '\n';
    }
    write_file(out, body);
  } else if (kind == "glove") {
    std::set<std::string> tokens;
    auto add_text = [&](const std::string& text) {
      for (const auto& t :
           normalize_tokens(tokenize(text), NormalizeOpts{true, false, true}))
        tokens.insert(t);
    };
    for (const auto& src : token_sources) {
      jsonl_detail::for_each_object(src, [&](const nlohmann::json& obj) {
        if (obj.contains("text")) add_text(obj.at("text").get<std::string>());
        if (obj.contains("tokens"))
          for (const auto& t : obj.at("tokens"))
            tokens.insert(to_lower_ascii(t.get<std::string>()));
      });
    }
    if (tokens.empty()) throw Error("EmptyCorpus", "no tokens for glove synth");
    write_file(out, glove_format(synth_word_vectors(tokens, dim, seed)));
  } else {
    throw Error("BadKind", "kind must be detector, tagger, linker or glove");
  }
  std::cerr << "wrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hypothesis extraction and deconstruction for scholarly documents"};
  app.require_subcommand(1);

  // extract
  auto* extract = app.add_subcommand("extract", "find hypothesis candidates in a directory of documents");
  std::string ex_input, ex_output, ex_extractor;
  std::size_t ex_max_words = 60;
  bool ex_stats = false;
  extract->add_option("--input", ex_input, "input directory")->required();
  extract->add_option("--output", ex_output, "candidates JSONL path")->required();
  extract->add_option("--extractor", ex_extractor,
                      "command template for non-.txt files, {input} placeholder "
                      "(default: $HYPREADER_EXTRACTOR)");
  extract->add_option("--max-words", ex_max_words, "length censoring threshold");
  extract->add_flag("--stats", ex_stats, "print word-count stats and histogram");

  // train
  auto* train = app.add_subcommand("train", "train a model");
  train->require_subcommand(1);
  std::string tr_data, tr_config, tr_out, tr_glove, tr_epoch_log, tr_stopwords;
  std::string tr_grid;
  std::uint64_t tr_seed = 1;
  bool tr_tune = false;
  int tr_folds = 10, tr_repeats = 3;
  auto* tr_det = train->add_subcommand("detector", "train the hypothesis detector");
  tr_det->add_option("--data", tr_data, "labeled JSONL {\"text\",\"label\"}")->required();
  tr_det->add_option("--config", tr_config, "TOML-style config (ngram, lr, dim, loss, epochs, neg_samples, bucket_count, seed)");
  tr_det->add_option("--out", tr_out, "model output path")->required();
  tr_det->add_option("--seed", tr_seed, "training seed");
  tr_det->add_option("--stopwords", tr_stopwords, "stop-word list override");
  auto* tr_tag = train->add_subcommand("tagger", "train the cause/outcome tagger");
  tr_tag->add_option("--data", tr_data, "JSONL {\"tokens\",\"tags\"}")->required();
  tr_tag->add_option("--glove", tr_glove, "word vectors, GloVe text format")->required();
  tr_tag->add_option("--config", tr_config, "TOML-style config (pad_len, lstm1_units, lstm2_units, dropout rates, lr, batch_size, epochs, validation_split, seed)");
  tr_tag->add_option("--out", tr_out, "model output path")->required();
  tr_tag->add_option("--seed", tr_seed, "training seed");
  tr_tag->add_option("--epoch-log", tr_epoch_log, "CSV epoch,train_acc,val_acc");
  auto* tr_lnk = train->add_subcommand("linker", "train the causality/direction classifiers");
  tr_lnk->add_option("--data", tr_data, "JSONL {\"text\",\"causal\",\"direction\"}")->required();
  tr_lnk->add_option("--config", tr_config, "TOML-style config (max_n, min_count, causality_reg, direction_reg)");
  tr_lnk->add_option("--out", tr_out, "model output path")->required();
  tr_lnk->add_option("--seed", tr_seed, "fold seed for --tune");
  tr_lnk->add_flag("--tune", tr_tune, "grid-tune regularization first (stratified k-fold x repeats)");
  tr_lnk->add_option("--folds", tr_folds, "folds for --tune");
  tr_lnk->add_option("--repeats", tr_repeats, "repeats for --tune");
  tr_lnk->add_option("--grid", tr_grid, "comma-separated reg grid (default 100,10,1,0.1,0.01)");
  tr_lnk->add_option("--stopwords", tr_stopwords, "stop-word list override");

  // run
  auto* run = app.add_subcommand("run", "run the full pipeline over a directory");
  RunConfig rc;
  std::string run_extractor_flag, run_glove, run_dump, run_stopwords;
  run->add_option("--input", rc.input_dir, "input directory")->required();
  run->add_option("--output", rc.output_path, "output CSV path")->required();
  run->add_option("--detector", rc.detector_path, "detector model")->required();
  run->add_option("--tagger", rc.tagger_path, "tagger model")->required();
  run->add_option("--linker", rc.linker_path, "linker model")->required();
  run->add_option("--glove", run_glove, "word vectors (optional; validated, the tagger model embeds its table)");
  run->add_option("--threshold", rc.threshold, "detector acceptance threshold (default 0.5)");
  run->add_option("--max-words", rc.max_words, "length censoring threshold");
  run->add_option("--seed", rc.seed, "run seed (recorded; pipeline is deterministic)");
  run->add_option("--dump-rejected", run_dump, "write detector-rejected candidates JSONL here");
  run->add_option("--extractor", run_extractor_flag, "command template for non-.txt files (default: $HYPREADER_EXTRACTOR)");
  run->add_option("--stopwords", run_stopwords, "stop-word list override");

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a model with the cross-validation protocols");
  eval->require_subcommand(1);
  std::string ev_data, ev_protocol = "kfold", ev_config, ev_report, ev_glove,
              ev_grid, ev_task = "causality", ev_stopwords;
  int ev_folds = 10, ev_repeats = 3;
  double ev_fraction = 0.75;
  std::uint64_t ev_seed = 1;
  auto* ev_det = eval->add_subcommand("detector", "k-fold or 75/25 holdout P/R/F1");
  ev_det->add_option("--data", ev_data, "labeled JSONL")->required();
  ev_det->add_option("--protocol", ev_protocol, "kfold | holdout");
  ev_det->add_option("--folds", ev_folds, "fold count");
  ev_det->add_option("--seed", ev_seed, "fold seed");
  ev_det->add_option("--config", ev_config, "detector config");
  ev_det->add_option("--report-csv", ev_report, "write the table as CSV");
  ev_det->add_option("--stopwords", ev_stopwords, "stop-word list override");
  auto* ev_tag = eval->add_subcommand("tagger", "holdout per-class P/R/F1 and token accuracy");
  ev_tag->add_option("--data", ev_data, "tagged JSONL")->required();
  ev_tag->add_option("--glove", ev_glove, "word vectors")->required();
  ev_tag->add_option("--config", ev_config, "tagger config");
  ev_tag->add_option("--train-fraction", ev_fraction, "holdout train fraction");
  ev_tag->add_option("--seed", ev_seed, "split/training seed");
  ev_tag->add_option("--report-csv", ev_report, "write the table as CSV");
  auto* ev_lnk = eval->add_subcommand("linker", "stratified k-fold x repeats tuning report");
  ev_lnk->add_option("--data", ev_data, "link JSONL")->required();
  ev_lnk->add_option("--task", ev_task, "causality | direction");
  ev_lnk->add_option("--grid", ev_grid, "comma-separated reg grid");
  ev_lnk->add_option("--folds", ev_folds, "fold count");
  ev_lnk->add_option("--repeats", ev_repeats, "repeat count");
  ev_lnk->add_option("--seed", ev_seed, "fold seed");
  ev_lnk->add_option("--report-csv", ev_report, "write the table as CSV");
  ev_lnk->add_option("--stopwords", ev_stopwords, "stop-word list override");

  // explain
  auto* explain_cmd = app.add_subcommand("explain", "word-level explanation of a detector decision");
  std::string xp_model, xp_text, xp_stopwords;
  int xp_random = 0;
  std::uint64_t xp_seed = 0;
  double xp_ridge = 1e-3;
  explain_cmd->add_option("--model", xp_model, "detector model")->required();
  explain_cmd->add_option("--text", xp_text, "sentence to explain")->required();
  explain_cmd->add_option("--n-random", xp_random, "extra random masks (0 = pure leave-one-out)");
  explain_cmd->add_option("--seed", xp_seed, "mask seed");
  explain_cmd->add_option("--ridge", xp_ridge, "stand-in ridge penalty");
  explain_cmd->add_option("--stopwords", xp_stopwords, "stop-word list override");

  // synth
  auto* synth = app.add_subcommand("synth", "generate synthetic corpora for tests and demos");
  std::string sy_kind, sy_out;
  std::uint64_t sy_seed = 42;
  std::size_t sy_pos = 643, sy_neg = 657, sy_count = 500, sy_dim = 32;
  std::vector<std::string> sy_sources;
  synth->add_option("kind", sy_kind, "detector | tagger | linker | glove")->required();
  synth->add_option("--out", sy_out, "output path")->required();
  synth->add_option("--seed", sy_seed, "generator seed");
  synth->add_option("--pos", sy_pos, "hypothesis sentences (detector)");
  synth->add_option("--neg", sy_neg, "discussion sentences (detector)");
  synth->add_option("--count", sy_count, "sentences (tagger/linker)");
  synth->add_option("--dim", sy_dim, "vector dimension (glove)");
  synth->add_option("--from", sy_sources, "JSONL corpora whose tokens the glove vocab covers");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*extract)
      return cmd_extract(ex_input, ex_output, ex_extractor, ex_max_words, ex_stats);
    if (*train) {
      if (*tr_det)
        return cmd_train_detector(tr_data, tr_config, tr_out, tr_seed, tr_stopwords);
      if (*tr_tag)
        return cmd_train_tagger(tr_data, tr_glove, tr_config, tr_out, tr_seed,
                                tr_epoch_log);
      return cmd_train_linker(tr_data, tr_config, tr_out, tr_seed, tr_tune,
                              tr_folds, tr_repeats, tr_grid, tr_stopwords);
    }
    if (*run) {
      if (!run_glove.empty()) rc.glove_path = run_glove;
      if (!run_dump.empty()) rc.dump_rejected_path = run_dump;
      if (!run_stopwords.empty()) rc.stopwords_path = run_stopwords;
      return cmd_run(rc, run_extractor_flag);
    }
    if (*eval) {
      if (*ev_det)
        return cmd_eval_detector(ev_data, ev_protocol, ev_folds, ev_seed,
                                 ev_config, ev_report, ev_stopwords);
      if (*ev_tag)
        return cmd_eval_tagger(ev_data, ev_glove, ev_config, ev_fraction,
                               ev_seed, ev_report);
      return cmd_eval_linker(ev_data, ev_task, ev_grid, ev_folds, ev_repeats,
                             ev_seed, ev_report, ev_stopwords);
    }
    if (*explain_cmd)
      return cmd_explain(xp_model, xp_text, xp_random, xp_seed, xp_ridge,
                         xp_stopwords);
    if (*synth)
      return cmd_synth(sy_kind, sy_out, sy_seed, sy_pos, sy_neg, sy_count,
                       sy_dim, sy_sources);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
