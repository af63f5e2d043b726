#include "wordseg/pipeline.hpp"

#include <fstream>

namespace wordseg {

PipelineResult train_pipeline(const TrainConfig& cfg, const std::string& train_path,
                              const std::string& pretrained_path, const std::string& report_path,
                              const EpochCallback& on_epoch) {
  cfg.validate();
  const Corpus full = load_segmented_corpus(train_path, cfg.normalize_ascii);
  auto [train_c, dev_c] = split_dev(full, cfg.dev_fraction);

  PretrainedChars pretrained;
  bool have_pretrained = false;
  if (!pretrained_path.empty()) {
    // Vocabulary construction is deterministic, so this matches the one
    // train() builds internally row for row.
    const CharVocab vocab = build_char_vocab(train_c, cfg.unk_threshold);
    pretrained = load_pretrained_embeddings(pretrained_path, vocab, cfg.dims.d_c);
    have_pretrained = true;
  }

  std::ofstream report_out;
  if (!report_path.empty()) {
    report_out.open(report_path, std::ios::trunc);
    if (!report_out) throw IoError("cannot open " + report_path + " for writing");
  }
  // The record stays free of wall-clock fields so a fixed seed reproduces
  // the report byte for byte.
  auto emit = [&](const EpochRecord& r) {
    if (report_out.is_open()) {
      nlohmann::json line = {{"epoch", r.epoch},
                             {"lr", r.lr},
                             {"dev_precision", r.dev_precision},
                             {"dev_recall", r.dev_recall},
                             {"dev_f1", r.dev_f1},
                             {"dev_oov_recall", r.dev_oov_recall},
                             {"mean_loss", r.mean_loss},
                             {"updates", r.updates},
                             {"mean_stop_fraction", r.mean_stop_fraction}};
      report_out << line.dump() << "\n";
      report_out.flush();
    }
    if (on_epoch) on_epoch(r);
  };

  TrainedModel trained =
      train(cfg, train_c, dev_c, have_pretrained ? &pretrained : nullptr, emit);

  PipelineResult out;
  out.report = std::move(trained.report);
  out.bundle.params = std::move(trained.params);
  out.bundle.vocab = std::move(trained.vocab);
  out.bundle.shortlist = std::move(trained.shortlist);
  out.bundle.seed = cfg.seed;
  out.bundle.normalize_ascii = cfg.normalize_ascii;

  nlohmann::json prov;
  prov["trainer"] = "wordseg";
  prov["strategy"] = strategy_name(cfg.strategy);
  prov["train_file"] = train_path;
  prov["train_sentences"] = train_c.sentences.size();
  prov["dev_sentences"] = dev_c.sentences.size();
  prov["config"] = {{"mu", cfg.mu},
                    {"beam_size", cfg.beam_size},
                    {"lr0", cfg.lr0},
                    {"gamma", cfg.gamma},
                    {"max_epochs", cfg.max_epochs},
                    {"patience", cfg.patience},
                    {"shortlist_fraction", cfg.shortlist_fraction},
                    {"dev_fraction", cfg.dev_fraction},
                    {"normalize_ascii", cfg.normalize_ascii},
                    {"unk_threshold", cfg.unk_threshold},
                    {"unk_replace_prob", cfg.unk_replace_prob},
                    {"grad_clip_norm", cfg.grad_clip_norm}};
  prov["epochs_run"] = out.report.epochs.size();
  prov["best_epoch"] = out.report.best_epoch;
  prov["best_dev_f1"] =
      out.report.best_epoch >= 0 ? out.report.epochs[out.report.best_epoch].dev_f1 : 0.0;
  prov["altered_gold_words"] = out.report.altered_gold_words;
  if (have_pretrained) {
    prov["pretrained"] = {{"file", pretrained_path}, {"coverage", pretrained.coverage}};
  }
  out.bundle.provenance = std::move(prov);
  return out;
}

}  // namespace wordseg
