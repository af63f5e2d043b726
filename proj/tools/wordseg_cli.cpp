// Command-line front end for the wordseg shared library. Talks to the core
// exclusively through the C API in wordseg.h.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wordseg.h"

namespace {

int die(ws_status status, const std::string& what) {
  std::cerr << "wordseg: " << what << ": " << ws_status_name(status) << ": " << ws_last_error()
            << "\n";
  return 1;
}

struct DimsOption {
  int d_c = 50;
  int d_w = 50;
  int hidden = 50;
};

bool parse_dims(const std::string& text, DimsOption& dims) {
  int a, b, c;
  char extra;
  if (std::sscanf(text.c_str(), "%d,%d,%d%c", &a, &b, &c, &extra) != 3) return false;
  if (a < 1 || b < 1 || c < 1) return false;
  dims = {a, b, c};
  return true;
}

std::string format_double(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

int cmd_train(const std::string& train_path, const std::string& out_path,
              const std::string& report_path, const std::string& pretrained,
              const ws_train_config& cfg) {
  ws_model* model = nullptr;
  const std::string report = report_path.empty() ? out_path + ".report.jsonl" : report_path;
  ws_status st = ws_train(&cfg, train_path.c_str(), pretrained.empty() ? nullptr : pretrained.c_str(),
                          report.c_str(), &model);
  if (st != WS_OK) return die(st, "training failed");
  st = ws_model_save(model, out_path.c_str());
  if (st != WS_OK) {
    ws_model_free(model);
    return die(st, "saving " + out_path);
  }
  char* info = nullptr;
  if (ws_model_info_json(model, &info) == WS_OK) {
    std::cout << info << "\n";
    ws_string_free(info);
  }
  ws_model_free(model);
  std::cerr << "wordseg: model written to " << out_path << ", report to " << report << "\n";
  return 0;
}

int cmd_segment(const std::string& model_path, const std::string& input_path,
                const std::string& output_path, int beam) {
  ws_model* model = nullptr;
  ws_status st = ws_model_load(model_path.c_str(), &model);
  if (st != WS_OK) return die(st, "loading " + model_path);

  std::ifstream in(input_path, std::ios::binary);
  if (!in) {
    ws_model_free(model);
    std::cerr << "wordseg: cannot open " << input_path << "\n";
    return 1;
  }
  std::ostream* out = &std::cout;
  std::ofstream file_out;
  if (!output_path.empty() && output_path != "-") {
    file_out.open(output_path, std::ios::binary | std::ios::trunc);
    if (!file_out) {
      ws_model_free(model);
      std::cerr << "wordseg: cannot open " << output_path << " for writing\n";
      return 1;
    }
    out = &file_out;
  }

  std::string line;
  while (std::getline(in, line)) {
    char* segmented = nullptr;
    st = ws_segment_line(model, line.c_str(), beam, &segmented);
    if (st != WS_OK) {
      ws_model_free(model);
      return die(st, "segmenting input");
    }
    *out << segmented << "\n";
    ws_string_free(segmented);
  }
  ws_model_free(model);
  return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& gold_path, int beam,
                 const std::string& train_vocab, bool oracle) {
  ws_model* model = nullptr;
  ws_status st = ws_model_load(model_path.c_str(), &model);
  if (st != WS_OK) return die(st, "loading " + model_path);

  ws_metrics metrics;
  st = ws_evaluate(model, gold_path.c_str(), beam,
                   train_vocab.empty() ? nullptr : train_vocab.c_str(), oracle ? 1 : 0, &metrics);
  ws_model_free(model);
  if (st != WS_OK) return die(st, "evaluating " + gold_path);

  const double secs = metrics.seconds > 0.0 ? metrics.seconds : 1e-9;
  // one flat record, exactly these six fields
  std::cout << "{\"precision\":" << format_double(metrics.precision)
            << ",\"recall\":" << format_double(metrics.recall)
            << ",\"f1\":" << format_double(metrics.f1)
            << ",\"oov_recall\":" << format_double(metrics.oov_recall)
            << ",\"sentences_per_sec\":" << format_double(metrics.sentences / secs)
            << ",\"chars_per_sec\":" << format_double(metrics.characters / secs) << "}\n";
  return 0;
}

int cmd_inspect(const std::string& model_path) {
  ws_model* model = nullptr;
  ws_status st = ws_model_load(model_path.c_str(), &model);
  if (st != WS_OK) return die(st, "loading " + model_path);
  char* info = nullptr;
  st = ws_model_info_json(model, &info);
  if (st != WS_OK) {
    ws_model_free(model);
    return die(st, "inspecting " + model_path);
  }
  std::cout << info << "\n";
  ws_string_free(info);
  ws_model_free(model);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wordseg — trainable greedy neural word segmenter"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "Train a model on a segmented corpus");
  std::string train_path, out_path, report_path, pretrained, strategy = "early", dims_text;
  DimsOption dims;
  ws_train_config cfg;
  ws_train_config_init(&cfg);
  double dev_frac = 0.1, mu = 0.2, gamma = 0.1, lr = 0.2, shortlist_frac = 0.5;
  double unk_prob = 0.5, clip = 5.0;
  bool normalize_ascii = false;
  int beam = 1, epochs = 50, patience = 5, max_word_len = 4;
  std::uint64_t seed = 1, unk_threshold = 1;
  train->add_option("--train", train_path, "training corpus (SIGHAN format)")->required();
  train->add_option("--out", out_path, "output model path")->required();
  train->add_option("--report", report_path, "per-epoch report path (default <out>.report.jsonl)");
  train->add_option("--dev-frac", dev_frac, "training tail held out as dev")->capture_default_str();
  train->add_option("--beam-size", beam, "beam size for training and dev decode")
      ->capture_default_str();
  train->add_option("--epochs", epochs, "maximum training epochs")->capture_default_str();
  train->add_option("--strategy", strategy, "update strategy: standard|early|laso")
      ->capture_default_str();
  train->add_option("--mu", mu, "margin loss discount")->capture_default_str();
  train->add_option("--gamma", gamma, "learning-rate decay")->capture_default_str();
  train->add_option("--lr", lr, "base learning rate")->capture_default_str();
  train->add_option("--shortlist-frac", shortlist_frac, "fraction of IV words in the short list")
      ->capture_default_str();
  train->add_option("--max-word-len", max_word_len, "longest composable word")
      ->capture_default_str();
  train->add_option("--dims", dims_text, "d_c,d_w,H (default 50,50,50)");
  train->add_option("--pretrained", pretrained, "word2vec-text character embeddings");
  train->add_option("--seed", seed, "random seed")->capture_default_str();
  train->add_option("--patience", patience, "epochs without dev improvement before stopping")
      ->capture_default_str();
  train->add_option("--unk-threshold", unk_threshold, "rare-character frequency threshold")
      ->capture_default_str();
  train->add_option("--unk-prob", unk_prob, "rare-character UNK replacement probability")
      ->capture_default_str();
  train->add_option("--clip", clip, "global gradient norm clip (<= 0 disables)")
      ->capture_default_str();
  train->add_flag("--normalize-ascii", normalize_ascii,
                  "collapse ASCII digits/letters to one class symbol each");

  // segment
  auto* segment = app.add_subcommand("segment", "Segment raw text, one sentence per line");
  std::string seg_model, seg_input, seg_output = "-";
  int seg_beam = 1;
  segment->add_option("--model", seg_model, "model file")->required();
  segment->add_option("--input", seg_input, "unsegmented input file")->required();
  segment->add_option("--output", seg_output, "output file (- for stdout)")
      ->capture_default_str();
  segment->add_option("--beam-size", seg_beam, "beam size")->capture_default_str();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score a model against a gold corpus");
  std::string eval_model, eval_gold, eval_vocab;
  int eval_beam = 1;
  bool oracle = false;
  evaluate->add_option("--model", eval_model, "model file")->required();
  evaluate->add_option("--gold", eval_gold, "gold corpus (SIGHAN format)")->required();
  evaluate->add_option("--beam-size", eval_beam, "beam size")->capture_default_str();
  evaluate->add_option("--train-vocab", eval_vocab,
                       "segmented corpus defining the IV word set for OOV recall");
  evaluate->add_flag("--oracle", oracle, "score gold against itself (bypasses decoding)");

  // inspect
  auto* inspect = app.add_subcommand("inspect", "Print model metadata");
  std::string inspect_model;
  inspect->add_option("--model", inspect_model, "model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (*train) {
    if (!dims_text.empty() && !parse_dims(dims_text, dims)) {
      std::cerr << "wordseg: --dims expects d_c,d_w,H\n";
      return 2;
    }
    cfg.char_dim = dims.d_c;
    cfg.word_dim = dims.d_w;
    cfg.hidden = dims.hidden;
    cfg.max_word_len = max_word_len;
    cfg.margin_discount = mu;
    cfg.beam_size = beam;
    cfg.learning_rate = lr;
    cfg.gamma = gamma;
    cfg.max_epochs = epochs;
    cfg.patience = patience;
    cfg.strategy = strategy.c_str();
    cfg.shortlist_fraction = shortlist_frac;
    cfg.dev_fraction = dev_frac;
    cfg.seed = seed;
    cfg.unk_threshold = unk_threshold;
    cfg.unk_replace_prob = unk_prob;
    cfg.grad_clip_norm = clip;
    cfg.normalize_ascii = normalize_ascii ? 1 : 0;
    return cmd_train(train_path, out_path, report_path, pretrained, cfg);
  }
  if (*segment) return cmd_segment(seg_model, seg_input, seg_output, seg_beam);
  if (*evaluate) return cmd_evaluate(eval_model, eval_gold, eval_beam, eval_vocab, oracle);
  if (*inspect) return cmd_inspect(inspect_model);
  return 2;
}
