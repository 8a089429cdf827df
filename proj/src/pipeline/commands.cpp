/**
 * @file commands.cpp
 */

#include "melotrans/pipeline/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "melotrans/labeler/variant_labeler.hpp"
#include "melotrans/metrics/metrics.hpp"
#include "melotrans/mgm/checkpoint.hpp"
#include "melotrans/mgm/generate.hpp"
#include "melotrans/pipeline/dataset.hpp"
#include "melotrans/pipeline/synth_corpus.hpp"
#include "melotrans/remi/codec.hpp"
#include "melotrans/symbolic/midi.hpp"
#include "melotrans/ttmm/motif_synth.hpp"
#include "melotrans/ttmm/va_provider.hpp"

namespace melotrans::pipeline {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ------------------------------------------------------------------ helpers

std::vector<fs::path> list_midi(const std::string& dir) {
  if (!fs::is_directory(dir)) throw DataError("input directory not found: " + dir);
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto ext = entry.path().extension().string();
    if (entry.is_regular_file() && (ext == ".mid" || ext == ".midi")) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw DataError("no .mid files in " + dir);
  return out;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  f << text;
  if (!f) throw DataError("write failed: " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results must be
/// stored by index; the error of the lowest failing index is rethrown.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, jobs));
  if (threads == 1 || n < 2) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(threads, n); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

symbolic::Clip read_clip(const fs::path& path) {
  try {
    return symbolic::read_midi_file(path.string());
  } catch (const std::exception& e) {
    throw DataError(path.filename().string() + ": " + e.what());
  }
}

json labels_json(const symbolic::Clip& clip) {
  json arr = json::array();
  for (const auto& m : clip.motif_labels) arr.push_back({{"type", 0}, {"start", m.start}, {"end", m.end}});
  for (const auto& v : clip.variant_labels) arr.push_back({{"type", v.type}, {"start", v.start}, {"end", v.end}});
  return arr;
}

// ------------------------------------------------------------------ motif input

struct MotifSource {
  std::string va;
  std::string text;
  std::string provider = "lexicon";
  std::string lexicon;
  std::string external_cmd;
  std::string key = "C4";
  bool invert_valence_mode = false;

  void add_to(CLI::App* sub) {
    sub->add_option("--va", va, "explicit valence,arousal (bypasses the text provider)");
    sub->add_option("--text", text, "description mapped to valence/arousal");
    sub->add_option("--provider", provider, "text provider")->check(CLI::IsMember({"lexicon", "external"}));
    sub->add_option("--lexicon", lexicon, "TSV lexicon (word, valence, arousal) replacing the built-in table");
    sub->add_option("--external-cmd", external_cmd, "shell command printing 'valence arousal' for text on stdin");
    sub->add_option("--key", key, "motif key root, e.g. C4 or D#3");
    sub->add_flag("--invert-valence-mode", invert_valence_mode, "high valence selects the major mode");
  }

  bool given() const { return !va.empty() || !text.empty(); }

  ttmm::VAPoint resolve() const {
    if (!va.empty() && !text.empty()) throw UsageError("give either --va or --text, not both");
    if (!va.empty()) {
      try {
        return ttmm::parse_va(va);
      } catch (const std::exception& e) {
        throw UsageError(std::string("--va: ") + e.what());
      }
    }
    if (text.empty()) throw UsageError("a motif needs --va or --text");
    std::unique_ptr<ttmm::VAProvider> p;
    if (provider == "external") {
      if (external_cmd.empty()) throw UsageError("--provider external needs --external-cmd");
      p = std::make_unique<ttmm::ExternalProvider>(external_cmd);
    } else if (!lexicon.empty()) {
      p = std::make_unique<ttmm::LexiconProvider>(ttmm::LexiconProvider::from_tsv(lexicon));
    } else {
      p = std::make_unique<ttmm::LexiconProvider>();
    }
    return ttmm::text_to_va(*p, text);
  }

  int key_pitch() const {
    try {
      return ttmm::parse_key(key);
    } catch (const std::exception& e) {
      throw UsageError(std::string("--key: ") + e.what());
    }
  }
};

struct SynthMotif {
  ttmm::VAPoint va;
  ttmm::MusicalFeatures features;
  symbolic::Clip clip;
};

SynthMotif synth_motif(const MotifSource& src, std::uint64_t seed) {
  SynthMotif m;
  m.va = src.resolve();
  const int key = src.key_pitch();
  ttmm::Rng rng(seed);
  ttmm::FeatureOptions fo;
  fo.invert_valence_mode = src.invert_valence_mode;
  m.features = ttmm::va_to_features(m.va, rng, fo);
  m.clip = ttmm::features_to_motif(m.features, key, rng);
  return m;
}

// ------------------------------------------------------------------ commands

struct LabelArgs {
  std::string input, output;
  bool half_bar = false;
  int jobs = 1;
};

int cmd_label(const LabelArgs& a, std::ostream& out) {
  const auto files = list_midi(a.input);
  ensure_dir(a.output);
  std::vector<symbolic::Clip> labelled(files.size());
  labeler::LabelerOptions opts;
  opts.half_bar_step = a.half_bar;
  parallel_for(files.size(), a.jobs, [&](std::size_t i) {
    try {
      labelled[i] = labeler::label_clip(read_clip(files[i]), opts);
      symbolic::write_midi_file((fs::path(a.output) / files[i].filename()).string(), labelled[i]);
    } catch (const DataError&) {
      throw;
    } catch (const std::exception& e) {
      throw DataError(files[i].filename().string() + ": " + e.what());
    }
  });
  json report = {{"clips", json::array()}};
  metrics::TypeCounts totals{};
  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto counts = metrics::count_variants({labelled[i]});
    for (std::size_t t = 0; t < totals.size(); ++t) totals[t] += counts[t];
    report["clips"].push_back({{"file", files[i].filename().string()},
                               {"motifs", labelled[i].motif_labels.size()},
                               {"counts", counts},
                               {"labels", labels_json(labelled[i])}});
  }
  report["totals"] = totals;
  write_json(fs::path(a.output) / "labels.json", report);
  out << "labelled " << files.size() << " clips; variants by type:";
  for (auto c : totals) out << ' ' << c;
  out << '\n';
  return kExitOk;
}

struct SynthArgs {
  std::string output;
  int clips = 100;
  int bars = 16;
  bool no_cover = false;
  std::uint64_t seed = 1;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  if (a.clips < 1) throw UsageError("--clips must be positive");
  if (a.bars < 2) throw UsageError("--bars must be at least 2");
  ensure_dir(a.output);
  SynthOptions so;
  so.bars = a.bars;
  so.cover_all_types = !a.no_cover && a.bars >= 6;
  const auto corpus = synth_corpus(a.clips, a.seed, so);
  json manifest = {{"seed", a.seed}, {"bars", a.bars}, {"clips", json::array()}};
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    std::ostringstream name;
    name << "synth_" << std::setw(5) << std::setfill('0') << i << ".mid";
    symbolic::write_midi_file((fs::path(a.output) / name.str()).string(), corpus[i].clip);
    manifest["clips"].push_back({{"file", name.str()}, {"placements", placements_json(corpus[i])}});
  }
  write_json(fs::path(a.output) / "manifest.json", manifest);
  out << "wrote " << corpus.size() << " synthetic clips to " << a.output << '\n';
  return kExitOk;
}

struct DatasetArgs {
  std::string input, output;
  int bars = 16;
  std::string split = "8.5,1,0.5";
  bool chords = false;
  std::size_t max_len = remi::kDefaultMaxLength;
  int jobs = 1;
  std::uint64_t seed = 1;
};

int cmd_build_dataset(const DatasetArgs& a, std::ostream& out) {
  DatasetOptions o;
  try {
    o.ratios = parse_ratios(a.split);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--split: ") + e.what());
  }
  if (a.bars < 1) throw UsageError("--bars must be positive");
  o.bars = a.bars;
  o.chords = a.chords;
  o.max_len = a.max_len;
  o.seed = a.seed;
  const auto files = list_midi(a.input);
  std::vector<std::pair<std::string, symbolic::Clip>> clips(files.size());
  parallel_for(files.size(), a.jobs, [&](std::size_t i) { clips[i] = {files[i].filename().string(), read_clip(files[i])}; });
  std::vector<Segment> segments;
  try {
    segments = build_segments(clips, o);
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
  ensure_dir(a.output);
  std::array<std::ostringstream, 3> lines;
  std::array<std::size_t, 3> counts{};
  PairStats pairs;
  std::size_t phrases = 0;
  for (const auto& s : segments) {
    const auto k = static_cast<std::size_t>(s.split);
    lines[k] << segment_to_json(s).dump() << '\n';
    ++counts[k];
    branch_pairs(s.tokens, &pairs);
    phrases += phrase_example(s.tokens).has_value();
  }
  json files_json = json::object();
  const auto splits = assign_splits(clips.size(), o.ratios, o.seed);
  for (std::size_t i = 0; i < clips.size(); ++i) files_json[clips[i].first] = split_name(splits[i]);
  for (Split s : {Split::kTrain, Split::kValid, Split::kTest}) {
    write_text(fs::path(a.output) / (std::string(split_name(s)) + ".jsonl"), lines[static_cast<std::size_t>(s)].str());
  }
  std::ostringstream vocab;
  remi::Vocabulary::instance().save(vocab);
  write_text(fs::path(a.output) / "vocab.txt", vocab.str());
  write_json(fs::path(a.output) / "manifest.json",
             {{"config-version", kConfigVersion},
              {"vocab_size", remi::Vocabulary::instance().size()},
              {"bars", o.bars},
              {"chords", o.chords},
              {"max_len", o.max_len},
              {"seed", o.seed},
              {"split_ratios", {o.ratios.train, o.ratios.valid, o.ratios.test}},
              {"segments", {{"train", counts[0]}, {"valid", counts[1]}, {"test", counts[2]}}},
              {"branch_pairs", pairs.kept},
              {"branch_pairs_too_long", pairs.too_long},
              {"phrase_examples", phrases},
              {"files", files_json}});
  out << "segments train/valid/test: " << counts[0] << '/' << counts[1] << '/' << counts[2] << "; branch pairs "
      << pairs.kept << " (" << pairs.too_long << " too long); phrase examples " << phrases << '\n';
  return kExitOk;
}

std::vector<Segment> read_split(const std::string& dir, Split split) {
  const fs::path path = fs::path(dir) / (std::string(split_name(split)) + ".jsonl");
  std::ifstream in(path);
  if (!in) throw DataError("missing dataset file " + path.string());
  std::vector<Segment> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(segment_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

struct TrainArgs {
  std::string dataset, output, preset = "desk", branches = "1,2,3,4,5", log;
  std::optional<int> epochs, batch, max_len;
  std::optional<double> lr;
  double stop_nll = 0.0;
  bool no_phrase = false;
  std::size_t max_examples = 0;
  std::uint64_t seed = 1;
};

std::vector<int> parse_branches(const std::string& text) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    if (item.size() != 1 || item[0] < '1' || item[0] > '5') throw UsageError("--branches takes types 1..5, got '" + item + "'");
    const int j = item[0] - '0';
    if (std::find(out.begin(), out.end(), j) == out.end()) out.push_back(j);
  }
  return out;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  mgm::ModelConfig cfg = a.preset == "full" ? mgm::ModelConfig::full() : mgm::ModelConfig::desk();
  cfg.seed = a.seed;
  if (a.epochs) cfg.epochs = *a.epochs;
  if (a.batch) cfg.batch = *a.batch;
  if (a.lr) cfg.lr = *a.lr;
  if (a.max_len) cfg.max_len = *a.max_len;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto branch_types = parse_branches(a.branches);
  const auto train_set = read_split(a.dataset, Split::kTrain);
  const auto valid_set = read_split(a.dataset, Split::kValid);
  ensure_dir(a.output);
  std::ofstream log_file;
  const std::string log_path = a.log.empty() ? (fs::path(a.output) / "train_log.tsv").string() : a.log;
  log_file.open(log_path);
  if (!log_file) throw DataError("cannot write " + log_path);

  auto fits = [&](const mgm::Example& ex) {
    return ex.src.size() <= static_cast<std::size_t>(cfg.max_len) && ex.target.size() <= static_cast<std::size_t>(cfg.max_len);
  };
  auto cap = [&](std::vector<mgm::Example>& v) {
    if (a.max_examples > 0 && v.size() > a.max_examples) v.resize(a.max_examples);
  };
  json report = {{"preset", a.preset}, {"seed", a.seed}, {"models", json::object()}};
  auto run = [&](mgm::ModelKind kind, const std::string& tag, std::vector<mgm::Example> train_ex,
                 std::vector<mgm::Example> valid_ex) {
    cap(train_ex);
    mgm::EncoderDecoder model(cfg, kind);
    json entry = {{"examples", train_ex.size()}, {"valid_examples", valid_ex.size()}};
    if (train_ex.empty()) {
      out << tag << ": no training examples; saving the initialised model\n";
      entry["epochs_run"] = 0;
    } else {
      mgm::TrainOptions o = mgm::train_options(cfg);
      o.log = &log_file;
      o.tag = tag;
      if (a.stop_nll > 0.0) o.stop_when = [&](int, double nll) { return nll < a.stop_nll; };
      const auto rep = mgm::train(model, train_ex, o);
      entry["epochs_run"] = rep.epochs_run;
      entry["final_nll"] = rep.epoch_nll.back();
      out << tag << ": " << train_ex.size() << " examples, " << rep.epochs_run << " epochs, nll "
          << rep.epoch_nll.back();
      if (!valid_ex.empty()) {
        const double acc = mgm::token_accuracy(model, valid_ex).value();
        entry["valid_token_accuracy"] = acc;
        out << ", valid token accuracy " << acc;
      }
      out << '\n';
    }
    mgm::save_checkpoint(model, (fs::path(a.output) / (tag + ".ckpt")).string());
    report["models"][tag] = entry;
  };

  for (int j : branch_types) {
    std::vector<mgm::Example> tr, va;
    for (const auto& s : train_set) {
      for (const auto& p : branch_pairs(s.tokens)) {
        if (p.type == j) tr.push_back(mgm::branch_example(p.motif, p.variant));
      }
    }
    for (const auto& s : valid_set) {
      for (const auto& p : branch_pairs(s.tokens)) {
        if (p.type == j) va.push_back(mgm::branch_example(p.motif, p.variant));
      }
    }
    run(mgm::ModelKind::kBranch, "branch" + std::to_string(j), std::move(tr), std::move(va));
  }
  if (!a.no_phrase) {
    std::vector<mgm::Example> tr, va;
    for (const auto& s : train_set) {
      if (auto ex = phrase_example(s.tokens); ex && fits(*ex)) tr.push_back(std::move(*ex));
    }
    for (const auto& s : valid_set) {
      if (auto ex = phrase_example(s.tokens); ex && fits(*ex)) va.push_back(std::move(*ex));
    }
    run(mgm::ModelKind::kPhrase, "phrase", std::move(tr), std::move(va));
  }
  write_json(fs::path(a.output) / "train_report.json", report);
  return kExitOk;
}

struct MotifArgs {
  MotifSource src;
  std::string output;
  std::uint64_t seed = 1;
};

int cmd_motif(const MotifArgs& a, std::ostream& out) {
  const SynthMotif m = synth_motif(a.src, a.seed);
  symbolic::write_midi_file(a.output, m.clip);
  json pitches = json::array(), durations = json::array();
  for (const auto& n : m.clip.melody) {
    pitches.push_back(n.pitch);
    durations.push_back(n.duration);
  }
  out << json{{"valence", m.va.valence},
              {"arousal", m.va.arousal},
              {"mode", ttmm::mode_name(m.features.mode)},
              {"nd", m.features.nd},
              {"nad", m.features.nad},
              {"non", m.clip.melody.size()},
              {"pitches", pitches},
              {"durations", durations},
              {"output", a.output}}
             .dump()
      << '\n';
  return kExitOk;
}

struct MelodyArgs {
  MotifSource src;
  std::string motif_file, checkpoints, output;
  int bars = 16;
  double temperature = 0.0;
  std::uint64_t seed = 1;
};

std::unique_ptr<mgm::EncoderDecoder> load_model(const std::string& dir, const std::string& name, mgm::ModelKind kind) {
  const fs::path path = fs::path(dir) / (name + ".ckpt");
  if (!fs::exists(path)) throw DataError("missing checkpoint " + path.string());
  auto model = mgm::load_checkpoint(path.string());
  if (model->kind() != kind) throw DataError(path.string() + " holds the wrong model kind");
  return model;
}

int cmd_melody(const MelodyArgs& a, std::ostream& out) {
  if (a.bars < 1) throw UsageError("--bars must be positive");
  if (a.temperature < 0.0) throw UsageError("--temperature must be non-negative");
  if (a.motif_file.empty() == !a.src.given()) throw UsageError("give exactly one of --motif or --va/--text");
  const symbolic::Clip motif = a.motif_file.empty() ? synth_motif(a.src, a.seed).clip : read_clip(a.motif_file);
  remi::TokenSeq motif_region;
  try {
    motif_region = mgm::motif_region_tokens(motif);
  } catch (const std::exception& e) {
    throw DataError(std::string("motif: ") + e.what());
  }
  std::array<std::unique_ptr<mgm::EncoderDecoder>, 5> branches;
  std::array<const mgm::EncoderDecoder*, 5> ptrs{};
  for (int j = 1; j <= 5; ++j) {
    branches[static_cast<std::size_t>(j - 1)] = load_model(a.checkpoints, "branch" + std::to_string(j), mgm::ModelKind::kBranch);
    ptrs[static_cast<std::size_t>(j - 1)] = branches[static_cast<std::size_t>(j - 1)].get();
  }
  const auto phrase = load_model(a.checkpoints, "phrase", mgm::ModelKind::kPhrase);
  mgm::SamplingOptions s{a.temperature, a.seed};
  const auto variants = mgm::generate_variants(ptrs, motif_region, s);
  mgm::PhraseOptions po;
  po.bars = a.bars;
  po.sampling = s;
  const auto result = mgm::generate_phrase(*phrase, variants.input, po);
  symbolic::Clip clip;
  try {
    clip = remi::decode(result.tokens);
  } catch (const std::exception& e) {
    throw DataError(std::string("generated sequence does not decode: ") + e.what());
  }
  symbolic::write_midi_file(a.output, clip);
  out << json{{"output", a.output},
              {"tokens", result.tokens.size()},
              {"notes", clip.melody.size()},
              {"bars", clip.length / symbolic::kTicksPerBar},
              {"variants_truncated", variants.truncated},
              {"mvape_fallbacks", result.mvape_fallbacks},
              {"hit_max_len", result.hit_max_len}}
             .dump()
      << '\n';
  return kExitOk;
}

struct EvalArgs {
  std::string input, json_path;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const auto files = list_midi(a.input);
  std::vector<symbolic::Clip> corpus;
  for (const auto& f : files) corpus.push_back(read_clip(f));
  const auto stats = metrics::corpus_stats(corpus);
  const json j = metrics::to_json(stats);
  if (a.json_path == "-") {
    out << j.dump(2) << '\n';
    return kExitOk;
  }
  out << metrics::format_table(stats);
  if (!a.json_path.empty()) write_json(a.json_path, j);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("melotrans: motif/variant labelling, text-to-motif and motif-to-melody tools", "melotrans");
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config (config-version = 1, one table per subcommand); flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);
  int config_version = 0;
  app.add_option("--config-version,--config_version", config_version)->group("");
  std::uint64_t seed = 1;
  auto add_seed = [&seed](CLI::App* sub) { sub->add_option("--seed", seed, "random seed")->capture_default_str(); };

  LabelArgs label;
  auto* label_cmd = app.add_subcommand("label", "label variants of the motifs marked in each MIDI file");
  label_cmd->add_option("input", label.input, "directory of motif-labelled MIDI files")->required();
  label_cmd->add_option("-o,--output", label.output, "output directory")->required();
  label_cmd->add_flag("--half-bar-step", label.half_bar, "slide windows by half a bar");
  label_cmd->add_option("--jobs", label.jobs, "worker threads")->check(CLI::PositiveNumber);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth-corpus", "write synthetic motif/variant phrases");
  add_seed(synth_cmd);
  synth_cmd->add_option("-o,--output", synth.output, "output directory")->required();
  synth_cmd->add_option("--clips", synth.clips, "number of clips")->capture_default_str();
  synth_cmd->add_option("--bars", synth.bars, "bars per clip")->capture_default_str();
  synth_cmd->add_flag("--no-cover", synth.no_cover, "do not force one variant of every type per clip");

  DatasetArgs ds;
  auto* ds_cmd = app.add_subcommand("build-dataset", "segment, tokenize and split a labelled MIDI corpus");
  add_seed(ds_cmd);
  ds_cmd->add_option("input", ds.input, "directory of labelled MIDI files")->required();
  ds_cmd->add_option("-o,--output", ds.output, "dataset directory")->required();
  ds_cmd->add_option("--bars", ds.bars, "bars per phrase")->capture_default_str();
  ds_cmd->add_option("--split", ds.split, "train,valid,test ratios")->capture_default_str();
  ds_cmd->add_flag("--chords", ds.chords, "keep chord tokens in stored sequences");
  ds_cmd->add_option("--max-len", ds.max_len, "maximum tokens per sequence")->capture_default_str();
  ds_cmd->add_option("--jobs", ds.jobs, "worker threads")->check(CLI::PositiveNumber);

  TrainArgs tr;
  auto* tr_cmd = app.add_subcommand("train", "train variant branches and the phrase model");
  add_seed(tr_cmd);
  tr_cmd->add_option("--dataset", tr.dataset, "dataset directory from build-dataset")->required();
  tr_cmd->add_option("-o,--output", tr.output, "checkpoint directory")->required();
  tr_cmd->add_option("--preset", tr.preset, "model size")->check(CLI::IsMember({"desk", "full"}))->capture_default_str();
  tr_cmd->add_option("--epochs", tr.epochs, "override epochs");
  tr_cmd->add_option("--batch", tr.batch, "override batch size");
  tr_cmd->add_option("--lr", tr.lr, "override learning rate");
  tr_cmd->add_option("--max-len", tr.max_len, "override maximum sequence length");
  tr_cmd->add_option("--branches", tr.branches, "variant types to train")->capture_default_str();
  tr_cmd->add_flag("--no-phrase", tr.no_phrase, "skip the phrase model");
  tr_cmd->add_option("--stop-nll", tr.stop_nll, "stop a model once its epoch NLL falls below this");
  tr_cmd->add_option("--max-examples", tr.max_examples, "cap training examples per model (0 = all)");
  tr_cmd->add_option("--log", tr.log, "loss log path (default <output>/train_log.tsv)");

  MotifArgs mo;
  auto* mo_cmd = app.add_subcommand("motif", "synthesize a one-bar motif from text or valence/arousal");
  add_seed(mo_cmd);
  mo.src.add_to(mo_cmd);
  mo_cmd->add_option("-o,--output", mo.output, "output MIDI file")->required();

  MelodyArgs me;
  auto* me_cmd = app.add_subcommand("melody", "generate a phrase from a motif");
  add_seed(me_cmd);
  me.src.add_to(me_cmd);
  me_cmd->add_option("--motif", me.motif_file, "motif-labelled MIDI file");
  me_cmd->add_option("--checkpoints", me.checkpoints, "directory with branch1..5.ckpt and phrase.ckpt")->required();
  me_cmd->add_option("-o,--output", me.output, "output MIDI file")->required();
  me_cmd->add_option("--bars", me.bars, "phrase length in bars")->capture_default_str();
  me_cmd->add_option("--temperature", me.temperature, "0 for greedy decoding")->capture_default_str();

  EvalArgs ev;
  auto* ev_cmd = app.add_subcommand("eval", "variant proportion and distance of a labelled corpus");
  ev_cmd->add_option("input", ev.input, "directory of labelled MIDI files")->required();
  ev_cmd->add_option("--json", ev.json_path, "write the JSON report here ('-' prints it instead of the table)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.get_option("--config")->count() > 0 && config_version != kConfigVersion) {
      throw UsageError("config file must declare config-version = " + std::to_string(kConfigVersion));
    }
    synth.seed = ds.seed = tr.seed = mo.seed = me.seed = seed;
    if (label_cmd->parsed()) return cmd_label(label, out);
    if (synth_cmd->parsed()) return cmd_synth(synth, out);
    if (ds_cmd->parsed()) return cmd_build_dataset(ds, out);
    if (tr_cmd->parsed()) return cmd_train(tr, out);
    if (mo_cmd->parsed()) return cmd_motif(mo, out);
    if (me_cmd->parsed()) return cmd_melody(me, out);
    if (ev_cmd->parsed()) return cmd_eval(ev, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace melotrans::pipeline
