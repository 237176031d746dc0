// Copyright (c) 2026 The ctcmarg Authors
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

// Pipeline front end: gen | train | decode | eval. Every run is a pure
// function of its flags and seed; re-runs write byte-identical primary
// outputs (wall-clock fields are the sole exception). Exit codes: 0 ok,
// 2 bad configuration, 1 runtime failure.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ctcmarg/ctcmarg.hpp"

namespace fs = std::filesystem;

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Flag snapshot written next to every subcommand's outputs, so a run can
// be reproduced from its directory alone.
void write_config_echo(const fs::path& dir,
                       const std::vector<std::pair<std::string, std::string>>&
                           entries) {
  fs::create_directories(dir);
  std::ofstream out(dir / "config.echo");
  for (const auto& [key, value] : entries) out << key << '=' << value << '\n';
}

ctcmarg::MarginalConfig make_marginal_config(const std::string& strategy,
                                             int32_t K, int32_t n,
                                             double temperature,
                                             int32_t decode_K,
                                             int32_t decode_beam,
                                             bool renormalize,
                                             bool no_resample,
                                             bool keep_duplicates) {
  ctcmarg::MarginalConfig cfg;
  cfg.strategy = ctcmarg::strategy_from_name(strategy);
  if (K < 1) throw ctcmarg::ConfigError("K must be >= 1");
  if (n < 1) throw ctcmarg::ConfigError("n must be >= 1");
  if (temperature <= 0.0)
    throw ctcmarg::ConfigError("temperature must be positive");
  if (cfg.strategy == ctcmarg::Strategy::kRandomizedTkm && n >= K)
    throw ctcmarg::ConfigError(
        "randomized subsets need n < K (got n=" + std::to_string(n) +
        ", K=" + std::to_string(K) + ")");
  cfg.K = K;
  cfg.n = n;
  cfg.temperature = temperature;
  cfg.decode_K = decode_K;
  cfg.decode_beam = decode_beam;
  cfg.renormalize_weights = renormalize;
  cfg.resample_each_step = !no_resample;
  cfg.keep_duplicate_samples = keep_duplicates;
  return cfg;
}

struct GenArgs {
  std::string out;
  int64_t count = 0;
  uint64_t seed = 0;
  double noise = 0.0;
  int32_t phonemes = 4;
  int32_t letters = 4;
  int32_t ambiguous = 0;
  int32_t min_len = 1;
  int32_t max_len = 4;
  int32_t fpp = 2;
  double frame_shift = 10.0;
};

int run_gen(const GenArgs& a) {
  ctcmarg::SynthSpec spec;
  spec.num_phonemes = a.phonemes;
  spec.num_letters = a.letters;
  spec.g2p = ctcmarg::ambiguous_g2p(a.phonemes, a.letters, a.ambiguous);
  spec.min_len = a.min_len;
  spec.max_len = a.max_len;
  spec.frames_per_phoneme = a.fpp;
  spec.noise = a.noise;
  spec.frame_shift_ms = a.frame_shift;
  spec.seed = a.seed;
  if (a.ambiguous < 0 || a.ambiguous > a.letters)
    throw ctcmarg::ConfigError("ambiguous letter count out of range");
  validate_spec(spec);
  if (a.count < 1) throw ctcmarg::ConfigError("count must be >= 1");

  ctcmarg::Corpus corpus = ctcmarg::build_corpus(spec, a.count);
  ctcmarg::save_corpus(a.out, corpus);
  write_config_echo(a.out, {{"subcommand", "gen"},
                            {"out", a.out},
                            {"count", std::to_string(a.count)},
                            {"seed", std::to_string(a.seed)},
                            {"noise", fmt_double(a.noise)},
                            {"phonemes", std::to_string(a.phonemes)},
                            {"letters", std::to_string(a.letters)},
                            {"ambiguous", std::to_string(a.ambiguous)},
                            {"min_len", std::to_string(a.min_len)},
                            {"max_len", std::to_string(a.max_len)},
                            {"fpp", std::to_string(a.fpp)},
                            {"frame_shift", fmt_double(a.frame_shift)}});

  int64_t frames = 0, ref_tokens = 0;
  for (const auto& utt : corpus.utterances) {
    frames += utt.lattice.num_frames();
    ref_tokens += static_cast<int64_t>(utt.reference.size());
  }
  std::cout << "wrote " << corpus.utterances.size() << " utterances to "
            << a.out << " (" << frames << " frames, " << ref_tokens
            << " reference tokens)\n";
  return 0;
}

struct TrainArgs {
  std::string corpus;
  std::string out;
  std::string strategy;
  int32_t K = 8;
  int32_t n = 4;
  double temperature = 1.0;
  double lr = 0.05;
  int32_t batch = 8;
  int32_t steps = 1000;
  double clip = 5.0;
  int32_t log_every = 10;
  uint64_t seed = 0;
  int32_t workers = 1;
  bool renormalize = false;
  bool no_resample = false;
  bool keep_duplicates = false;
};

int run_train(const TrainArgs& a) {
  ctcmarg::MarginalConfig mcfg = make_marginal_config(
      a.strategy, a.K, a.n, a.temperature, 8, 8, a.renormalize,
      a.no_resample, a.keep_duplicates);
  ctcmarg::SgdConfig scfg;
  scfg.lr = a.lr;
  scfg.batch_size = a.batch;
  scfg.num_steps = a.steps;
  scfg.clip_norm = a.clip;
  scfg.log_every = a.log_every;
  scfg.num_workers = a.workers;
  if (a.workers < 1) throw ctcmarg::ConfigError("workers must be >= 1");

  ctcmarg::Corpus corpus = ctcmarg::load_corpus(a.corpus);
  if (corpus.utterances.empty())
    throw ctcmarg::ConfigError("corpus " + a.corpus + " holds no utterances");
  ctcmarg::ScorerParams params(corpus.phonemes.size(),
                               corpus.graphemes.num_letters());
  ctcmarg::TrainResult result =
      ctcmarg::train(corpus.utterances, params, mcfg, scfg, a.seed);

  fs::create_directories(a.out);
  {
    std::ofstream out(fs::path(a.out) / "params.txt");
    ctcmarg::write_scorer_params(out, params);
  }
  {
    std::ofstream out(fs::path(a.out) / "loss.csv");
    ctcmarg::write_loss_csv(out, result.records);
  }
  write_config_echo(a.out,
                    {{"subcommand", "train"},
                     {"corpus", a.corpus},
                     {"out", a.out},
                     {"strategy", a.strategy},
                     {"K", std::to_string(a.K)},
                     {"n", std::to_string(a.n)},
                     {"temperature", fmt_double(a.temperature)},
                     {"lr", fmt_double(a.lr)},
                     {"batch", std::to_string(a.batch)},
                     {"steps", std::to_string(a.steps)},
                     {"clip", fmt_double(a.clip)},
                     {"log_every", std::to_string(a.log_every)},
                     {"seed", std::to_string(a.seed)},
                     {"workers", std::to_string(a.workers)},
                     {"renormalize", a.renormalize ? "1" : "0"},
                     {"no_resample", a.no_resample ? "1" : "0"},
                     {"keep_duplicates", a.keep_duplicates ? "1" : "0"}});
  double final_loss = result.records.empty()
                          ? 0.0
                          : result.records.back().loss;
  std::cout << "trained " << a.steps << " steps on "
            << corpus.utterances.size() << " utterances; final loss "
            << fmt_double(final_loss) << "; skipped "
            << result.skipped_total << "\n";
  return 0;
}

struct DecodeArgs {
  std::string corpus;
  std::string params;
  std::string out;
  std::string strategy = "tkm";
  int32_t K = 8;
  int32_t n = 4;
  double temperature = 1.0;
  int32_t decode_K = 8;
  int32_t decode_beam = 8;
  uint64_t seed = 0;
  int32_t workers = 1;
  bool renormalize = false;
};

int run_decode(const DecodeArgs& a) {
  ctcmarg::MarginalConfig mcfg = make_marginal_config(
      a.strategy, a.K, a.n, a.temperature, a.decode_K, a.decode_beam,
      a.renormalize, false, false);
  if (a.decode_K < 1 || a.decode_beam < 1)
    throw ctcmarg::ConfigError("decode pool sizes must be >= 1");
  if (a.workers < 1) throw ctcmarg::ConfigError("workers must be >= 1");

  ctcmarg::Corpus corpus = ctcmarg::load_corpus(a.corpus);
  std::ifstream params_in(a.params);
  if (!params_in)
    throw ctcmarg::ParseError("cannot open params file " + a.params);
  ctcmarg::ScorerParams params = ctcmarg::read_scorer_params(params_in);
  if (params.num_phonemes() != corpus.phonemes.size() ||
      params.num_letters() != corpus.graphemes.num_letters())
    throw ctcmarg::VocabMismatch("params shape does not match corpus vocab");

  const size_t N = corpus.utterances.size();
  std::vector<ctcmarg::ScoredSeq> hyps(N);
  std::vector<double> wall_ms(N);
  ctcmarg::parallel_for(
      static_cast<int64_t>(N), a.workers, [&](int64_t i) {
        const ctcmarg::Utterance& utt = corpus.utterances[i];
        auto start = std::chrono::steady_clock::now();
        ctcmarg::CandidateSet base =
            mcfg.strategy == ctcmarg::Strategy::kSkm
                ? ctcmarg::CandidateSet{}
                : ctcmarg::base_candidates(utt.lattice, mcfg);
        ctcmarg::Rng rng =
            ctcmarg::Rng(a.seed).child(static_cast<uint64_t>(i));
        ctcmarg::CandidateSet set =
            ctcmarg::draw_candidates(utt.lattice, mcfg, rng, base);
        hyps[i] = ctcmarg::decode(set, params, mcfg.decode_K,
                                  mcfg.decode_beam, a.renormalize);
        wall_ms[i] = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();
      });

  fs::create_directories(a.out);
  {
    std::ofstream out(fs::path(a.out) / "hyps.tsv");
    for (size_t i = 0; i < N; ++i) {
      out << corpus.utterances[i].id << '\t'
          << ctcmarg::join_symbols(hyps[i].graphemes, corpus.graphemes)
          << '\t' << fmt_double(hyps[i].logprob) << '\n';
    }
  }
  {
    std::ofstream out(fs::path(a.out) / "timing.tsv");
    for (size_t i = 0; i < N; ++i) {
      const ctcmarg::Utterance& utt = corpus.utterances[i];
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.3f", wall_ms[i]);
      out << utt.id << '\t' << utt.lattice.num_frames() << '\t'
          << fmt_double(utt.lattice.frame_shift_ms()) << '\t' << buf << '\n';
    }
  }
  write_config_echo(a.out, {{"subcommand", "decode"},
                            {"corpus", a.corpus},
                            {"params", a.params},
                            {"out", a.out},
                            {"strategy", a.strategy},
                            {"K", std::to_string(a.K)},
                            {"n", std::to_string(a.n)},
                            {"temperature", fmt_double(a.temperature)},
                            {"decode_K", std::to_string(a.decode_K)},
                            {"decode_beam", std::to_string(a.decode_beam)},
                            {"seed", std::to_string(a.seed)},
                            {"workers", std::to_string(a.workers)},
                            {"renormalize", a.renormalize ? "1" : "0"}});
  std::cout << "decoded " << N << " utterances to " << a.out << "\n";
  return 0;
}

struct EvalArgs {
  std::string corpus;
  std::string hyps;
  std::string hyps_b;
  std::string timing;
  std::string out;
  uint64_t seed = 0;
  int32_t resamples = 10000;
};

std::map<std::string, ctcmarg::GraphemeSeq> read_hyps(
    const std::string& path, const ctcmarg::GraphemeVocab& vocab) {
  std::ifstream in(path);
  if (!in) throw ctcmarg::ParseError("cannot open hypotheses file " + path);
  std::map<std::string, ctcmarg::GraphemeSeq> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string id, text, score;
    if (!std::getline(row, id, '\t') || !std::getline(row, text, '\t'))
      throw ctcmarg::ParseError(path + ": malformed line '" + line + "'");
    std::getline(row, score, '\t');
    if (!out.emplace(id, ctcmarg::parse_symbols(text, vocab)).second)
      throw ctcmarg::ParseError(path + ": duplicate utterance id " + id);
  }
  return out;
}

int run_eval(const EvalArgs& a) {
  if (a.resamples < 1) throw ctcmarg::ConfigError("resamples must be >= 1");
  ctcmarg::Corpus corpus = ctcmarg::load_corpus(a.corpus);
  auto hyps = read_hyps(a.hyps, corpus.graphemes);

  std::vector<std::pair<ctcmarg::GraphemeSeq, ctcmarg::GraphemeSeq>> pairs;
  std::vector<double> errors_a;
  for (const auto& utt : corpus.utterances) {
    auto it = hyps.find(utt.id);
    if (it == hyps.end())
      throw ctcmarg::LengthMismatch("no hypothesis for utterance " + utt.id);
    pairs.emplace_back(utt.reference, it->second);
    errors_a.push_back(static_cast<double>(
        ctcmarg::edit_distance(utt.reference, it->second).distance));
  }
  if (hyps.size() != corpus.utterances.size())
    throw ctcmarg::LengthMismatch("hypotheses cover unknown utterances");

  ctcmarg::EvalReport report = ctcmarg::corpus_wer(pairs);

  if (!a.hyps_b.empty()) {
    auto hyps_b = read_hyps(a.hyps_b, corpus.graphemes);
    std::vector<double> errors_b;
    for (const auto& utt : corpus.utterances) {
      auto it = hyps_b.find(utt.id);
      if (it == hyps_b.end())
        throw ctcmarg::LengthMismatch("second system misses utterance " +
                                      utt.id);
      errors_b.push_back(static_cast<double>(
          ctcmarg::edit_distance(utt.reference, it->second).distance));
    }
    if (hyps_b.size() != corpus.utterances.size())
      throw ctcmarg::LengthMismatch(
          "second system covers unknown utterances");
    report.p_value =
        ctcmarg::significance(errors_a, errors_b, a.seed, a.resamples);
  }

  if (!a.timing.empty()) {
    std::ifstream in(a.timing);
    if (!in) throw ctcmarg::ParseError("cannot open timing file " + a.timing);
    std::string line;
    double wall_s = 0.0;
    int64_t frames = 0;
    double shift_ms = -1.0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream row(line);
      std::string id;
      int64_t f = 0;
      double shift = 0.0, ms = 0.0;
      if (!std::getline(row, id, '\t') || !(row >> f >> shift >> ms))
        throw ctcmarg::ParseError(a.timing + ": malformed line '" + line +
                                  "'");
      frames += f;
      wall_s += ms / 1000.0;
      shift_ms = shift;
    }
    report.rtf = ctcmarg::rtf(wall_s, frames, shift_ms);
  }

  fs::create_directories(a.out);
  {
    std::ofstream out(fs::path(a.out) / "report.tsv");
    ctcmarg::write_report_tsv(out, report);
  }
  write_config_echo(a.out, {{"subcommand", "eval"},
                            {"corpus", a.corpus},
                            {"hyps", a.hyps},
                            {"hyps_b", a.hyps_b},
                            {"timing", a.timing},
                            {"out", a.out},
                            {"seed", std::to_string(a.seed)},
                            {"resamples", std::to_string(a.resamples)}});
  std::cout << ctcmarg::format_report(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phoneme-lattice candidate marginalization pipeline"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read flags from a key=value file");

  GenArgs gen;
  CLI::App* cmd_gen =
      app.add_subcommand("gen", "Synthesize a corpus directory");
  cmd_gen->add_option("--out", gen.out, "Corpus output directory")
      ->required();
  cmd_gen->add_option("--count", gen.count, "Number of utterances")
      ->required();
  cmd_gen->add_option("--seed", gen.seed, "Generator seed");
  cmd_gen->add_option("--noise", gen.noise, "Lattice noise in [0,1)");
  cmd_gen->add_option("--phonemes", gen.phonemes, "Phoneme inventory size");
  cmd_gen->add_option("--letters", gen.letters, "Grapheme inventory size");
  cmd_gen->add_option("--ambiguous", gen.ambiguous,
                      "Letters with a second rendering");
  cmd_gen->add_option("--min-len", gen.min_len, "Shortest utterance");
  cmd_gen->add_option("--max-len", gen.max_len, "Longest utterance");
  cmd_gen->add_option("--fpp", gen.fpp, "Frames per phoneme");
  cmd_gen->add_option("--frame-shift", gen.frame_shift,
                      "Frame shift in milliseconds");

  TrainArgs train;
  CLI::App* cmd_train =
      app.add_subcommand("train", "Fit scorer parameters on a corpus");
  cmd_train->add_option("--corpus", train.corpus, "Corpus directory")
      ->required();
  cmd_train->add_option("--out", train.out, "Run output directory")
      ->required();
  cmd_train
      ->add_option("--strategy", train.strategy,
                   "Candidate strategy: tkm | randomized_tkm | skm")
      ->required();
  cmd_train->add_option("--K", train.K, "Candidate budget");
  cmd_train->add_option("--n", train.n, "Randomized subset size");
  cmd_train->add_option("--temperature", train.temperature,
                        "Sampling temperature");
  cmd_train->add_option("--lr", train.lr, "Learning rate");
  cmd_train->add_option("--batch", train.batch, "Batch size");
  cmd_train->add_option("--steps", train.steps, "Training steps");
  cmd_train->add_option("--clip", train.clip, "Gradient norm clip");
  cmd_train->add_option("--log-every", train.log_every,
                        "Loss record interval");
  cmd_train->add_option("--seed", train.seed, "Training seed");
  cmd_train->add_option("--workers", train.workers, "Worker threads");
  cmd_train->add_flag("--renormalize", train.renormalize,
                      "Normalize candidate weights within each set");
  cmd_train->add_flag("--no-resample", train.no_resample,
                      "Freeze each utterance's first candidate draw");
  cmd_train->add_flag("--keep-duplicates", train.keep_duplicates,
                      "Keep duplicate sampled candidates as repeats");

  DecodeArgs dec;
  CLI::App* cmd_decode =
      app.add_subcommand("decode", "Decode a corpus with trained params");
  cmd_decode->add_option("--corpus", dec.corpus, "Corpus directory")
      ->required();
  cmd_decode->add_option("--params", dec.params, "Scorer params file")
      ->required();
  cmd_decode->add_option("--out", dec.out, "Run output directory")
      ->required();
  cmd_decode->add_option("--strategy", dec.strategy,
                         "Candidate strategy: tkm | randomized_tkm | skm");
  cmd_decode->add_option("--K", dec.K, "Candidate budget");
  cmd_decode->add_option("--n", dec.n, "Randomized subset size");
  cmd_decode->add_option("--temperature", dec.temperature,
                         "Sampling temperature");
  cmd_decode->add_option("--decode-K", dec.decode_K,
                         "Candidates seeding the hypothesis pool");
  cmd_decode->add_option("--decode-beam", dec.decode_beam,
                         "Per-candidate hypothesis beam width");
  cmd_decode->add_option("--seed", dec.seed, "Decode seed");
  cmd_decode->add_option("--workers", dec.workers, "Worker threads");
  cmd_decode->add_flag("--renormalize", dec.renormalize,
                       "Normalize candidate weights within each set");

  EvalArgs ev;
  CLI::App* cmd_eval =
      app.add_subcommand("eval", "Score hypotheses against references");
  cmd_eval->add_option("--corpus", ev.corpus, "Corpus directory")
      ->required();
  cmd_eval->add_option("--hyps", ev.hyps, "Hypotheses file")->required();
  cmd_eval->add_option("--hyps-b", ev.hyps_b,
                       "Second system for significance testing");
  cmd_eval->add_option("--timing", ev.timing, "Decode timing file for RTF");
  cmd_eval->add_option("--out", ev.out, "Run output directory")->required();
  cmd_eval->add_option("--seed", ev.seed, "Bootstrap seed");
  cmd_eval->add_option("--resamples", ev.resamples, "Bootstrap resamples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (cmd_gen->parsed()) return run_gen(gen);
    if (cmd_train->parsed()) return run_train(train);
    if (cmd_decode->parsed()) return run_decode(dec);
    if (cmd_eval->parsed()) return run_eval(ev);
    std::cerr << "no subcommand given\n";
    return 2;
  } catch (const ctcmarg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ctcmarg::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
