#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ovsc/error.hpp"
#include "ovsc/ingest.hpp"
#include "ovsc/overlap_decode.hpp"
#include "ovsc/pipeline.hpp"
#include "ovsc/report.hpp"
#include "ovsc/scoring.hpp"
#include "ovsc/synth.hpp"

namespace ovsc::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct GlobalOptions {
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string log_level = "warn";
};

struct DiarizeOptions {
  std::string embeddings;
  std::string overlap_flags;
  std::string out;
  std::string report;
  std::string dump_dir;
  std::string p_range = "2:20";
  int max_speakers = 10;
  std::optional<int> num_speakers;
  int max_iters = 100;
  double tol = 1e-6;
  int restarts = 3;
};

struct DetectOptions {
  std::string posteriors;
  std::optional<double> frame_shift;
  std::string segments;
  std::string out;
  std::string lab;
  double min_silence = 0.01;
  std::string max_silence = "none";
  double min_single = 0.03;
  std::string max_single = "10";
  double min_overlap = 0.1;
  std::string max_overlap = "5";
  double bias_silence = 1.0;
  double bias_single = 1.0;
  double bias_overlap = 1.0;
};

struct ScoreOptions {
  std::string ref;
  std::string hyp;
  double collar = 0.0;
  std::string json_out;
};

struct SynthOptions {
  int speakers = 4;
  int segments = 80;
  double overlap_frac = 0.0;
  double sigma = 0.1;
  std::optional<double> overlap_sigma;
  int dim = 32;
  double min_angle = 45.0;
  std::string recording_id = "synth";
  std::string out_dir;
};

void init_logging(const std::string& level) {
  auto logger = spdlog::get("ovsc");
  if (!logger) {
    logger = spdlog::stderr_color_mt("ovsc");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
  }
  spdlog::set_level(spdlog::level::from_str(level));
}

void print_manifest(std::ostream& err, const std::string& command, const GlobalOptions& g,
                    json config) {
  const json manifest = {{"version", OVSC_VERSION},
                         {"command", command},
                         {"seed", g.seed},
                         {"jobs", g.jobs},
                         {"config", std::move(config)}};
  err << "manifest " << manifest.dump() << '\n';
}

std::pair<int, int> parse_p_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("--p-range must look like MIN:MAX");
  try {
    std::size_t used_lo = 0;
    std::size_t used_hi = 0;
    const int lo = std::stoi(text.substr(0, colon), &used_lo);
    const int hi = std::stoi(text.substr(colon + 1), &used_hi);
    if (used_lo != colon || used_hi != text.size() - colon - 1) throw std::invalid_argument(text);
    if (lo < 1 || lo > hi) throw ConfigError("--p-range needs 1 <= MIN <= MAX");
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw ConfigError("--p-range must look like MIN:MAX, got '" + text + "'");
  }
}

std::optional<double> parse_bound(const std::string& name, const std::string& text) {
  if (text == "none" || text == "inf") return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError(name + " must be a number of seconds or 'none', got '" + text + "'");
  }
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

void write_text(const fs::path& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

// Runs task(i) for i in [0, n) on up to `jobs` threads. Results are written by
// index, so the outcome does not depend on scheduling. The first exception in
// index order is rethrown.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& task) {
  std::vector<std::exception_ptr> errors(n);
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          task(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string fixed1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

int run_diarize(const DiarizeOptions& o, const GlobalOptions& g, std::ostream& out,
                std::ostream& err) {
  DiarizeConfig cfg;
  std::tie(cfg.count.p_min, cfg.count.p_max) = parse_p_range(o.p_range);
  cfg.count.max_speakers = o.max_speakers;
  cfg.num_speakers = o.num_speakers;
  cfg.discretize.max_iters = o.max_iters;
  cfg.discretize.tol = o.tol;
  cfg.discretize.restarts = o.restarts;
  cfg.discretize.seed = g.seed;
  if (o.max_speakers < 1) throw ConfigError("--max-speakers must be >= 1");
  if (o.max_iters < 1) throw ConfigError("--max-iters must be >= 1");
  if (o.restarts < 1) throw ConfigError("--restarts must be >= 1");
  if (!(o.tol >= 0.0)) throw ConfigError("--tol must be >= 0");

  print_manifest(err, "diarize", g,
                 {{"embeddings", o.embeddings},
                  {"overlap_flags", o.overlap_flags.empty() ? json() : json(o.overlap_flags)},
                  {"out", o.out},
                  {"p_min", cfg.count.p_min},
                  {"p_max", cfg.count.p_max},
                  {"max_speakers", cfg.count.max_speakers},
                  {"num_speakers", o.num_speakers ? json(*o.num_speakers) : json()},
                  {"max_iters", cfg.discretize.max_iters},
                  {"tol", cfg.discretize.tol},
                  {"restarts", cfg.discretize.restarts}});

  const auto all = load_embeddings(o.embeddings);
  OverlapVector flags = OverlapVector::zeros(all.size());
  if (!o.overlap_flags.empty()) {
    const auto file_flags = load_overlap_flags(o.overlap_flags);
    if (file_flags.size() != all.size()) {
      throw ContractError("'" + o.overlap_flags + "' has " + std::to_string(file_flags.size()) +
                          " flags but '" + o.embeddings + "' has " +
                          std::to_string(all.size()) + " segments");
    }
    flags = align_flags(file_flags, all.spans);
  }

  const auto recordings = split_by_recording(all);
  std::vector<OverlapVector> per_rec(recordings.size());
  std::size_t offset = 0;
  for (std::size_t r = 0; r < recordings.size(); ++r) {
    const auto n = recordings[r].size();
    per_rec[r].flags.assign(flags.flags.begin() + static_cast<std::ptrdiff_t>(offset),
                            flags.flags.begin() + static_cast<std::ptrdiff_t>(offset + n));
    offset += n;
  }

  std::vector<DiarizeResult> results(recordings.size());
  parallel_for(recordings.size(), g.jobs, [&](std::size_t r) {
    results[r] = diarize_recording(recordings[r], per_rec[r], cfg);
  });

  std::vector<Timeline> hyps;
  for (const auto& res : results) hyps.push_back(res.hypothesis);
  ensure_parent(o.out);
  write_rttm(hyps, o.out);

  if (!o.report.empty()) {
    json report = json::array();
    for (const auto& res : results) report.push_back(to_json(res));
    write_text(o.report, report.dump(2) + "\n");
  }
  if (!o.dump_dir.empty()) {
    fs::create_directories(o.dump_dir);
    for (const auto& res : results) {
      const auto base = fs::path(o.dump_dir) / res.recording_id;
      write_csv(res.affinity.raw, base.string() + "_affinity.csv");
      write_csv(res.affinity.binarized, base.string() + "_binarized.csv");
      write_csv(res.affinity.laplacian, base.string() + "_laplacian.csv");
    }
  }

  json summary = json::array();
  out << "recording\tsegments\toverlaps\tspeakers\tp\tphi\n";
  for (const auto& res : results) {
    const auto& a = res.discretization.assignment;
    out << res.recording_id << '\t' << a.rows() << '\t' << a.overlap.count() << '\t' << res.k
        << '\t' << res.affinity.p << '\t' << res.discretization.phi << '\n';
    summary.push_back({{"recording_id", res.recording_id},
                       {"segments", a.rows()},
                       {"overlap_segments", a.overlap.count()},
                       {"num_speakers", res.k},
                       {"p", res.affinity.p},
                       {"phi", res.discretization.phi}});
  }
  out << json{{"recordings", summary}}.dump() << '\n';
  return kSuccess;
}

int run_detect(const DetectOptions& o, const GlobalOptions& g, std::ostream& out,
               std::ostream& err) {
  DurationConfig dur;
  dur.min_silence = o.min_silence;
  dur.max_silence = parse_bound("--max-silence", o.max_silence);
  dur.min_single = o.min_single;
  dur.max_single = parse_bound("--max-single", o.max_single);
  dur.min_overlap = o.min_overlap;
  dur.max_overlap = parse_bound("--max-overlap", o.max_overlap);
  dur.bias = {o.bias_silence, o.bias_single, o.bias_overlap};
  dur.validate();
  if (!o.out.empty() && o.segments.empty()) {
    throw ConfigError("--out needs --segments to align flags with");
  }
  if (o.frame_shift && !(*o.frame_shift > 0.0)) throw ConfigError("--frame-shift must be > 0");

  print_manifest(err, "detect-overlap", g,
                 {{"posteriors", o.posteriors},
                  {"frame_shift", o.frame_shift ? json(*o.frame_shift) : json()},
                  {"segments", o.segments},
                  {"out", o.out},
                  {"lab", o.lab},
                  {"durations", to_json(dur)}});

  auto post = load_posteriors(o.posteriors);
  if (o.frame_shift) {
    if (std::abs(*o.frame_shift - post.frame_shift) > 1e-12) {
      spdlog::warn("detect-overlap: frame shift {} overrides {} from '{}'", *o.frame_shift,
                   post.frame_shift, o.posteriors);
    }
    post.frame_shift = *o.frame_shift;
  }
  const auto decoded = viterbi_decode(post, dur);
  const auto regions = overlap_regions(decoded.labels);

  json summary = {{"frames", post.frames()},
                  {"frame_shift", post.frame_shift},
                  {"score", decoded.score},
                  {"overlap_regions", regions.size()}};
  out << "frames\toverlap_regions\toverlap_seconds";
  double overlap_seconds = 0.0;
  for (const auto& [s, e] : regions) overlap_seconds += e - s;
  summary["overlap_seconds"] = overlap_seconds;

  std::optional<std::size_t> flagged;
  if (!o.segments.empty()) {
    const auto spans = load_segments(o.segments);
    for (const auto& s : spans) {
      if (s.recording_id != spans.front().recording_id) {
        throw ContractError("'" + o.segments + "' lists several recordings; detect-overlap " +
                            "decodes one recording at a time");
      }
    }
    if (!post.recording_id.empty() && !spans.empty() &&
        spans.front().recording_id != post.recording_id) {
      spdlog::warn("detect-overlap: posteriors are for '{}' but segments are for '{}'",
                   post.recording_id, spans.front().recording_id);
    }
    const auto flags = frames_to_flags(decoded.labels, spans);
    flagged = flags.count();
    summary["flagged_segments"] = *flagged;
    if (!o.out.empty()) {
      ensure_parent(o.out);
      write_overlap_flags(flags_to_file_order(flags, spans), o.out);
    }
  }
  if (!o.lab.empty()) {
    std::string text;
    char line[96];
    for (const auto& [s, e] : regions) {
      std::snprintf(line, sizeof line, "%.3f\t%.3f\toverlap\n", s, e);
      text += line;
    }
    write_text(o.lab, text);
  }

  if (flagged) out << "\tflagged_segments";
  out << '\n' << post.frames() << '\t' << regions.size() << '\t' << overlap_seconds;
  if (flagged) out << '\t' << *flagged;
  out << '\n' << summary.dump() << '\n';
  return kSuccess;
}

int run_score(const ScoreOptions& o, const GlobalOptions& g, std::ostream& out,
              std::ostream& err) {
  if (!(o.collar >= 0.0)) throw ConfigError("--collar must be >= 0");
  print_manifest(err, "score", g, {{"ref", o.ref}, {"hyp", o.hyp}, {"collar", o.collar}});

  const auto refs = load_rttm(o.ref);
  const auto hyps = load_rttm(o.hyp);
  std::map<std::string, const Timeline*> hyp_by_id;
  for (const auto& h : hyps) hyp_by_id.emplace(h.recording_id, &h);

  std::vector<std::pair<Timeline, Timeline>> pairs;
  for (const auto& r : refs) {
    const auto it = hyp_by_id.find(r.recording_id);
    Timeline h{r.recording_id, {}};
    if (it == hyp_by_id.end()) {
      spdlog::warn("score: no hypothesis for recording '{}'", r.recording_id);
    } else {
      h = *it->second;
      hyp_by_id.erase(it);
    }
    pairs.emplace_back(r, std::move(h));
  }
  for (const auto& h : hyps) {
    if (hyp_by_id.contains(h.recording_id)) {
      spdlog::warn("score: recording '{}' has no reference; all of it is false alarm",
                   h.recording_id);
      pairs.emplace_back(Timeline{h.recording_id, {}}, h);
    }
  }

  std::vector<DerCounts> counts(pairs.size());
  parallel_for(pairs.size(), g.jobs, [&](std::size_t i) {
    counts[i] = der_counts(pairs[i].first, pairs[i].second, o.collar);
  });

  DerCounts total;
  for (const auto& c : counts) total += c;
  const auto overall = total.breakdown();

  json per_rec = json::array();
  out << "recording\tMS\tFA\tConf\tDER\n";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (counts[i].reference <= 0.0) continue;
    const auto b = counts[i].breakdown();
    out << pairs[i].first.recording_id << '\t' << fixed1(b.missed) << '\t'
        << fixed1(b.false_alarm) << '\t' << fixed1(b.confusion) << '\t' << fixed1(b.der) << '\n';
    auto j = to_json(b);
    j["recording_id"] = pairs[i].first.recording_id;
    per_rec.push_back(std::move(j));
  }
  out << "OVERALL\t" << fixed1(overall.missed) << '\t' << fixed1(overall.false_alarm) << '\t'
      << fixed1(overall.confusion) << '\t' << fixed1(overall.der) << '\n';
  auto j = to_json(overall);
  j["collar"] = o.collar;
  j["recordings"] = std::move(per_rec);
  out << j.dump() << '\n';
  if (!o.json_out.empty()) write_text(o.json_out, j.dump(2) + "\n");
  return kSuccess;
}

int run_synth(const SynthOptions& o, const GlobalOptions& g, std::ostream& out,
              std::ostream& err) {
  SynthConfig cfg;
  cfg.n_speakers = o.speakers;
  cfg.n_segments = o.segments;
  cfg.overlap_fraction = o.overlap_frac;
  cfg.noise_sigma = o.sigma;
  cfg.overlap_sigma = o.overlap_sigma;
  cfg.dim = o.dim;
  cfg.min_centroid_angle = o.min_angle;
  cfg.seed = g.seed;
  cfg.recording_id = o.recording_id;
  cfg.validate();

  print_manifest(err, "synth", g,
                 {{"speakers", cfg.n_speakers},
                  {"segments", cfg.n_segments},
                  {"overlap_frac", cfg.overlap_fraction},
                  {"sigma", cfg.noise_sigma},
                  {"overlap_sigma", cfg.overlap_sigma ? json(*cfg.overlap_sigma) : json()},
                  {"dim", cfg.dim},
                  {"min_angle", cfg.min_centroid_angle},
                  {"recording_id", cfg.recording_id},
                  {"out_dir", o.out_dir}});

  const auto conv = generate(cfg);
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  save_embeddings(conv.embeddings, dir / "embeddings.txt");
  write_overlap_flags(flags_to_file_order(conv.overlap, conv.embeddings.spans),
                      dir / "flags.txt");
  write_rttm(conv.reference, dir / "reference.rttm");

  out << "segments\toverlaps\tspeakers\tdim\n"
      << conv.embeddings.size() << '\t' << conv.overlap.count() << '\t' << cfg.n_speakers << '\t'
      << cfg.dim << '\n';
  out << json{{"out_dir", dir.string()},
              {"segments", conv.embeddings.size()},
              {"overlap_segments", conv.overlap.count()},
              {"speakers", cfg.n_speakers},
              {"dim", cfg.dim},
              {"seed", cfg.seed}}
             .dump()
      << '\n';
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Overlap-aware spectral clustering for speaker diarization", "ovsc"};
  app.set_version_flag("--version", OVSC_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads for multi-recording input")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--log-level", g.log_level, "Log verbosity")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}))
      ->capture_default_str();

  DiarizeOptions d;
  auto* diarize = app.add_subcommand("diarize", "Cluster segment embeddings into an RTTM");
  diarize->add_option("--embeddings", d.embeddings, "Embeddings file")->required();
  diarize->add_option("--overlap-flags", d.overlap_flags, "0/1 overlap flag per segment");
  diarize->add_option("--out", d.out, "Output RTTM")->required();
  diarize->add_option("--report", d.report, "Write a JSON diagnostics report");
  diarize->add_option("--dump-dir", d.dump_dir, "Write affinity matrices as CSV");
  diarize->add_option("--p-range", d.p_range, "Binarization sweep MIN:MAX")
      ->capture_default_str();
  diarize->add_option("--max-speakers", d.max_speakers)->capture_default_str();
  diarize->add_option("--num-speakers", d.num_speakers, "Skip counting and use this many");
  diarize->add_option("--max-iters", d.max_iters)->capture_default_str();
  diarize->add_option("--tol", d.tol)->capture_default_str();
  diarize->add_option("--restarts", d.restarts)->capture_default_str();

  DetectOptions t;
  auto* detect = app.add_subcommand("detect-overlap", "Decode frame posteriors into overlap flags");
  detect->add_option("--posteriors", t.posteriors, "Posteriors file")->required();
  detect->add_option("--frame-shift", t.frame_shift, "Override the file's frame shift");
  detect->add_option("--segments", t.segments, "Segments to flag (embeddings format)");
  detect->add_option("--out", t.out, "Output flags file");
  detect->add_option("--lab", t.lab, "Write overlap regions as start/end lines");
  detect->add_option("--min-silence", t.min_silence)->capture_default_str();
  detect->add_option("--max-silence", t.max_silence, "Seconds or 'none'")->capture_default_str();
  detect->add_option("--min-single", t.min_single)->capture_default_str();
  detect->add_option("--max-single", t.max_single, "Seconds or 'none'")->capture_default_str();
  detect->add_option("--min-overlap", t.min_overlap)->capture_default_str();
  detect->add_option("--max-overlap", t.max_overlap, "Seconds or 'none'")->capture_default_str();
  detect->add_option("--bias-silence", t.bias_silence)->capture_default_str();
  detect->add_option("--bias-single", t.bias_single)->capture_default_str();
  detect->add_option("--bias-overlap", t.bias_overlap)->capture_default_str();

  ScoreOptions s;
  auto* score = app.add_subcommand("score", "Diarization error rate of a hypothesis RTTM");
  score->add_option("--ref", s.ref, "Reference RTTM")->required();
  score->add_option("--hyp", s.hyp, "Hypothesis RTTM")->required();
  score->add_option("--collar", s.collar, "Seconds excluded around reference boundaries")
      ->capture_default_str();
  score->add_option("--json", s.json_out, "Also write the JSON result to a file");

  SynthOptions y;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic conversation");
  synth->add_option("--speakers", y.speakers)->capture_default_str();
  synth->add_option("--segments", y.segments)->capture_default_str();
  synth->add_option("--overlap-frac", y.overlap_frac)->capture_default_str();
  synth->add_option("--sigma", y.sigma)->capture_default_str();
  synth->add_option("--overlap-sigma", y.overlap_sigma, "Noise for overlapped segments");
  synth->add_option("--dim", y.dim)->capture_default_str();
  synth->add_option("--min-angle", y.min_angle, "Minimum centroid angle in degrees")
      ->capture_default_str();
  synth->add_option("--recording-id", y.recording_id)->capture_default_str();
  synth->add_option("--out-dir", y.out_dir)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  init_logging(g.log_level);
  try {
    if (*diarize) return run_diarize(d, g, out, err);
    if (*detect) return run_detect(t, g, out, err);
    if (*score) return run_score(s, g, out, err);
    return run_synth(y, g, out, err);
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
}

}  // namespace ovsc::cli
