#include "ovsc/ingest.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <optional>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

#include <spdlog/spdlog.h>

#include "ovsc/error.hpp"
#include "text.hpp"

namespace ovsc {
namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void check_written(const std::ofstream& out, const std::filesystem::path& path) {
  if (!out) throw IoError("error while writing " + path.string());
}

struct RawRow {
  SegmentSpan span;
  std::vector<double> values;
};

// Shared by load_embeddings and load_segments.
std::vector<RawRow> read_rows(const std::filesystem::path& path, bool require_vectors) {
  auto in = open_input(path);
  const auto name = path.string();
  std::vector<RawRow> rows;
  std::optional<std::size_t> declared_dim;
  std::optional<std::size_t> dim;
  std::string line;
  std::size_t lineno = 0;
  std::size_t ordinal = 0;

  while (std::getline(in, line)) {
    ++lineno;
    const auto trimmed = text::trim(line);
    if (trimmed.empty()) continue;
    if (trimmed.front() == '#') {
      const auto f = text::fields(trimmed);
      if (f.size() >= 1 && f[0] == "#dim") {
        if (f.size() != 2) throw ParseError(name, lineno, "malformed #dim header");
        const auto d = text::to_int(f[1]);
        if (!d || *d <= 0) throw ParseError(name, lineno, "invalid dimension in #dim header");
        declared_dim = static_cast<std::size_t>(*d);
      }
      continue;
    }

    std::string_view body(line);
    while (!body.empty() && (body.back() == '\r' || body.back() == '\n')) body.remove_suffix(1);
    const auto cols = text::split(body, '\t');
    if (cols.size() < 3 || (require_vectors && cols.size() != 4) || cols.size() > 4) {
      throw ParseError(name, lineno,
                       "expected 'recording<TAB>start<TAB>end<TAB>vector', got " +
                           std::to_string(cols.size()) + " tab-separated fields");
    }
    RawRow row;
    row.span.recording_id = std::string(text::trim(cols[0]));
    if (row.span.recording_id.empty()) throw ParseError(name, lineno, "empty recording id");
    const auto start = text::to_double(cols[1]);
    const auto end = text::to_double(cols[2]);
    if (!start || !end) throw ParseError(name, lineno, "start/end are not numbers");
    if (!std::isfinite(*start) || !std::isfinite(*end)) {
      throw ParseError(name, lineno, "start/end must be finite");
    }
    if (!(*end > *start)) throw ParseError(name, lineno, "non-positive segment duration");
    row.span.start = *start;
    row.span.end = *end;
    row.span.index = ordinal++;

    if (cols.size() == 4) {
      for (const auto tok : text::fields(cols[3])) {
        const auto v = text::to_double(tok);
        if (!v || !std::isfinite(*v)) {
          throw ParseError(name, lineno, "invalid vector component '" + std::string(tok) + "'");
        }
        row.values.push_back(*v);
      }
      if (require_vectors) {
        if (row.values.empty()) throw ParseError(name, lineno, "empty embedding vector");
        if (!dim) dim = declared_dim.value_or(row.values.size());
        if (row.values.size() != *dim) {
          throw ParseError(name, lineno,
                           "dimension mismatch: expected " + std::to_string(*dim) + ", got " +
                               std::to_string(row.values.size()));
        }
        double norm2 = 0.0;
        for (double v : row.values) norm2 += v * v;
        if (!(norm2 > 0.0)) throw ParseError(name, lineno, "zero-norm embedding vector");
      }
    }
    rows.push_back(std::move(row));
  }

  // Order: recording of first appearance, then (start, end), then file order.
  std::map<std::string, std::size_t> rec_order;
  for (const auto& r : rows) rec_order.emplace(r.span.recording_id, rec_order.size());
  std::stable_sort(rows.begin(), rows.end(), [&](const RawRow& a, const RawRow& b) {
    const auto ra = rec_order.at(a.span.recording_id);
    const auto rb = rec_order.at(b.span.recording_id);
    if (ra != rb) return ra < rb;
    if (a.span.start != b.span.start) return a.span.start < b.span.start;
    return a.span.end < b.span.end;
  });
  return rows;
}

}  // namespace

EmbeddingSequence load_embeddings(const std::filesystem::path& path) {
  auto rows = read_rows(path, true);
  EmbeddingSequence seq;
  if (rows.empty()) return seq;
  const auto d = rows.front().values.size();
  seq.vectors.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  seq.spans.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      seq.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i].values[j];
    }
    seq.spans.push_back(std::move(rows[i].span));
  }
  return seq;
}

std::vector<SegmentSpan> load_segments(const std::filesystem::path& path) {
  auto rows = read_rows(path, false);
  std::vector<SegmentSpan> spans;
  spans.reserve(rows.size());
  for (auto& r : rows) spans.push_back(std::move(r.span));
  return spans;
}

void save_embeddings(const EmbeddingSequence& seq, const std::filesystem::path& path) {
  if (static_cast<std::size_t>(seq.vectors.rows()) != seq.spans.size()) {
    throw ContractError("save_embeddings: span count does not match vector rows");
  }
  auto out = open_output(path);
  out << "#dim " << seq.dim() << '\n';
  for (std::size_t i = 0; i < seq.spans.size(); ++i) {
    const auto& s = seq.spans[i];
    out << s.recording_id << '\t' << text::shortest(s.start) << '\t' << text::shortest(s.end)
        << '\t';
    for (Eigen::Index j = 0; j < seq.vectors.cols(); ++j) {
      if (j) out << ' ';
      out << text::shortest(seq.vectors(static_cast<Eigen::Index>(i), j));
    }
    out << '\n';
  }
  check_written(out, path);
}

std::vector<EmbeddingSequence> split_by_recording(const EmbeddingSequence& seq) {
  std::vector<EmbeddingSequence> out;
  std::size_t i = 0;
  while (i < seq.spans.size()) {
    auto j = i;
    while (j < seq.spans.size() && seq.spans[j].recording_id == seq.spans[i].recording_id) ++j;
    EmbeddingSequence part;
    part.spans.assign(seq.spans.begin() + static_cast<std::ptrdiff_t>(i),
                      seq.spans.begin() + static_cast<std::ptrdiff_t>(j));
    part.vectors = seq.vectors.middleRows(static_cast<Eigen::Index>(i),
                                          static_cast<Eigen::Index>(j - i));
    out.push_back(std::move(part));
    i = j;
  }
  return out;
}

OverlapVector load_overlap_flags(const std::filesystem::path& path) {
  auto in = open_input(path);
  OverlapVector flags;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t == "0") {
      flags.flags.push_back(0);
    } else if (t == "1") {
      flags.flags.push_back(1);
    } else {
      throw ParseError(path.string(), lineno, "overlap flag must be 0 or 1");
    }
  }
  return flags;
}

void write_overlap_flags(const OverlapVector& flags, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (auto f : flags.flags) out << (f ? '1' : '0') << '\n';
  check_written(out, path);
}

OverlapVector align_flags(const OverlapVector& file_order, const std::vector<SegmentSpan>& spans) {
  if (file_order.size() != spans.size()) {
    throw ContractError("overlap flags have " + std::to_string(file_order.size()) +
                        " rows but there are " + std::to_string(spans.size()) + " segments");
  }
  OverlapVector out = OverlapVector::zeros(spans.size());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (spans[i].index >= file_order.size()) {
      throw ContractError("segment index out of range while aligning overlap flags");
    }
    out.flags[i] = file_order.flags[spans[i].index];
  }
  return out;
}

OverlapVector flags_to_file_order(const OverlapVector& span_order,
                                  const std::vector<SegmentSpan>& spans) {
  if (span_order.size() != spans.size()) {
    throw ContractError("flags_to_file_order: size mismatch");
  }
  OverlapVector out = OverlapVector::zeros(spans.size());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (spans[i].index >= spans.size()) {
      throw ContractError("flags_to_file_order: segment index out of range");
    }
    out.flags[spans[i].index] = span_order.flags[i];
  }
  return out;
}

FramePosteriors load_posteriors(const std::filesystem::path& path) {
  auto in = open_input(path);
  const auto name = path.string();
  FramePosteriors post;
  bool have_shift = false;
  std::vector<std::array<double, 3>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = text::trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      const auto f = text::fields(t);
      if (!f.empty() && f[0] == "#frame_shift") {
        const auto s = f.size() == 2 ? text::to_double(f[1]) : std::nullopt;
        if (!s || !(*s > 0.0)) throw ParseError(name, lineno, "invalid #frame_shift header");
        post.frame_shift = *s;
        have_shift = true;
      } else if (!f.empty() && f[0] == "#recording" && f.size() == 2) {
        post.recording_id = std::string(f[1]);
      }
      continue;
    }
    const auto f = text::fields(t);
    if (f.size() != 3) {
      throw ParseError(name, lineno, "expected 3 posteriors, got " + std::to_string(f.size()));
    }
    std::array<double, 3> row{};
    double sum = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      const auto v = text::to_double(f[c]);
      if (!v || !std::isfinite(*v) || *v < 0.0) {
        throw ParseError(name, lineno, "posteriors must be finite and non-negative");
      }
      row[c] = *v;
      sum += *v;
    }
    if (std::abs(sum - 1.0) > 1e-4) {
      throw ParseError(name, lineno, "posteriors sum to " + text::shortest(sum) + ", not 1");
    }
    rows.push_back(row);
  }
  if (!have_shift) throw ParseError(name, 0, "missing #frame_shift header");
  post.rows.resize(static_cast<Eigen::Index>(rows.size()), 3);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (int c = 0; c < 3; ++c) post.rows(static_cast<Eigen::Index>(t), c) = rows[t][c];
  }
  return post;
}

void write_posteriors(const FramePosteriors& post, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "#frame_shift " << text::shortest(post.frame_shift) << '\n';
  if (!post.recording_id.empty()) out << "#recording " << post.recording_id << '\n';
  for (Eigen::Index t = 0; t < post.rows.rows(); ++t) {
    out << text::shortest(post.rows(t, 0)) << ' ' << text::shortest(post.rows(t, 1)) << ' '
        << text::shortest(post.rows(t, 2)) << '\n';
  }
  check_written(out, path);
}

std::vector<Timeline> load_rttm(const std::filesystem::path& path) {
  auto in = open_input(path);
  const auto name = path.string();
  std::vector<Timeline> out;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = text::trim(line);
    if (t.empty() || t.starts_with(";;") || t.front() == '#') continue;
    const auto f = text::fields(t);
    if (f[0] != "SPEAKER") continue;
    if (f.size() != 10) {
      throw ParseError(name, lineno,
                       "SPEAKER record needs 10 fields, got " + std::to_string(f.size()));
    }
    const auto onset = text::to_double(f[3]);
    const auto dur = text::to_double(f[4]);
    if (!onset || !dur || !std::isfinite(*onset) || !std::isfinite(*dur)) {
      throw ParseError(name, lineno, "onset/duration are not numbers");
    }
    if (*dur < 0.0) throw ParseError(name, lineno, "negative duration");
    const std::string rec(f[1]);
    auto [it, inserted] = index.emplace(rec, out.size());
    if (inserted) out.push_back(Timeline{rec, {}});
    if (*dur == 0.0) {
      spdlog::debug("{}:{}: dropping zero-length SPEAKER record", name, lineno);
      continue;
    }
    out[it->second].entries.push_back(Interval{std::string(f[7]), *onset, *onset + *dur});
  }
  for (auto& tl : out) tl = normalize_timeline(std::move(tl));
  return out;
}

std::string format_rttm(const Timeline& timeline) {
  auto entries = timeline.entries;
  std::stable_sort(entries.begin(), entries.end(), [](const Interval& a, const Interval& b) {
    if (a.start != b.start) return a.start < b.start;
    return a.speaker < b.speaker;
  });
  const auto& rec = timeline.recording_id.empty() ? std::string("rec") : timeline.recording_id;
  std::string out;
  char buf[64];
  for (const auto& e : entries) {
    out += "SPEAKER ";
    out += rec;
    std::snprintf(buf, sizeof buf, " 1 %.3f %.3f", e.start, e.end - e.start);
    out += buf;
    out += " <NA> <NA> ";
    out += e.speaker;
    out += " <NA> <NA>\n";
  }
  return out;
}

void write_rttm(const std::vector<Timeline>& timelines, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (const auto& tl : timelines) out << format_rttm(tl);
  check_written(out, path);
}

void write_rttm(const Timeline& timeline, const std::filesystem::path& path) {
  write_rttm(std::vector<Timeline>{timeline}, path);
}

}  // namespace ovsc
