#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ovsc/types.hpp"

namespace ovsc {

/// Gap (seconds) under which two same-speaker intervals are considered touching.
inline constexpr double kMergeGap = 1e-6;

/// Load the tab-separated embeddings file:
///
///     recording_id <TAB> start <TAB> end <TAB> v1 v2 ... vD
///
/// An optional `#dim D` header is enforced when present; other `#` lines and
/// blank lines are skipped. Rows are re-sorted by (recording of first
/// appearance, start, end); `SegmentSpan::index` keeps the file ordinal.
/// Throws ParseError naming the offending line.
EmbeddingSequence load_embeddings(const std::filesystem::path& path);

/// Write `seq` in the format read by load_embeddings. Values use the shortest
/// representation that round-trips exactly.
void save_embeddings(const EmbeddingSequence& seq, const std::filesystem::path& path);

/// Read only the spans of an embeddings or segments file (the vector column is optional).
std::vector<SegmentSpan> load_segments(const std::filesystem::path& path);

/// Split a multi-recording sequence into one sequence per recording, in order.
std::vector<EmbeddingSequence> split_by_recording(const EmbeddingSequence& seq);

/// One 0/1 value per line, in the line order of the embeddings file.
OverlapVector load_overlap_flags(const std::filesystem::path& path);
void write_overlap_flags(const OverlapVector& flags, const std::filesystem::path& path);

/// Reorder file-ordered flags to follow `spans` (uses SegmentSpan::index).
OverlapVector align_flags(const OverlapVector& file_order, const std::vector<SegmentSpan>& spans);

/// Inverse of align_flags: scatter span-ordered flags back to file order.
OverlapVector flags_to_file_order(const OverlapVector& span_order,
                                  const std::vector<SegmentSpan>& spans);

/// `#frame_shift S` header followed by `p_silence p_single p_overlap` per line.
FramePosteriors load_posteriors(const std::filesystem::path& path);
void write_posteriors(const FramePosteriors& post, const std::filesystem::path& path);

/// Parse SPEAKER records, one normalized Timeline per recording in order of first
/// appearance. Other record types and `;;` comments are ignored.
std::vector<Timeline> load_rttm(const std::filesystem::path& path);

/// One SPEAKER line per entry with 3-decimal onset and duration, sorted by (start, speaker).
void write_rttm(const std::vector<Timeline>& timelines, const std::filesystem::path& path);
void write_rttm(const Timeline& timeline, const std::filesystem::path& path);
std::string format_rttm(const Timeline& timeline);

/// Merge touching or overlapping same-speaker intervals, drop empty ones and
/// sort by (start, speaker, end).
Timeline normalize_timeline(Timeline timeline);

/// Speaker label for cluster column k ("spk{k}").
std::string cluster_name(std::size_t k);

/// Each set bit (i, k) contributes (spk{k}, span_i.start, span_i.end); the
/// result is normalized. Throws ContractError when row counts disagree.
Timeline assignment_to_timeline(const AssignmentMatrix& assignment,
                                const std::vector<SegmentSpan>& spans);

}  // namespace ovsc
