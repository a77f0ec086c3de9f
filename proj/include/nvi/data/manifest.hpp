#pragma once

#include <filesystem>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "nvi/data/types.hpp"

namespace nvi::data {

inline constexpr int kManifestVersion = 1;

/// Reads a line-delimited manifest. Relative `include` records are resolved
/// against the manifest's directory; segment source paths are kept verbatim
/// (see resolve_source).
///
/// Throws ParseError (with line number) for malformed records and
/// ValidationError for invariant violations.
DatasetManifest load_manifest(const std::filesystem::path& path);

DatasetManifest parse_manifest(std::istream& in, const std::string& source_name,
                               const std::filesystem::path& base_dir);

/// Canonical text form: header, segments, frame labels, segment labels,
/// all embedded.
std::string serialize_manifest(const DatasetManifest& manifest);

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Checks every manifest invariant; throws ValidationError naming the
/// offending teacher, segment or label.
void validate_manifest(const DatasetManifest& manifest);

/// Segment source path made absolute relative to the manifest location.
std::filesystem::path resolve_source(const std::filesystem::path& manifest_path,
                                     const SegmentRecord& segment);

void validate_rating(const RatingTriple& triple, double scale_max);

struct TeacherSplit {
    std::vector<SegmentRecord> train;
    std::vector<SegmentRecord> validation;
};

/// Assigns every segment of a validation teacher to validation and all others
/// to train. The returned records carry the updated split.
TeacherSplit split_by_teacher(std::span<const SegmentRecord> segments,
                              const std::set<std::string>& validation_teachers);

std::set<std::string> teachers_in(std::span<const SegmentRecord> segments, Split split);

/// Frame labels carrying a rating for `construct` whose segment is in `split`.
std::vector<FrameLabelRecord> frame_labels_in(const DatasetManifest& manifest, Construct construct,
                                              Split split);

}  // namespace nvi::data
