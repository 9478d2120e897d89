#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "somscreen/features.hpp"

namespace somscreen {

struct ManifestEntry {
    std::string path;  // relative to the manifest's directory unless absolute
    std::string id;
    std::optional<std::string> label;

    bool operator==(const ManifestEntry&) const = default;
};

// Patch files: 50 lines of 50 whitespace-separated decimals.
PhasePatch read_patch(std::istream& in);
PhasePatch read_patch(const std::filesystem::path& path);
void write_patch(std::ostream& out, const PhasePatch& patch);
void write_patch(const std::filesystem::path& path, const PhasePatch& patch);

// Manifest CSV: `path,id,label`.
std::vector<ManifestEntry> read_manifest(std::istream& in);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& entries);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

// Feature CSV: `id,label,<six feature names>`.
std::vector<FeatureVector> read_features(std::istream& in);
std::vector<FeatureVector> read_features(const std::filesystem::path& path);
void write_features(std::ostream& out, const std::vector<FeatureVector>& features);
void write_features(const std::filesystem::path& path, const std::vector<FeatureVector>& features);

/// Splits one CSV line on commas. Quoting is not supported.
std::vector<std::string> split_csv_line(const std::string& line);

/// Rejects fields that would break the unquoted CSV layout.
void check_csv_field(const std::string& field);

}  // namespace somscreen
