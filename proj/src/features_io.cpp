#include "somscreen/features_io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "somscreen/errors.hpp"
#include "somscreen/float_io.hpp"

namespace somscreen {

namespace {

constexpr std::string_view kManifestHeader = "path,id,label";

std::string feature_header() {
    std::string h = "id,label";
    for (auto name : kFeatureNames) {
        h += ',';
        h += name;
    }
    return h;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::optional<std::string> optional_label(const std::string& s) {
    return s.empty() ? std::nullopt : std::optional<std::string>(s);
}

bool getline_stripped(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

void check_csv_field(const std::string& field) {
    if (field.find_first_of(",\n\r") != std::string::npos)
        throw InvalidArgument("field '" + field + "' contains a comma or line break");
}

PhasePatch read_patch(std::istream& in) {
    PhasePatch patch;
    std::string line;
    std::size_t row = 0;
    std::size_t line_no = 0;
    while (getline_stripped(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        if (row == kPatchSide) throw ParseError(line_no, "patch has more than 50 rows");
        std::istringstream tokens(line);
        std::string tok;
        std::size_t col = 0;
        while (tokens >> tok) {
            if (col == kPatchSide) throw ParseError(line_no, "patch row has more than 50 values");
            patch.at(row, col++) = parse_double(tok, line_no);
        }
        if (col != kPatchSide) throw ParseError(line_no, "patch row has " + std::to_string(col) + " values, expected 50");
        ++row;
    }
    if (row != kPatchSide) throw ParseError(line_no, "patch has " + std::to_string(row) + " rows, expected 50");
    for (double v : patch.pixels)
        if (!std::isfinite(v)) throw ParseError(0, "patch contains a non-finite value");
    return patch;
}

PhasePatch read_patch(const std::filesystem::path& path) {
    auto in = open_in(path);
    try {
        return read_patch(in);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), path.string() + ": " + e.what());
    }
}

void write_patch(std::ostream& out, const PhasePatch& patch) {
    patch.validate();
    for (std::size_t r = 0; r < kPatchSide; ++r) {
        for (std::size_t c = 0; c < kPatchSide; ++c) {
            if (c) out << ' ';
            out << format_double(patch.at(r, c));
        }
        out << '\n';
    }
}

void write_patch(const std::filesystem::path& path, const PhasePatch& patch) {
    auto out = open_out(path);
    write_patch(out, patch);
    finish(out, path);
}

std::vector<ManifestEntry> read_manifest(std::istream& in) {
    std::string line;
    if (!getline_stripped(in, line) || line != kManifestHeader)
        throw ParseError(1, "manifest header must be '" + std::string(kManifestHeader) + "'");
    std::vector<ManifestEntry> entries;
    std::size_t line_no = 1;
    while (getline_stripped(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 3) throw ParseError(line_no, "expected 3 fields, got " + std::to_string(fields.size()));
        if (fields[0].empty()) throw ParseError(line_no, "empty patch path");
        entries.push_back({fields[0], fields[1], optional_label(fields[2])});
    }
    return entries;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_manifest(in);
}

void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& entries) {
    out << kManifestHeader << '\n';
    for (const auto& e : entries) {
        check_csv_field(e.path);
        check_csv_field(e.id);
        check_csv_field(e.label.value_or(""));
        out << e.path << ',' << e.id << ',' << e.label.value_or("") << '\n';
    }
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
    auto out = open_out(path);
    write_manifest(out, entries);
    finish(out, path);
}

std::vector<FeatureVector> read_features(std::istream& in) {
    std::string line;
    if (!getline_stripped(in, line) || line != feature_header())
        throw ParseError(1, "feature header must be '" + feature_header() + "'");
    std::vector<FeatureVector> out;
    std::size_t line_no = 1;
    while (getline_stripped(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 2 + kFeatureCount)
            throw ParseError(line_no, "expected " + std::to_string(2 + kFeatureCount) + " fields, got " +
                                          std::to_string(fields.size()));
        FeatureVector f;
        f.id = fields[0];
        f.label = optional_label(fields[1]);
        for (std::size_t k = 0; k < kFeatureCount; ++k) {
            f.values[k] = parse_double(fields[2 + k], line_no);
            if (!std::isfinite(f.values[k])) throw ParseError(line_no, "non-finite feature value");
        }
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<FeatureVector> read_features(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_features(in);
}

void write_features(std::ostream& out, const std::vector<FeatureVector>& features) {
    out << feature_header() << '\n';
    for (const auto& f : features) {
        check_csv_field(f.id);
        check_csv_field(f.label.value_or(""));
        out << f.id << ',' << f.label.value_or("");
        for (double v : f.values) out << ',' << format_double(v);
        out << '\n';
    }
}

void write_features(const std::filesystem::path& path, const std::vector<FeatureVector>& features) {
    auto out = open_out(path);
    write_features(out, features);
    finish(out, path);
}

}  // namespace somscreen
