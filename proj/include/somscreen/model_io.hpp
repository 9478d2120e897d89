#pragma once

#include <filesystem>
#include <iosfwd>

#include "somscreen/detector.hpp"
#include "somscreen/som.hpp"

// SOMODEL v1: a line-oriented text format. Header lines `topology`, `rows`,
// `cols`, `dim`, then rows*cols comma-separated weight lines, then the
// optional detector sections `features`, `norm_min`, `norm_max`,
// `threshold`. Floats use shortest round-trip decimals.
namespace somscreen {

void write_lattice(std::ostream& out, const Lattice& lattice);
/// Accepts (and ignores) trailing detector sections.
Lattice read_lattice(std::istream& in);

void write_model(std::ostream& out, const DetectionModel& model);
/// Requires every detector section.
DetectionModel read_model(std::istream& in);

void save_model(const std::filesystem::path& path, const DetectionModel& model);
DetectionModel load_model(const std::filesystem::path& path);

}  // namespace somscreen
