#include "somscreen/model_io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>

#include "somscreen/errors.hpp"
#include "somscreen/features_io.hpp"
#include "somscreen/float_io.hpp"

namespace somscreen {

namespace {

constexpr std::string_view kMagic = "SOMODEL v1";

struct DetectorSections {
    std::optional<std::vector<std::string>> features;
    std::optional<std::vector<double>> norm_min;
    std::optional<std::vector<double>> norm_max;
    std::optional<double> threshold;
};

struct ParsedFile {
    Lattice lattice;
    DetectorSections sections;
};

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    bool next(std::string& line) {
        if (!std::getline(in_, line)) return false;
        ++number_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    }

    std::string require() {
        std::string line;
        if (!next(line)) throw ParseError(number_ + 1, "unexpected end of model file");
        return line;
    }

    std::size_t number() const { return number_; }

private:
    std::istream& in_;
    std::size_t number_ = 0;
};

std::string keyed_value(LineReader& reader, std::string_view key) {
    const std::string line = reader.require();
    if (line.size() <= key.size() + 1 || line.compare(0, key.size(), key) != 0 || line[key.size()] != ' ')
        throw ParseError(reader.number(), "expected '" + std::string(key) + " <value>'");
    return line.substr(key.size() + 1);
}

std::size_t positive_size(const std::string& text, std::size_t line) {
    const auto v = parse_int(text, line);
    if (v <= 0) throw ParseError(line, "expected a positive integer");
    return static_cast<std::size_t>(v);
}

std::vector<double> parse_float_list(const std::string& text, std::size_t line) {
    std::vector<double> values;
    for (const auto& field : split_csv_line(text)) {
        const double v = parse_double(field, line);
        if (!std::isfinite(v)) throw ParseError(line, "non-finite value");
        values.push_back(v);
    }
    return values;
}

void write_float_list(std::ostream& out, std::span<const double> values) {
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k) out << ',';
        out << format_double(values[k]);
    }
}

ParsedFile parse(std::istream& in) {
    LineReader reader(in);
    if (reader.require() != kMagic) throw ParseError(1, "missing 'SOMODEL v1' header");

    const std::string topo = keyed_value(reader, "topology");
    Topology topology;
    if (topo == "rect")
        topology = Topology::rectangular;
    else if (topo == "hex")
        topology = Topology::hexagonal;
    else
        throw ParseError(reader.number(), "unknown topology '" + topo + "'");
    auto dimension = [&](std::string_view key) {
        const std::string text = keyed_value(reader, key);
        return positive_size(text, reader.number());
    };
    const std::size_t rows = dimension("rows");
    const std::size_t cols = dimension("cols");
    const std::size_t dim = dimension("dim");

    ParsedFile file{Lattice(rows, cols, dim, topology), {}};
    for (std::size_t j = 0; j < file.lattice.size(); ++j) {
        const std::string text = reader.require();
        const auto values = parse_float_list(text, reader.number());
        if (values.size() != dim)
            throw ParseError(reader.number(), "weight line has " + std::to_string(values.size()) + " values, expected " +
                                                  std::to_string(dim));
        std::copy(values.begin(), values.end(), file.lattice.weight(j).begin());
    }

    auto& s = file.sections;
    std::string line;
    while (reader.next(line)) {
        if (line.empty()) continue;
        const auto space = line.find(' ');
        if (space == std::string::npos) throw ParseError(reader.number(), "expected '<section> <value>'");
        const std::string key = line.substr(0, space);
        const std::string value = line.substr(space + 1);
        const std::size_t n = reader.number();
        auto once = [&](bool present) {
            if (present) throw ParseError(n, "duplicate section '" + key + "'");
        };
        if (key == "features") {
            once(s.features.has_value());
            s.features = split_csv_line(value);
        } else if (key == "norm_min") {
            once(s.norm_min.has_value());
            s.norm_min = parse_float_list(value, n);
        } else if (key == "norm_max") {
            once(s.norm_max.has_value());
            s.norm_max = parse_float_list(value, n);
        } else if (key == "threshold") {
            once(s.threshold.has_value());
            s.threshold = parse_double(value, n);
        } else {
            throw ParseError(n, "unknown section '" + key + "'");
        }
    }
    return file;
}

}  // namespace

void write_lattice(std::ostream& out, const Lattice& lattice) {
    out << kMagic << '\n'
        << "topology " << (lattice.topology() == Topology::hexagonal ? "hex" : "rect") << '\n'
        << "rows " << lattice.rows() << '\n'
        << "cols " << lattice.cols() << '\n'
        << "dim " << lattice.dim() << '\n';
    for (std::size_t j = 0; j < lattice.size(); ++j) {
        write_float_list(out, lattice.weight(j));
        out << '\n';
    }
}

Lattice read_lattice(std::istream& in) { return parse(in).lattice; }

void write_model(std::ostream& out, const DetectionModel& model) {
    model.validate();
    write_lattice(out, model.lattice);
    out << "features ";
    for (std::size_t k = 0; k < model.feature_names.size(); ++k) {
        check_csv_field(model.feature_names[k]);
        out << (k ? "," : "") << model.feature_names[k];
    }
    out << "\nnorm_min ";
    write_float_list(out, model.norm.min);
    out << "\nnorm_max ";
    write_float_list(out, model.norm.max);
    out << "\nthreshold " << format_double(model.threshold) << '\n';
}

DetectionModel read_model(std::istream& in) {
    auto file = parse(in);
    auto& s = file.sections;
    if (!s.features || !s.norm_min || !s.norm_max || !s.threshold)
        throw ParseError(0, "model file lacks detector sections (features, norm_min, norm_max, threshold)");
    if (s.features->size() != kFeatureCount || s.norm_min->size() != kFeatureCount ||
        s.norm_max->size() != kFeatureCount)
        throw ParseError(0, "detector sections must list " + std::to_string(kFeatureCount) + " features");

    DetectionModel model{std::move(file.lattice), {}, *s.threshold, {}};
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
        model.feature_names[k] = (*s.features)[k];
        model.norm.min[k] = (*s.norm_min)[k];
        model.norm.max[k] = (*s.norm_max)[k];
    }
    try {
        model.validate();
    } catch (const InvalidArgument& e) {
        throw ParseError(0, e.what());
    }
    return model;
}

void save_model(const std::filesystem::path& path, const DetectionModel& model) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    write_model(out, model);
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

DetectionModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return read_model(in);
}

}  // namespace somscreen
