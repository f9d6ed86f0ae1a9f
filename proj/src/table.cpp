#include "spinring/table.hpp"

#include <array>
#include <cerrno>
#include <climits>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>

#include "spinring/errors.hpp"

namespace spinring {

namespace {

constexpr char kCsvHeader[] = "t,site,axis,value";
constexpr char kJsonSchema[] = "spinring-table-1";

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    // ERANGE with a finite result is graceful underflow (denormals round-trip)
    const bool overflow = errno == ERANGE && (v == HUGE_VAL || v == -HUGE_VAL);
    if (end == s.c_str() || *end != '\0' || overflow) {
        throw IoError("bad numeric field '" + s + "' in " + path.string());
    }
    return v;
}

int parse_int(const std::string& s, const std::filesystem::path& path) {
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE || v < INT_MIN || v > INT_MAX) {
        throw IoError("bad integer field '" + s + "' in " + path.string());
    }
    return static_cast<int>(v);
}

void check_axis_tag(const std::string& axis) {
    if (axis.find_first_of(",\"\n\r") != std::string::npos) {
        throw ContractViolation("axis tag '" + axis + "' is not serializable");
    }
}

void export_csv(const std::vector<SampleRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << kCsvHeader << "\n";
    for (const SampleRow& r : rows) {
        check_axis_tag(r.axis);
        out << format_double(r.t) << ',' << r.site << ',' << r.axis << ','
            << format_double(r.value) << "\n";
    }
    if (!out.flush()) throw IoError("write failed for " + path.string());
}

void export_json(const std::vector<SampleRow>& rows, const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["schema"] = kJsonSchema;
    doc["columns"] = {"t", "site", "axis", "value"};
    auto& out_rows = doc["rows"] = nlohmann::json::array();
    for (const SampleRow& r : rows) {
        check_axis_tag(r.axis);
        out_rows.push_back({r.t, r.site, r.axis, r.value});
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << doc.dump(1) << "\n";
    if (!out.flush()) throw IoError("write failed for " + path.string());
}

std::vector<SampleRow> import_csv(std::istream& in, const std::filesystem::path& path) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw IoError(path.string() + " does not start with the header '" + kCsvHeader + "'");
    }
    std::vector<SampleRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::array<std::string, 4> field;
        std::size_t start = 0;
        for (int f = 0; f < 4; ++f) {
            const std::size_t comma = line.find(',', start);
            const bool last = f == 3;
            if (last != (comma == std::string::npos)) {
                throw IoError("malformed row '" + line + "' in " + path.string());
            }
            field[f] = line.substr(start, last ? std::string::npos : comma - start);
            start = comma + 1;
        }
        rows.push_back(SampleRow{parse_double(field[0], path), parse_int(field[1], path),
                                 field[2], parse_double(field[3], path)});
    }
    return rows;
}

std::vector<SampleRow> import_json(std::istream& in, const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("cannot parse " + path.string() + ": " + e.what());
    }
    if (!doc.is_object() || doc.value("schema", "") != kJsonSchema) {
        throw IoError(path.string() + " is not a " + kJsonSchema + " document");
    }
    std::vector<SampleRow> rows;
    try {
        for (const auto& r : doc.at("rows")) {
            rows.push_back(SampleRow{r.at(0).get<double>(), r.at(1).get<int>(),
                                     r.at(2).get<std::string>(), r.at(3).get<double>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError("bad row in " + path.string() + ": " + e.what());
    }
    return rows;
}

}  // namespace

void export_table(const std::vector<SampleRow>& rows, const std::filesystem::path& path,
                  TableFormat format) {
    if (format == TableFormat::csv) {
        export_csv(rows, path);
    } else {
        export_json(rows, path);
    }
}

std::vector<SampleRow> import_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    const int first = in.peek();
    if (first == '{') return import_json(in, path);
    return import_csv(in, path);
}

std::uint64_t fnv1a64_bytes(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        const auto got = static_cast<std::size_t>(in.gcount());
        for (std::size_t i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

}  // namespace spinring
