#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace spinring {

// One sampled value. Scalar observables (energy, staggered order) use
// site = 0. Samples taken just before a measurement event carry a ":pre"
// suffix on the axis tag; the plain row at the same time is the
// post-event trajectory value.
struct SampleRow {
    double t = 0.0;
    int site = 0;
    std::string axis;
    double value = 0.0;

    bool operator==(const SampleRow&) const = default;
};

enum class TableFormat { csv, json };

// CSV: fixed header `t,site,axis,value`, %.17g numbers. JSON: schema-tagged
// document with the same columns. Both round-trip losslessly through
// import_table. Axis tags must not contain commas, quotes or newlines.
void export_table(const std::vector<SampleRow>& rows, const std::filesystem::path& path,
                  TableFormat format);

// Format is detected from the file content, not the extension.
std::vector<SampleRow> import_table(const std::filesystem::path& path);

// 64-bit FNV-1a, used for output checksums in run manifests.
std::uint64_t fnv1a64_bytes(const void* data, std::size_t size);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);

}  // namespace spinring
