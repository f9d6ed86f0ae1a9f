#include "spinring/statefile.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

namespace spinring {

namespace {

constexpr char kMagic[8] = {'S', 'P', 'I', 'N', 'R', 'I', 'N', 'G'};
constexpr std::uint32_t kVersion = 1;
constexpr std::int32_t kFullSpaceTag = std::numeric_limits<std::int32_t>::min();

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

void put_i32(std::string& out, std::int32_t v) {
    put_u32(out, static_cast<std::uint32_t>(v));
}

struct Reader {
    const unsigned char* p;
    const unsigned char* end;
    const std::filesystem::path& path;

    void need(std::size_t n) const {
        if (static_cast<std::size_t>(end - p) < n) {
            throw IoError("truncated state file: " + path.string());
        }
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(p[i]) << (8 * i);
        p += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[i]) << (8 * i);
        p += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
};

}  // namespace

void save_state(const StateVector& psi, const std::filesystem::path& path, bool phase_fixed) {
    psi.check_consistent();
    std::string buf;
    buf.reserve(64 + psi.amplitudes.size() * 16);
    buf.append(kMagic, sizeof(kMagic));
    put_u32(buf, kVersion);
    put_u32(buf, static_cast<std::uint32_t>(psi.spec.n_sites));
    put_f64(buf, psi.spec.exchange_j);
    put_f64(buf, psi.spec.anisotropy_delta);
    put_i32(buf, psi.sector ? psi.sector->twice_total_sz : kFullSpaceTag);
    put_u32(buf, phase_fixed ? 1u : 0u);
    put_u64(buf, psi.amplitudes.size());
    for (const Amplitude& a : psi.amplitudes) {
        put_f64(buf, a.real());
        put_f64(buf, a.imag());
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

StateVector load_state(const std::filesystem::path& path, StateFileInfo* info) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    Reader r{bytes.data(), bytes.data() + bytes.size(), path};

    r.need(sizeof(kMagic));
    if (std::memcmp(r.p, kMagic, sizeof(kMagic)) != 0) {
        throw IoError("not a state file (bad magic): " + path.string());
    }
    r.p += sizeof(kMagic);
    const std::uint32_t version = r.u32();
    if (version != kVersion) {
        throw IoError("unsupported state file version " + std::to_string(version) + ": " +
                      path.string());
    }
    const int n_sites = static_cast<int>(r.u32());
    const double j = r.f64();
    const double delta = r.f64();
    const std::int32_t sector_tag = r.i32();
    const std::uint32_t phase_flag = r.u32();
    const std::uint64_t count = r.u64();

    const ChainSpec spec(n_sites, j, delta);
    std::shared_ptr<const SzSector> sector;
    if (sector_tag != kFullSpaceTag) {
        sector = make_sector(spec, sector_tag / 2.0);
    }
    StateVector psi = zero_state(spec, sector);
    if (count != psi.amplitudes.size()) {
        throw IoError("amplitude count does not match the declared basis: " + path.string());
    }
    for (std::uint64_t i = 0; i < count; ++i) {
        const double re = r.f64();
        const double im = r.f64();
        psi.amplitudes[i] = Amplitude{re, im};
    }
    if (r.p != r.end) throw IoError("trailing bytes in state file: " + path.string());
    if (info) info->phase_fixed = phase_flag == 1;
    return psi;
}

}  // namespace spinring
