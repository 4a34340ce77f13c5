#pragma once

// Snapshot archive: magic "ATRL1", version u16, model id u8, D u32, count
// u64, then count rows of D doubles, then a CRC32 footer over the payload.
// All integers and floats are little-endian on disk regardless of host.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <zlib.h>

#include "atrl/common.hpp"
#include "atrl/field.hpp"
#include "atrl/integrate.hpp"
#include "atrl/models.hpp"

namespace atrl {

constexpr char archive_magic[5] = {'A', 'T', 'R', 'L', '1'};
constexpr std::uint16_t archive_version = 1;

struct SnapshotArchive {
    std::uint16_t version = archive_version;
    model_id model = model_id::burgers_1d;
    std::uint32_t D = 0;
    std::vector<std::vector<double>> rows;
};

namespace detail {

inline void put_bytes(std::string& out, std::uint64_t v, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

inline std::uint64_t get_bytes(const std::string& in, std::size_t& pos, std::size_t n) {
    if (pos + n > in.size()) throw integrity_error("archive: truncated file");
    std::uint64_t v = 0;
    for (std::size_t k = 0; k < n; ++k)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + k])) << (8 * k);
    pos += n;
    return v;
}

}  // namespace detail

inline std::string serialize_archive(const SnapshotArchive& a) {
    for (const auto& r : a.rows)
        if (r.size() != a.D) throw dimension_error("archive: row width does not match header");
    std::string payload;
    payload.reserve(a.rows.size() * a.D * 8);
    for (const auto& r : a.rows)
        for (double x : r) detail::put_bytes(payload, std::bit_cast<std::uint64_t>(x), 8);

    std::string out;
    out.append(archive_magic, sizeof(archive_magic));
    detail::put_bytes(out, a.version, 2);
    detail::put_bytes(out, static_cast<std::uint64_t>(a.model), 1);
    detail::put_bytes(out, a.D, 4);
    detail::put_bytes(out, a.rows.size(), 8);
    out += payload;
    const auto crc = static_cast<std::uint32_t>(
        crc32(0, reinterpret_cast<const Bytef*>(payload.data()), static_cast<uInt>(payload.size())));
    detail::put_bytes(out, crc, 4);
    return out;
}

inline SnapshotArchive deserialize_archive(const std::string& bytes) {
    std::size_t pos = 0;
    if (bytes.size() < sizeof(archive_magic) || std::memcmp(bytes.data(), archive_magic, sizeof(archive_magic)) != 0)
        throw integrity_error("archive: bad magic");
    pos += sizeof(archive_magic);
    SnapshotArchive a;
    a.version = static_cast<std::uint16_t>(detail::get_bytes(bytes, pos, 2));
    if (a.version != archive_version) throw integrity_error("archive: unsupported version");
    const auto id = detail::get_bytes(bytes, pos, 1);
    if (id != 1 && id != 2) throw integrity_error("archive: unknown model id");
    a.model = static_cast<model_id>(id);
    a.D = static_cast<std::uint32_t>(detail::get_bytes(bytes, pos, 4));
    const std::uint64_t count = detail::get_bytes(bytes, pos, 8);
    if (a.D != 0 && count > (bytes.size() / 8) / a.D) throw integrity_error("archive: size does not match header");
    const std::uint64_t need = count * a.D * 8;
    if (bytes.size() != pos + need + 4) throw integrity_error("archive: size does not match header");
    std::size_t footer = pos + need;
    const auto crc_stored = static_cast<std::uint32_t>(detail::get_bytes(bytes, footer, 4));
    const auto crc_actual = static_cast<std::uint32_t>(
        crc32(0, reinterpret_cast<const Bytef*>(bytes.data() + pos), static_cast<uInt>(need)));
    if (crc_stored != crc_actual) throw integrity_error("archive: checksum mismatch");
    a.rows.assign(count, std::vector<double>(a.D));
    for (auto& r : a.rows)
        for (auto& x : r) x = std::bit_cast<double>(detail::get_bytes(bytes, pos, 8));
    pos += 4;  // footer already validated
    return a;
}

inline void write_archive(const std::string& path, const SnapshotArchive& a) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw integrity_error("archive: cannot open " + path + " for writing");
    const std::string bytes = serialize_archive(a);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw integrity_error("archive: write failed for " + path);
}

inline SnapshotArchive read_archive(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw integrity_error("archive: cannot open " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_archive(bytes);
}

inline SnapshotArchive archive_from_sample(model_id id, const AttractorSample& sample) {
    SnapshotArchive a;
    a.model = id;
    if (sample.snapshots.empty()) throw sample_error("archive: no snapshots");
    a.D = static_cast<std::uint32_t>(sample.snapshots.front().a.size());
    a.rows.reserve(sample.snapshots.size());
    for (const auto& u : sample.snapshots) a.rows.push_back(u.a);
    return a;
}

inline std::vector<SpectralField> fields_from_archive(const SnapshotArchive& a, OperatorPtr op) {
    if (!op) throw dimension_error("archive: null operator");
    if (op->dimension() != a.D) throw integrity_error("archive: dimension does not match the configured model");
    std::vector<SpectralField> out;
    out.reserve(a.rows.size());
    for (const auto& r : a.rows) {
        SpectralField u = zero_field(op);
        u.a = r;
        out.push_back(std::move(u));
    }
    return out;
}

}  // namespace atrl
