// Copyright 2026 The Notary Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "notary/store.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace notary::store {

namespace fs = std::filesystem;

void write_record(ByteWriter& w, const model::StoredRecord& r) {
    w.u8(uint8_t(r.kind));
    if (r.kind == model::RecordKind::full) w.field(r.device.bytes);
    w.field(r.sensor.bytes);
    w.u64(r.time.epoch_seconds);
    if (r.kind == model::RecordKind::full) w.field(r.params);
}

model::StoredRecord read_record(ByteReader& r) {
    model::StoredRecord rec;
    uint8_t kind = r.u8();
    if (kind != uint8_t(model::RecordKind::full) && kind != uint8_t(model::RecordKind::tombstone))
        throw FormatError("bad record kind");
    rec.kind = model::RecordKind(kind);
    if (rec.kind == model::RecordKind::full) rec.device.bytes = r.field();
    rec.sensor.bytes = r.field();
    rec.time.epoch_seconds = r.u64();
    if (rec.kind == model::RecordKind::full) rec.params = r.field();
    if (!model::valid_sensor_id(rec.sensor)) throw FormatError("bad sensor id");
    if (rec.kind == model::RecordKind::full && !model::valid_device_id(rec.device))
        throw FormatError("bad device id");
    return rec;
}

size_t record_wire_size(const model::StoredRecord& r) {
    size_t n = 1 + 4 + r.sensor.bytes.size() + 8;
    if (r.kind == model::RecordKind::full) n += 4 + r.device.bytes.size() + 4 + r.params.size();
    return n;
}

Bytes serialize_chunk(const model::SealedChunk& chunk) {
    ByteWriter w;
    w.raw(ByteView(reinterpret_cast<const uint8_t*>(kChunkMagic), 4));
    w.u8(kFormatVersion);
    w.u8(uint8_t(chunk.mode));
    w.field(chunk.id.stream_tag);
    w.u64(chunk.id.index);
    w.u32(uint32_t(chunk.records.size()));
    w.u32(chunk.pi.pad_count);
    for (const auto& rec : chunk.records) write_record(w, rec);
    for (const auto& d : chunk.chain_digests) w.raw(d);
    for (const auto& row : chunk.user_digests) {
        w.raw(row.o);
        w.u8(uint8_t(row.state));
        w.u64(row.time.epoch_seconds);
    }
    w.raw(chunk.pi.g);
    w.field(chunk.pi.signature);
    w.field(chunk.pu.signature);
    return w.take();
}

model::SealedChunk parse_chunk(ByteView bytes) {
    ByteReader r(bytes);
    Bytes magic = r.raw(4);
    if (std::memcmp(magic.data(), kChunkMagic, 4) != 0) throw FormatError("bad magic");
    if (r.u8() != kFormatVersion) throw FormatError("bad version");
    uint8_t mode = r.u8();
    if (mode > uint8_t(model::SealMode::per_user)) throw FormatError("bad mode");

    model::SealedChunk c;
    c.mode = model::SealMode(mode);
    c.id.stream_tag = to_string(r.field());
    c.id.index = r.u64();
    uint32_t record_count = r.u32();
    uint32_t pad_count = r.u32();
    if (record_count == 0) throw FormatError("empty chunk");
    uint64_t slots = uint64_t(record_count) + pad_count;
    // Counts are untrusted: bound them by the bytes actually present
    // before any allocation sized from them.
    if (slots * 32 > r.remaining()) throw FormatError("slot count exceeds payload");

    c.records.reserve(std::min<size_t>(record_count, r.remaining() / 14));
    for (uint32_t i = 0; i < record_count; ++i) c.records.push_back(read_record(r));
    c.chain_digests.reserve(slots);
    for (uint64_t i = 0; i < slots; ++i) c.chain_digests.push_back(r.digest());
    c.user_digests.reserve(slots);
    for (uint64_t i = 0; i < slots; ++i) {
        model::UserDigestRow row;
        row.o = r.digest();
        uint8_t st = r.u8();
        if (st > 1) throw FormatError("bad row state");
        row.state = model::SensorState(st);
        row.time.epoch_seconds = r.u64();
        c.user_digests.push_back(row);
    }
    c.pi.g = r.digest();
    c.pu.g = c.pi.g;
    c.pi.pad_count = pad_count;
    c.pi.signature = r.field();
    c.pu.signature = r.field();
    r.expect_done();
    return c;
}

Bytes serialize_manifest(const StreamManifest& m) {
    ByteWriter w;
    w.raw(to_bytes("NTRS"));
    w.u8(kFormatVersion);
    w.field(m.stream_tag);
    w.raw(m.g_star);
    w.u64(m.next_index);
    w.raw(m.pending_g);
    return w.take();
}

StreamManifest parse_manifest(ByteView bytes) {
    ByteReader r(bytes);
    Bytes magic = r.raw(4);
    if (std::memcmp(magic.data(), "NTRS", 4) != 0) throw FormatError("bad manifest magic");
    if (r.u8() != kFormatVersion) throw FormatError("bad manifest version");
    StreamManifest m;
    m.stream_tag = to_string(r.field());
    m.g_star = r.digest();
    m.next_index = r.u64();
    m.pending_g = r.digest();
    r.expect_done();
    return m;
}

Bytes serialize_user_view(const UserChunkView& v) {
    ByteWriter w;
    w.field(v.id.stream_tag);
    w.u64(v.id.index);
    w.u32(v.pad_count);
    w.u32(uint32_t(v.rows.size()));
    for (const auto& row : v.rows) {
        w.raw(row.o);
        w.u8(uint8_t(row.state));
        w.u64(row.time.epoch_seconds);
    }
    w.raw(v.g);
    w.field(v.pu_signature);
    auto opt = [&](const std::optional<model::RandomString>& g) {
        w.u8(g ? 1 : 0);
        if (g) w.raw(*g);
    };
    opt(v.g_prev);
    opt(v.g_next);
    return w.take();
}

UserChunkView parse_user_view(ByteView bytes) {
    ByteReader r(bytes);
    UserChunkView v;
    v.id.stream_tag = to_string(r.field());
    v.id.index = r.u64();
    v.pad_count = r.u32();
    uint32_t n = r.u32();
    if (uint64_t(n) * 41 > r.remaining()) throw FormatError("row count exceeds payload");
    v.rows.reserve(n);
    for (uint32_t i = 0; i < n; ++i) {
        model::UserDigestRow row;
        row.o = r.digest();
        uint8_t st = r.u8();
        if (st > 1) throw FormatError("bad row state");
        row.state = model::SensorState(st);
        row.time.epoch_seconds = r.u64();
        v.rows.push_back(row);
    }
    v.g = r.digest();
    v.pu_signature = r.field();
    if (r.u8()) v.g_prev = r.digest();
    if (r.u8()) v.g_next = r.digest();
    r.expect_done();
    return v;
}

UserChunkView user_view_of(const RetrievedChunk& rc) {
    UserChunkView v;
    v.id = rc.chunk.id;
    v.pad_count = rc.chunk.pi.pad_count;
    v.rows = rc.chunk.user_digests;
    v.g = rc.chunk.pu.g;
    v.pu_signature = rc.chunk.pu.signature;
    v.g_prev = rc.g_prev;
    v.g_next = rc.g_next;
    return v;
}

namespace {

Bytes read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw FormatError("cannot open " + p.string());
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& p, ByteView data) {
    fs::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
        if (!out) throw FormatError("cannot write " + tmp.string());
    }
    fs::rename(tmp, p);
}

std::string chunk_file_name(const model::ChunkId& id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "-%08llu.chunk", static_cast<unsigned long long>(id.index));
    return id.stream_tag + buf;
}

}  // namespace

ChunkStore::ChunkStore(fs::path dir, bool create) : dir_(std::move(dir)) {
    if (create) fs::create_directories(dir_);
    if (!fs::is_directory(dir_)) throw FormatError("not a directory: " + dir_.string());
}

fs::path ChunkStore::chunk_path(const model::ChunkId& id) const {
    return dir_ / chunk_file_name(id);
}

fs::path ChunkStore::put_chunk(const model::SealedChunk& chunk) {
    fs::path p = chunk_path(chunk.id);
    write_file(p, serialize_chunk(chunk));
    return p;
}

void ChunkStore::set_stream_tail(const std::string& tag, const model::RandomString& g_star,
                                 uint64_t next_index, const model::RandomString& pending_g) {
    StreamManifest m{tag, g_star, next_index, pending_g};
    write_file(dir_ / (tag + ".stream"), serialize_manifest(m));
}

std::optional<StreamManifest> ChunkStore::manifest(const std::string& tag) const {
    fs::path p = dir_ / (tag + ".stream");
    if (!fs::exists(p)) return std::nullopt;
    return parse_manifest(read_file(p));
}

void ChunkStore::write_meta(const StoreMeta& meta) {
    ByteWriter w;
    w.u8(uint8_t(meta.mode));
    w.u32(meta.bucket_count);
    write_file(dir_ / "store.meta", w.bytes());
}

std::optional<StoreMeta> ChunkStore::meta() const {
    fs::path p = dir_ / "store.meta";
    if (!fs::exists(p)) return std::nullopt;
    Bytes b = read_file(p);
    ByteReader r(b);
    StoreMeta m;
    uint8_t mode = r.u8();
    if (mode > uint8_t(model::SealMode::per_user)) throw FormatError("bad meta mode");
    m.mode = model::SealMode(mode);
    m.bucket_count = r.u32();
    return m;
}

std::vector<std::string> ChunkStore::streams() const {
    std::vector<std::string> out;
    for (const auto& e : fs::directory_iterator(dir_)) {
        if (e.path().extension() == ".stream") out.push_back(e.path().stem().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<uint64_t> ChunkStore::chunk_indices(const std::string& tag) const {
    std::vector<uint64_t> out;
    std::string prefix = tag + "-";
    for (const auto& e : fs::directory_iterator(dir_)) {
        if (e.path().extension() != ".chunk") continue;
        std::string stem = e.path().stem().string();
        if (stem.size() != prefix.size() + 8 || stem.compare(0, prefix.size(), prefix) != 0)
            continue;
        out.push_back(std::stoull(stem.substr(prefix.size())));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<model::RandomString> ChunkStore::neighbor_g(const std::string& tag, uint64_t index,
                                                          bool next) const {
    if (!next && index == 0) {
        auto m = manifest(tag);
        if (!m) return std::nullopt;
        return m->g_star;
    }
    uint64_t want = next ? index + 1 : index - 1;
    fs::path p = chunk_path(model::ChunkId{tag, want});
    if (fs::exists(p)) {
        try {
            return parse_chunk(read_file(p)).pi.g;
        } catch (const FormatError&) {
            return std::nullopt;  // unreadable neighbor = absent neighbor
        }
    }
    if (next) {
        auto m = manifest(tag);
        if (m && m->next_index == want) return m->pending_g;
    }
    return std::nullopt;
}

std::optional<RetrievedChunk> ChunkStore::get_chunk(const model::ChunkId& id) const {
    fs::path p = chunk_path(id);
    if (!fs::exists(p)) return std::nullopt;
    RetrievedChunk rc;
    rc.chunk = parse_chunk(read_file(p));
    rc.g_prev = neighbor_g(id.stream_tag, id.index, false);
    rc.g_next = neighbor_g(id.stream_tag, id.index, true);
    return rc;
}

std::vector<RetrievedChunk> ChunkStore::get_index_range(const std::string& tag,
                                                        uint64_t from_index,
                                                        uint64_t to_index) const {
    std::vector<RetrievedChunk> out;
    for (uint64_t idx : chunk_indices(tag)) {
        if (idx < from_index || idx > to_index) continue;
        if (auto rc = get_chunk(model::ChunkId{tag, idx})) out.push_back(std::move(*rc));
    }
    return out;
}

std::vector<IndexEntry> ChunkStore::scan_index() const {
    std::vector<IndexEntry> out;
    for (const std::string& tag : streams()) {
        for (uint64_t idx : chunk_indices(tag)) {
            try {
                model::SealedChunk c = parse_chunk(read_file(chunk_path({tag, idx})));
                IndexEntry e;
                e.id = c.id;
                e.t_min = UINT64_MAX;
                e.t_max = 0;
                for (const auto& rec : c.records) {
                    e.t_min = std::min(e.t_min, rec.time.epoch_seconds);
                    e.t_max = std::max(e.t_max, rec.time.epoch_seconds);
                }
                out.push_back(e);
            } catch (const FormatError&) {
                // Unreadable chunks surface later as verification failures.
            }
        }
    }
    return out;
}

std::vector<RetrievedChunk> ChunkStore::get_time_range(const std::optional<std::string>& tag,
                                                       uint64_t t_from, uint64_t t_to) const {
    std::vector<RetrievedChunk> out;
    for (const IndexEntry& e : scan_index()) {
        if (tag && e.id.stream_tag != *tag) continue;
        if (e.t_max < t_from || e.t_min >= t_to) continue;
        if (auto rc = get_chunk(e.id)) out.push_back(std::move(*rc));
    }
    std::sort(out.begin(), out.end(), [](const RetrievedChunk& a, const RetrievedChunk& b) {
        return std::tie(a.chunk.id.stream_tag, a.chunk.id.index) <
               std::tie(b.chunk.id.stream_tag, b.chunk.id.index);
    });
    return out;
}

uint64_t ChunkStore::total_chunk_bytes() const {
    uint64_t total = 0;
    for (const auto& e : fs::directory_iterator(dir_)) {
        if (e.path().extension() == ".chunk") total += fs::file_size(e.path());
    }
    return total;
}

namespace {

// Section offsets of a serialized chunk file, for raw byte edits.
struct Layout {
    size_t records_begin = 0;
    size_t chain_begin = 0;
    size_t rows_begin = 0;
    size_t proof_begin = 0;
    size_t end = 0;
    uint32_t record_count = 0;
    uint32_t pad_count = 0;
};

Layout layout_of(ByteView bytes) {
    ByteReader r(bytes);
    r.raw(4);
    r.u8();
    r.u8();
    r.field();
    r.u64();
    Layout l;
    l.record_count = r.u32();
    l.pad_count = r.u32();
    l.records_begin = bytes.size() - r.remaining();
    for (uint32_t i = 0; i < l.record_count; ++i) read_record(r);
    l.chain_begin = bytes.size() - r.remaining();
    uint64_t slots = uint64_t(l.record_count) + l.pad_count;
    r.raw(slots * 32);
    l.rows_begin = bytes.size() - r.remaining();
    r.raw(slots * 41);
    l.proof_begin = bytes.size() - r.remaining();
    r.raw(32);
    r.field();
    r.field();
    l.end = bytes.size() - r.remaining();
    return l;
}

uint64_t rand_below(crypto::RandomSource& rng, uint64_t n) {
    uint8_t buf[8];
    rng.fill(buf);
    uint64_t v = 0;
    for (uint8_t b : buf) v = (v << 8) | b;
    return v % n;
}

void flip_byte(Bytes& bytes, size_t pos, crypto::RandomSource& rng) {
    uint8_t delta = 0;
    while (delta == 0) {
        uint8_t b;
        rng.fill({&b, 1});
        delta = b;
    }
    bytes[pos] ^= delta;
}

}  // namespace

bool tamper(const fs::path& path, TamperKind kind, crypto::RandomSource& rng) {
    if (kind == TamperKind::delete_chunk) return fs::remove(path);

    Bytes bytes = read_file(path);
    if (kind == TamperKind::truncate_file) {
        size_t cut = 1 + rand_below(rng, std::max<size_t>(bytes.size() / 4, 1));
        bytes.resize(bytes.size() - std::min(cut, bytes.size() - 1));
        write_file(path, bytes);
        return true;
    }

    Layout l = layout_of(bytes);
    switch (kind) {
        case TamperKind::edit_chain_digest: {
            if (l.rows_begin == l.chain_begin) return false;
            size_t span = l.rows_begin - l.chain_begin;
            // Stay inside the unpadded digests: pad slots are not verified.
            size_t real = size_t(l.record_count) * 32;
            flip_byte(bytes, l.chain_begin + rand_below(rng, std::min(span, real)), rng);
            write_file(path, bytes);
            return true;
        }
        case TamperKind::edit_user_digest: {
            size_t real = size_t(l.record_count) * 41;
            if (real == 0) return false;
            flip_byte(bytes, l.rows_begin + rand_below(rng, real), rng);
            write_file(path, bytes);
            return true;
        }
        case TamperKind::edit_proof: {
            size_t span = l.end - l.proof_begin;
            flip_byte(bytes, l.proof_begin + rand_below(rng, span), rng);
            write_file(path, bytes);
            return true;
        }
        default:
            break;
    }

    // Structured record edits: mutate the record list, then recompute the
    // digest sections exactly as the sealing function would have.
    model::SealedChunk c = parse_chunk(bytes);
    size_t n = c.records.size();
    switch (kind) {
        case TamperKind::modify_record: {
            auto& rec = c.records[rand_below(rng, n)];
            switch (rand_below(rng, 3)) {
                case 0:
                    rec.time.epoch_seconds ^= 1 + rand_below(rng, 1u << 20);
                    break;
                case 1:
                    flip_byte(rec.sensor.bytes, rand_below(rng, rec.sensor.bytes.size()), rng);
                    break;
                default:
                    if (rec.kind == model::RecordKind::full)
                        flip_byte(rec.device.bytes, rand_below(rng, rec.device.bytes.size()), rng);
                    else
                        rec.time.epoch_seconds ^= 1;
                    break;
            }
            break;
        }
        case TamperKind::insert_record: {
            model::StoredRecord rec = c.records[rand_below(rng, n)];
            rec.time.epoch_seconds += 1 + rand_below(rng, 1000);
            c.records.insert(c.records.begin() + long(rand_below(rng, n + 1)), rec);
            break;
        }
        case TamperKind::delete_record: {
            if (n < 2) return false;
            c.records.erase(c.records.begin() + long(rand_below(rng, n)));
            break;
        }
        case TamperKind::truncate_record: {
            if (n < 2) return false;
            c.records.pop_back();
            c.chain_digests.erase(c.chain_digests.begin() + long(n) - 1);
            c.user_digests.erase(c.user_digests.begin() + long(n) - 1);
            write_file(path, serialize_chunk(c));
            return true;
        }
        default:
            return false;
    }

    // Simulated sealing pass over the tampered records.
    size_t pads = c.chain_digests.size() - n;
    Digest prev = model::chain_seed();
    std::vector<Digest> chain;
    std::vector<model::UserDigestRow> rows;
    for (const auto& rec : c.records) {
        prev = crypto::sha256(model::encode_reading_for_chain(rec, prev));
        chain.push_back(prev);
        model::UserDigestRow row;
        const Bytes& ident =
            rec.kind == model::RecordKind::full ? rec.device.bytes : rec.sensor.bytes;
        row.o = crypto::sha256(model::encode_user_presence(ident, rec.time));
        row.state = rec.state();
        row.time = rec.time;
        rows.push_back(row);
    }
    for (size_t i = 0; i < pads; ++i) {
        chain.push_back(c.chain_digests[c.chain_digests.size() - pads + i]);
        rows.push_back(c.user_digests[c.user_digests.size() - pads + i]);
    }
    c.chain_digests = std::move(chain);
    c.user_digests = std::move(rows);
    write_file(path, serialize_chunk(c));
    return true;
}

}  // namespace notary::store
