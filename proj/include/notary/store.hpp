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

#pragma once

#include <filesystem>
#include <optional>

#include "notary/crypto.hpp"
#include "notary/model.hpp"

namespace notary::store {

// Chunk file layout (bit-exact; golden-tested):
//   "NTRC" | version u8 | mode u8 | stream_tag field | index u64
//   | record_count u32 | pad_count u32
//   | records          (kind u8, [device field], sensor field, time u64,
//                       [params field]; device/params on full records only)
//   | chain digests    ((record_count + pad_count) x 32)
//   | user digest rows ((record_count + pad_count) x (o 32, state u8, time u64))
//   | g 32 | pi signature field | pu signature field
constexpr char kChunkMagic[4] = {'N', 'T', 'R', 'C'};
constexpr uint8_t kFormatVersion = 1;

void write_record(ByteWriter& w, const model::StoredRecord& r);
model::StoredRecord read_record(ByteReader& r);
size_t record_wire_size(const model::StoredRecord& r);

Bytes serialize_chunk(const model::SealedChunk& chunk);
model::SealedChunk parse_chunk(ByteView bytes);  // throws FormatError

// Per-stream sidecar holding the two strings that live in no chunk file:
// the stream seed and the pre-drawn string of the next (unwritten) chunk.
struct StreamManifest {
    std::string stream_tag;
    model::RandomString g_star{};
    uint64_t next_index = 0;
    model::RandomString pending_g{};
};

Bytes serialize_manifest(const StreamManifest& m);
StreamManifest parse_manifest(ByteView bytes);

// A chunk as served to a verifier: the chunk plus the neighbor random
// strings its end-of-chunk value was built from. Absent neighbors are
// reported as such and treated as completeness failures downstream.
struct RetrievedChunk {
    model::SealedChunk chunk;
    std::optional<model::RandomString> g_prev;
    std::optional<model::RandomString> g_next;
};

// The privacy-preserving per-chunk view served to users: digest rows plus
// the user proof; no records and no device ids.
struct UserChunkView {
    model::ChunkId id;
    uint32_t pad_count = 0;
    std::vector<model::UserDigestRow> rows;
    model::RandomString g{};
    Bytes pu_signature;
    std::optional<model::RandomString> g_prev;
    std::optional<model::RandomString> g_next;
};

Bytes serialize_user_view(const UserChunkView& v);
UserChunkView parse_user_view(ByteView bytes);
UserChunkView user_view_of(const RetrievedChunk& rc);

struct StoreMeta {
    model::SealMode mode = model::SealMode::mixed;
    uint32_t bucket_count = 1;
};

struct IndexEntry {
    model::ChunkId id;
    uint64_t t_min = 0;
    uint64_t t_max = 0;
};

class ChunkStore {
public:
    explicit ChunkStore(std::filesystem::path dir, bool create = true);

    std::filesystem::path put_chunk(const model::SealedChunk& chunk);
    void set_stream_tail(const std::string& tag, const model::RandomString& g_star,
                         uint64_t next_index, const model::RandomString& pending_g);
    std::optional<StreamManifest> manifest(const std::string& tag) const;

    void write_meta(const StoreMeta& meta);
    std::optional<StoreMeta> meta() const;

    std::vector<std::string> streams() const;
    std::vector<uint64_t> chunk_indices(const std::string& tag) const;
    std::filesystem::path chunk_path(const model::ChunkId& id) const;

    std::optional<RetrievedChunk> get_chunk(const model::ChunkId& id) const;
    // Sorted by index; includes every existing chunk in [from_index, to_index].
    std::vector<RetrievedChunk> get_index_range(const std::string& tag, uint64_t from_index,
                                                uint64_t to_index) const;
    // All chunks whose record times overlap [t_from, t_to), across all
    // streams unless one is named.
    std::vector<RetrievedChunk> get_time_range(const std::optional<std::string>& tag,
                                               uint64_t t_from, uint64_t t_to) const;

    // The index is a cache rebuilt by scanning chunk files.
    std::vector<IndexEntry> scan_index() const;

    const std::filesystem::path& dir() const { return dir_; }
    uint64_t total_chunk_bytes() const;

private:
    std::optional<model::RandomString> neighbor_g(const std::string& tag, uint64_t index,
                                                  bool next) const;
    std::filesystem::path dir_;
};

// Byte-level adversary used by the tamper-detection suites. Record edits are
// "best effort" forgeries: the chain and user digests are recomputed the way
// the sealing function would, leaving only the signatures stale.
enum class TamperKind : uint8_t {
    modify_record,
    insert_record,
    delete_record,
    truncate_record,   // drop last record + its digest row, no recompute
    edit_chain_digest,
    edit_user_digest,
    edit_proof,        // flip a byte in g or either signature
    truncate_file,
    delete_chunk,
};

constexpr TamperKind kAllTamperKinds[] = {
    TamperKind::modify_record,    TamperKind::insert_record,  TamperKind::delete_record,
    TamperKind::truncate_record,  TamperKind::edit_chain_digest, TamperKind::edit_user_digest,
    TamperKind::edit_proof,       TamperKind::truncate_file,  TamperKind::delete_chunk,
};

// Applies the edit in place; returns false if the file cannot support it
// (e.g. deleting the only record). Test builds only.
bool tamper(const std::filesystem::path& path, TamperKind kind, crypto::RandomSource& rng);

}  // namespace notary::store
