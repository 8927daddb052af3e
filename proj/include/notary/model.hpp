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

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

#include "notary/bytes.hpp"

namespace notary::model {

constexpr size_t kMaxIdBytes = 32;

// Opaque device identifier (MAC-address-like). 1..32 bytes.
struct DeviceId {
    Bytes bytes;
    auto operator<=>(const DeviceId&) const = default;
};

// Opaque sensor identifier. 1..32 bytes.
struct SensorId {
    Bytes bytes;
    auto operator<=>(const SensorId&) const = default;
};

struct Timestamp {
    uint64_t epoch_seconds = 0;
    auto operator<=>(const Timestamp&) const = default;
};

enum class SensorState : uint8_t { passive = 0, active = 1 };

// One connectivity event as received from the controller. `params` is
// carried through to storage but never enters any hash input.
struct SensorReading {
    DeviceId device;
    SensorId sensor;
    SensorState state = SensorState::active;
    Timestamp time;
    Bytes params;

    bool operator==(const SensorReading&) const = default;
};

struct ChunkId {
    std::string stream_tag;
    uint64_t index = 0;
    auto operator<=>(const ChunkId&) const = default;
};

using RandomString = Digest;  // 256-bit random string, one per chunk

enum class RecordKind : uint8_t { full = 1, tombstone = 2 };

// What actually lands on disk. A tombstone marks the start of a run of
// filtered (state 0) readings and never carries a device id.
struct StoredRecord {
    RecordKind kind = RecordKind::full;
    DeviceId device;  // full only
    SensorId sensor;
    Timestamp time;
    Bytes params;  // full only

    SensorState state() const {
        return kind == RecordKind::full ? SensorState::active : SensorState::passive;
    }
    static StoredRecord make_full(DeviceId d, SensorId s, Timestamp t, Bytes params = {}) {
        return StoredRecord{RecordKind::full, std::move(d), std::move(s), t, std::move(params)};
    }
    static StoredRecord make_tombstone(SensorId s, Timestamp t) {
        return StoredRecord{RecordKind::tombstone, {}, std::move(s), t, {}};
    }
    bool operator==(const StoredRecord&) const = default;
};

struct ProofOfIntegrity {
    RandomString g{};
    Bytes signature;
    uint32_t pad_count = 0;

    bool operator==(const ProofOfIntegrity&) const = default;
};

struct ProofForUser {
    RandomString g{};
    Bytes signature;

    bool operator==(const ProofForUser&) const = default;
};

// Per-record digest row served to users: o = H(id || time) plus the state
// and time needed to recompute the hu chain. Device ids never appear here.
struct UserDigestRow {
    Digest o{};
    SensorState state = SensorState::active;
    Timestamp time;

    bool operator==(const UserDigestRow&) const = default;
};

enum class SealMode : uint8_t { entire = 0, mixed = 1, per_sensor = 2, per_user = 3 };

struct SealedChunk {
    ChunkId id;
    SealMode mode = SealMode::mixed;
    std::vector<StoredRecord> records;
    std::vector<Digest> chain_digests;      // one per record, plus pad slots
    std::vector<UserDigestRow> user_digests;  // same count as chain_digests
    ProofOfIntegrity pi;
    ProofForUser pu;

    uint32_t pad_count() const { return pi.pad_count; }
    bool operator==(const SealedChunk&) const = default;
};

// Sensor id reserved for the marker record of an otherwise empty chunk.
const SensorId& empty_marker_sensor();
bool is_empty_marker(const StoredRecord& r);

bool valid_device_id(const DeviceId& d);
bool valid_sensor_id(const SensorId& s);

// Digest seeding the hash chain of every chunk: H(one zero byte).
const Digest& chain_seed();

// Canonical byte encoding hashed into the chain. Every field is emitted as a
// 4-byte big-endian length followed by the field bytes; tombstones omit the
// device field entirely. `params` never appears here.
Bytes encode_reading_for_chain(const StoredRecord& record, const Digest& prev_digest);

// Inverse of encode_reading_for_chain (params-free), for round-trip checks.
struct DecodedChainEntry {
    StoredRecord record;
    Digest prev{};
};
DecodedChainEntry decode_chain_encoding(ByteView encoded);

// Preimage of the per-record user digest o_i: the device id for full
// records, the sensor id for tombstones, each mixed with the time.
Bytes encode_user_presence(ByteView id_bytes, Timestamp t);

// Preimage of hu_i = H(o_i || state).
Bytes encode_user_link(const Digest& o, SensorState state);

// Transcript encoding shared by policy acks and the retrieval handshake.
Bytes encode_id_pair(ByteView a, ByteView b);

}  // namespace notary::model
