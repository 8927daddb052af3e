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

#include <map>

#include "notary/policy.hpp"
#include "notary/store.hpp"

namespace notary::sealing {

class SealError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The user-digest and multi-chunk kernels have OpenMP inner loops; the
// serial path is the reference the parallel one is tested against.
enum class Parallelism { serial, parallel };

// --- digest kernels ---------------------------------------------------------

// Hash chain over the records: h_0 = H(enc(r_0, chain_seed)),
// h_i = H(enc(r_i, h_{i-1})). Inherently sequential.
std::vector<Digest> chain_digests(std::span<const model::StoredRecord> records);

struct UserDigests {
    std::vector<model::UserDigestRow> rows;
    Digest hu_end{};  // XOR fold of hu_i = H(enc(o_i, state_i))
};

// Per-record user digests; rows are independent, so this is the
// data-parallel kernel (the XOR fold is an order-free reduction).
UserDigests user_digest_rows(std::span<const model::StoredRecord> records,
                             Parallelism par = Parallelism::parallel);

// --- proof construction -----------------------------------------------------

struct ChunkStrings {
    model::RandomString prev{};  // g of the previous chunk (g* at stream start)
    model::RandomString cur{};
    model::RandomString next{};  // pre-drawn g of the next chunk
};

model::RandomString end_of_chunk(const ChunkStrings& s);

// PI signs (h_tail XOR S_eoc) || pad_count as a 4-byte big-endian suffix;
// PU signs (hu_end XOR S_eoc).
Bytes pi_message(const Digest& h_tail, const model::RandomString& s_eoc, uint32_t pad_count);
Bytes pu_message(const Digest& hu_end, const model::RandomString& s_eoc);

// --- one-shot chunk sealing -------------------------------------------------

// Builds the fully sealed chunk for a record list: chain, user rows, both
// proofs, and `pad_to_slots - records` fake digest slots drawn from rng.
model::SealedChunk seal_records(model::ChunkId id, model::SealMode mode,
                                std::vector<model::StoredRecord> records, const ChunkStrings& g,
                                const crypto::SigningKeyPair& sign_keys, size_t pad_to_slots,
                                crypto::RandomSource& rng,
                                Parallelism par = Parallelism::parallel);

// All readings must be active; throws SealError otherwise.
model::SealedChunk seal_chunk_entire(model::ChunkId id,
                                     std::span<const model::SensorReading> readings,
                                     const ChunkStrings& g,
                                     const crypto::SigningKeyPair& sign_keys,
                                     crypto::RandomSource& rng,
                                     Parallelism par = Parallelism::parallel);

// Zero-run compression: within a maximal run of consecutive passive
// readings only the first is kept, as a tombstone; the rest vanish.
std::vector<model::StoredRecord> compress_mixed(std::span<const model::SensorReading> readings);

model::SealedChunk seal_chunk_mixed(model::ChunkId id,
                                    std::span<const model::SensorReading> readings,
                                    const ChunkStrings& g,
                                    const crypto::SigningKeyPair& sign_keys,
                                    crypto::RandomSource& rng,
                                    Parallelism par = Parallelism::parallel);

// The user-verification half on its own (rows plus PU).
std::pair<std::vector<model::UserDigestRow>, model::ProofForUser> seal_chunk_user(
    std::span<const model::StoredRecord> records, const ChunkStrings& g,
    const crypto::SigningKeyPair& sign_keys, Parallelism par = Parallelism::parallel);

// Buffer id for optimized modes: H(id) folded to a bucket index.
uint32_t bucket_index(ByteView id_bytes, uint32_t bucket_count);
std::string bucket_stream_tag(model::SealMode mode, uint32_t bucket);

// One batch of per-sensor / per-user sealing: routes readings to buckets,
// seals every bucket (entire if all active, mixed otherwise, an empty-chunk
// marker if empty), and pads all outputs to the largest digest count.
// strings[b] holds the neighbor strings bucket b was sealed against.
struct OptimizedBatch {
    std::vector<model::SealedChunk> chunks;
    std::vector<ChunkStrings> strings;
};
OptimizedBatch seal_optimized(std::span<const model::SensorReading> readings, model::SealMode mode,
                              uint32_t bucket_count, uint64_t marker_time,
                              const crypto::SigningKeyPair& sign_keys, crypto::RandomSource& rng,
                              Parallelism par = Parallelism::parallel);

// --- streaming pipeline (the simulated trusted component) -------------------

struct ChunkPolicy {
    uint64_t max_bytes = 5 * 1024 * 1024;  // record-section cap
    uint64_t max_age_sec = 30 * 60;
    model::SealMode mode = model::SealMode::mixed;
    uint32_t bucket_count = 490;
};

struct IngestStats {
    uint64_t accepted = 0;
    uint64_t rejected_decrypt = 0;
    uint64_t rejected_malformed = 0;
    uint64_t stored_active = 0;
    uint64_t tombstones = 0;
    uint64_t dropped_passive = 0;
    uint64_t chunks_sealed = 0;
    uint64_t latest_time = 0;  // max reading time seen, the simulation clock
};

// The cleartext reading as encrypted by the controller under the trusted
// component's public key.
Bytes serialize_reading(const model::SensorReading& r);
model::SensorReading parse_reading(ByteView bytes);
Bytes encrypt_reading(ByteView enclave_public_key, const model::SensorReading& r);

// Key-isolated sealing process: decrypts the feed, evaluates policy,
// buffers per stream, and emits sealed chunks through the store. Single
// writer; buffers are independent across streams.
class Sealer {
public:
    Sealer(crypto::SigningKeyPair enclave_keys, ChunkPolicy chunk_policy, policy::RuleSet rules,
           bool ack_gated, store::ChunkStore& store, crypto::RandomSource& rng,
           Parallelism par = Parallelism::parallel);

    // Feed entry points. now drives the age cap; 0 lets each reading's own
    // time act as the clock (the normal simulation mode).
    bool ingest_ciphertext(ByteView ciphertext, uint64_t now = 0);
    size_t ingest_ciphertext_batch(std::span<const Bytes> ciphertexts, uint64_t now = 0);
    void ingest_reading(const model::SensorReading& reading, uint64_t now);

    // Age-driven closes; in optimized modes an expiry closes all buckets
    // as one padded batch.
    void tick(uint64_t now);
    // Closes every open buffer (end of stream).
    void flush(uint64_t now);

    // Control plane. publish_rule activates the rule before the notice
    // bundle is handed back for delivery.
    policy::NoticeBundle publish_rule(const policy::DataCaptureRule& rule,
                                      ByteView notifier_public_key);
    bool register_ack(const policy::Acknowledgment& ack, ByteView device_public_key);

    const IngestStats& stats() const { return stats_; }
    const policy::RuleSet& rules() const { return rules_; }

private:
    struct OpenChunk {
        std::vector<model::StoredRecord> records;
        uint64_t record_bytes = 0;
        uint64_t opened_at = 0;
        bool in_zero_run = false;
        bool open = false;
    };
    struct StreamState {
        model::RandomString g_star{};
        ChunkStrings g{};
        uint64_t next_index = 0;
        uint64_t last_close = 0;
        bool ever_sealed = false;
        OpenChunk chunk;
    };

    std::string stream_tag_for(const model::SensorReading& reading) const;
    StreamState& named_stream(const std::string& tag);
    void append(StreamState& s, const std::string& tag, const model::SensorReading& reading,
                model::SensorState state, uint64_t now);
    void close_stream(const std::string& tag, StreamState& s, uint64_t now, size_t pad_to_slots,
                      bool emit_marker);
    void close_batch(uint64_t now, bool include_idle);

    crypto::SigningKeyPair keys_;
    ChunkPolicy policy_;
    policy::RuleSet rules_;
    bool ack_gated_;
    policy::AckRegistry acks_;
    store::ChunkStore& store_;
    crypto::RandomSource& rng_;
    Parallelism par_;
    std::map<std::string, StreamState> streams_;
    IngestStats stats_;
};

}  // namespace notary::sealing
