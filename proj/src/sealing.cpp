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

#include "notary/sealing.hpp"

#include <algorithm>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace notary::sealing {

using model::RecordKind;
using model::SensorState;
using model::StoredRecord;

std::vector<Digest> chain_digests(std::span<const StoredRecord> records) {
    std::vector<Digest> out;
    out.reserve(records.size());
    Digest prev = model::chain_seed();
    for (const auto& rec : records) {
        prev = crypto::sha256(model::encode_reading_for_chain(rec, prev));
        out.push_back(prev);
    }
    return out;
}

static model::UserDigestRow user_row_of(const StoredRecord& rec) {
    model::UserDigestRow row;
    const Bytes& ident = rec.kind == RecordKind::full ? rec.device.bytes : rec.sensor.bytes;
    row.o = crypto::sha256(model::encode_user_presence(ident, rec.time));
    row.state = rec.state();
    row.time = rec.time;
    return row;
}

UserDigests user_digest_rows(std::span<const StoredRecord> records, Parallelism par) {
    UserDigests out;
    out.rows.resize(records.size());
    out.hu_end.fill(0);

    const auto n = static_cast<ptrdiff_t>(records.size());
#ifdef _OPENMP
    if (par == Parallelism::parallel) {
        std::vector<Digest> partial(size_t(omp_get_max_threads()), Digest{});
#pragma omp parallel
        {
            Digest local{};
#pragma omp for schedule(static)
            for (ptrdiff_t i = 0; i < n; ++i) {
                out.rows[size_t(i)] = user_row_of(records[size_t(i)]);
                Digest hu = crypto::sha256(
                    model::encode_user_link(out.rows[size_t(i)].o, out.rows[size_t(i)].state));
                local = xor_digests(local, hu);
            }
            partial[size_t(omp_get_thread_num())] = local;
        }
        for (const Digest& p : partial) out.hu_end = xor_digests(out.hu_end, p);
        return out;
    }
#else
    (void)par;
#endif
    for (ptrdiff_t i = 0; i < n; ++i) {
        out.rows[size_t(i)] = user_row_of(records[size_t(i)]);
        Digest hu =
            crypto::sha256(model::encode_user_link(out.rows[size_t(i)].o, out.rows[size_t(i)].state));
        out.hu_end = xor_digests(out.hu_end, hu);
    }
    return out;
}

model::RandomString end_of_chunk(const ChunkStrings& s) {
    return xor_digests(xor_digests(s.prev, s.cur), s.next);
}

Bytes pi_message(const Digest& h_tail, const model::RandomString& s_eoc, uint32_t pad_count) {
    ByteWriter w;
    w.raw(xor_digests(h_tail, s_eoc));
    w.u32(pad_count);
    return w.take();
}

Bytes pu_message(const Digest& hu_end, const model::RandomString& s_eoc) {
    Digest m = xor_digests(hu_end, s_eoc);
    return Bytes(m.begin(), m.end());
}

model::SealedChunk seal_records(model::ChunkId id, model::SealMode mode,
                                std::vector<StoredRecord> records, const ChunkStrings& g,
                                const crypto::SigningKeyPair& sign_keys, size_t pad_to_slots,
                                crypto::RandomSource& rng, Parallelism par) {
    if (records.empty()) throw SealError("cannot seal an empty chunk");
    if (pad_to_slots < records.size()) throw SealError("pad target below record count");

    model::SealedChunk c;
    c.id = std::move(id);
    c.mode = mode;
    c.records = std::move(records);
    c.chain_digests = chain_digests(c.records);
    UserDigests ud = user_digest_rows(c.records, par);
    c.user_digests = std::move(ud.rows);

    const Digest h_tail = c.chain_digests.back();
    const uint32_t pad_count = uint32_t(pad_to_slots - c.records.size());
    const uint64_t last_time = c.records.back().time.epoch_seconds;
    for (uint32_t i = 0; i < pad_count; ++i) {
        // Fake slots are RNG draws, indistinguishable from real digests.
        c.chain_digests.push_back(rng.random_string());
        model::UserDigestRow row;
        row.o = rng.random_string();
        row.state = SensorState::active;
        row.time.epoch_seconds = last_time;
        c.user_digests.push_back(row);
    }

    const model::RandomString s_eoc = end_of_chunk(g);
    c.pi.g = g.cur;
    c.pi.pad_count = pad_count;
    c.pi.signature = crypto::sign(sign_keys.secret_key, pi_message(h_tail, s_eoc, pad_count));
    c.pu.g = g.cur;
    c.pu.signature = crypto::sign(sign_keys.secret_key, pu_message(ud.hu_end, s_eoc));
    return c;
}

model::SealedChunk seal_chunk_entire(model::ChunkId id,
                                     std::span<const model::SensorReading> readings,
                                     const ChunkStrings& g,
                                     const crypto::SigningKeyPair& sign_keys,
                                     crypto::RandomSource& rng, Parallelism par) {
    std::vector<StoredRecord> records;
    records.reserve(readings.size());
    for (const auto& r : readings) {
        if (r.state != SensorState::active)
            throw SealError("entire-mode chunk received a passive reading");
        records.push_back(StoredRecord::make_full(r.device, r.sensor, r.time, r.params));
    }
    size_t slots = records.size();
    return seal_records(std::move(id), model::SealMode::entire, std::move(records), g, sign_keys,
                        slots, rng, par);
}

std::vector<StoredRecord> compress_mixed(std::span<const model::SensorReading> readings) {
    std::vector<StoredRecord> out;
    bool in_zero_run = false;
    for (const auto& r : readings) {
        if (r.state == SensorState::active) {
            out.push_back(StoredRecord::make_full(r.device, r.sensor, r.time, r.params));
            in_zero_run = false;
        } else if (!in_zero_run) {
            out.push_back(StoredRecord::make_tombstone(r.sensor, r.time));
            in_zero_run = true;
        }
        // later readings of a zero run vanish entirely
    }
    return out;
}

model::SealedChunk seal_chunk_mixed(model::ChunkId id,
                                    std::span<const model::SensorReading> readings,
                                    const ChunkStrings& g,
                                    const crypto::SigningKeyPair& sign_keys,
                                    crypto::RandomSource& rng, Parallelism par) {
    std::vector<StoredRecord> records = compress_mixed(readings);
    // All-active input degenerates to the entire-mode chunk byte for byte.
    model::SealMode mode = model::SealMode::mixed;
    if (std::all_of(records.begin(), records.end(),
                    [](const StoredRecord& r) { return r.kind == RecordKind::full; }))
        mode = model::SealMode::entire;
    size_t slots = records.size();
    return seal_records(std::move(id), mode, std::move(records), g, sign_keys, slots, rng, par);
}

std::pair<std::vector<model::UserDigestRow>, model::ProofForUser> seal_chunk_user(
    std::span<const StoredRecord> records, const ChunkStrings& g,
    const crypto::SigningKeyPair& sign_keys, Parallelism par) {
    if (records.empty()) throw SealError("cannot seal an empty chunk");
    UserDigests ud = user_digest_rows(records, par);
    model::ProofForUser pu;
    pu.g = g.cur;
    pu.signature = crypto::sign(sign_keys.secret_key, pu_message(ud.hu_end, end_of_chunk(g)));
    return {std::move(ud.rows), std::move(pu)};
}

uint32_t bucket_index(ByteView id_bytes, uint32_t bucket_count) {
    Digest h = crypto::sha256(id_bytes);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | h[size_t(i)];
    return uint32_t(v % bucket_count);
}

std::string bucket_stream_tag(model::SealMode mode, uint32_t bucket) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%c%04u", mode == model::SealMode::per_user ? 'u' : 's',
                  bucket);
    return buf;
}

OptimizedBatch seal_optimized(std::span<const model::SensorReading> readings, model::SealMode mode,
                              uint32_t bucket_count, uint64_t marker_time,
                              const crypto::SigningKeyPair& sign_keys, crypto::RandomSource& rng,
                              Parallelism par) {
    if (mode != model::SealMode::per_sensor && mode != model::SealMode::per_user)
        throw SealError("seal_optimized requires an optimized mode");
    if (bucket_count == 0) throw SealError("bucket_count must be positive");

    std::vector<std::vector<model::SensorReading>> buckets(bucket_count);
    for (const auto& r : readings) {
        const Bytes& key = mode == model::SealMode::per_sensor ? r.sensor.bytes : r.device.bytes;
        buckets[bucket_index(key, bucket_count)].push_back(r);
    }

    std::vector<std::vector<StoredRecord>> records(bucket_count);
    size_t max_slots = 1;
    for (uint32_t b = 0; b < bucket_count; ++b) {
        if (buckets[b].empty()) {
            records[b].push_back(StoredRecord::make_tombstone(model::empty_marker_sensor(),
                                                              model::Timestamp{marker_time}));
        } else {
            records[b] = compress_mixed(buckets[b]);
        }
        max_slots = std::max(max_slots, records[b].size());
    }

    OptimizedBatch out;
    out.chunks.reserve(bucket_count);
    for (uint32_t b = 0; b < bucket_count; ++b) {
        ChunkStrings g{rng.random_string(), rng.random_string(), rng.random_string()};
        out.chunks.push_back(seal_records(model::ChunkId{bucket_stream_tag(mode, b), 0}, mode,
                                          std::move(records[b]), g, sign_keys, max_slots, rng,
                                          par));
        out.strings.push_back(g);
    }
    return out;
}

Bytes serialize_reading(const model::SensorReading& r) {
    ByteWriter w;
    w.field(r.device.bytes);
    w.field(r.sensor.bytes);
    w.u64(r.time.epoch_seconds);
    w.field(r.params);
    return w.take();
}

model::SensorReading parse_reading(ByteView bytes) {
    ByteReader r(bytes);
    model::SensorReading out;
    out.device.bytes = r.field();
    out.sensor.bytes = r.field();
    out.time.epoch_seconds = r.u64();
    out.params = r.field();
    r.expect_done();
    if (!model::valid_device_id(out.device) || !model::valid_sensor_id(out.sensor))
        throw FormatError("bad reading ids");
    return out;
}

Bytes encrypt_reading(ByteView enclave_public_key, const model::SensorReading& r) {
    return crypto::pk_encrypt(enclave_public_key, serialize_reading(r));
}

Sealer::Sealer(crypto::SigningKeyPair enclave_keys, ChunkPolicy chunk_policy,
               policy::RuleSet rules, bool ack_gated, store::ChunkStore& store,
               crypto::RandomSource& rng, Parallelism par)
    : keys_(std::move(enclave_keys)),
      policy_(chunk_policy),
      rules_(std::move(rules)),
      ack_gated_(ack_gated),
      store_(store),
      rng_(rng),
      par_(par) {
    store::StoreMeta meta;
    meta.mode = policy_.mode;
    meta.bucket_count =
        (policy_.mode == model::SealMode::per_sensor || policy_.mode == model::SealMode::per_user)
            ? policy_.bucket_count
            : 1;
    store_.write_meta(meta);
}

Sealer::StreamState& Sealer::named_stream(const std::string& tag) {
    auto it = streams_.find(tag);
    if (it == streams_.end()) {
        StreamState s;
        s.g_star = rng_.random_string();
        s.g.prev = s.g_star;
        s.g.cur = rng_.random_string();
        s.g.next = rng_.random_string();
        s.next_index = 0;
        it = streams_.emplace(tag, std::move(s)).first;
        store_.set_stream_tail(tag, it->second.g_star, 0, it->second.g.cur);
    }
    return it->second;
}

std::string Sealer::stream_tag_for(const model::SensorReading& reading) const {
    switch (policy_.mode) {
        case model::SealMode::entire:
        case model::SealMode::mixed:
            return "main";
        case model::SealMode::per_sensor:
            return bucket_stream_tag(policy_.mode,
                                     bucket_index(reading.sensor.bytes, policy_.bucket_count));
        case model::SealMode::per_user:
            return bucket_stream_tag(policy_.mode,
                                     bucket_index(reading.device.bytes, policy_.bucket_count));
    }
    throw SealError("bad mode");
}

bool Sealer::ingest_ciphertext(ByteView ciphertext, uint64_t now) {
    auto plain = crypto::pk_decrypt(keys_, ciphertext);
    if (!plain) {
        ++stats_.rejected_decrypt;
        return false;
    }
    try {
        model::SensorReading r = parse_reading(*plain);
        ingest_reading(r, now ? now : r.time.epoch_seconds);
    } catch (const FormatError&) {
        ++stats_.rejected_malformed;
        return false;
    }
    return true;
}

size_t Sealer::ingest_ciphertext_batch(std::span<const Bytes> ciphertexts, uint64_t now) {
    // Decrypt and parse in parallel, then append in arrival order.
    const auto n = static_cast<ptrdiff_t>(ciphertexts.size());
    std::vector<std::optional<model::SensorReading>> decoded(ciphertexts.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (par_ == Parallelism::parallel)
#endif
    for (ptrdiff_t i = 0; i < n; ++i) {
        auto plain = crypto::pk_decrypt(keys_, ciphertexts[size_t(i)]);
        if (!plain) continue;
        try {
            decoded[size_t(i)] = parse_reading(*plain);
        } catch (const FormatError&) {
        }
    }
    size_t ok = 0;
    for (ptrdiff_t i = 0; i < n; ++i) {
        if (decoded[size_t(i)]) {
            const auto& r = *decoded[size_t(i)];
            ingest_reading(r, now ? now : r.time.epoch_seconds);
            ++ok;
        } else {
            ++stats_.rejected_decrypt;
        }
    }
    return ok;
}

void Sealer::ingest_reading(const model::SensorReading& reading, uint64_t now) {
    ++stats_.accepted;
    stats_.latest_time = std::max(stats_.latest_time, reading.time.epoch_seconds);
    SensorState state = policy::evaluate(rules_, ack_gated_ ? &acks_ : nullptr, reading);
    if (state == SensorState::passive && policy_.mode == model::SealMode::entire)
        throw SealError("entire mode cannot attest filtered readings; use mixed");

    const std::string tag = stream_tag_for(reading);
    append(named_stream(tag), tag, reading, state, now);
}

void Sealer::append(StreamState& s, const std::string& tag, const model::SensorReading& reading,
                    SensorState state, uint64_t now) {
    OpenChunk& c = s.chunk;
    if (!c.open) {
        c.open = true;
        c.opened_at = now;
        c.in_zero_run = false;
    }
    if (state == SensorState::active) {
        c.records.push_back(
            StoredRecord::make_full(reading.device, reading.sensor, reading.time, reading.params));
        c.in_zero_run = false;
        ++stats_.stored_active;
    } else if (!c.in_zero_run) {
        c.records.push_back(StoredRecord::make_tombstone(reading.sensor, reading.time));
        c.in_zero_run = true;
        ++stats_.tombstones;
    } else {
        ++stats_.dropped_passive;
        return;
    }
    c.record_bytes += store::record_wire_size(c.records.back());

    if (c.record_bytes >= policy_.max_bytes) {
        // Size overflow seals this buffer alone; age expiry is what closes
        // a whole batch in the optimized modes.
        close_stream(tag, s, now, c.records.size(), false);
    }
}

void Sealer::close_stream(const std::string& tag, StreamState& s, uint64_t now,
                          size_t pad_to_slots, bool emit_marker) {
    OpenChunk& c = s.chunk;
    if (c.records.empty()) {
        if (!emit_marker) return;
        c.records.push_back(StoredRecord::make_tombstone(model::empty_marker_sensor(),
                                                         model::Timestamp{now}));
    }
    model::SealMode chunk_mode = policy_.mode;
    if (policy_.mode == model::SealMode::mixed &&
        std::all_of(c.records.begin(), c.records.end(),
                    [](const StoredRecord& r) { return r.kind == RecordKind::full; }))
        chunk_mode = model::SealMode::entire;

    model::SealedChunk sealed = seal_records(
        model::ChunkId{tag, s.next_index}, chunk_mode, std::move(c.records), s.g, keys_,
        std::max(pad_to_slots, size_t(1)), rng_, par_);
    store_.put_chunk(sealed);
    ++stats_.chunks_sealed;

    s.next_index += 1;
    s.ever_sealed = true;
    s.last_close = now;
    s.g.prev = s.g.cur;
    s.g.cur = s.g.next;
    s.g.next = rng_.random_string();
    store_.set_stream_tail(tag, s.g_star, s.next_index, s.g.cur);
    c = OpenChunk{};
}

void Sealer::close_batch(uint64_t now, bool include_idle) {
    const bool optimized = policy_.mode == model::SealMode::per_sensor ||
                           policy_.mode == model::SealMode::per_user;
    if (optimized && include_idle) {
        // Every bucket participates so the batch's outputs carry the same
        // number of digest slots regardless of which sensors were filtered.
        for (uint32_t b = 0; b < policy_.bucket_count; ++b)
            named_stream(bucket_stream_tag(policy_.mode, b));
    }
    size_t max_records = 1;
    for (auto& [tag, s] : streams_) {
        size_t n = s.chunk.records.empty() && include_idle ? 1 : s.chunk.records.size();
        max_records = std::max(max_records, n);
    }
    for (auto& [tag, s] : streams_) {
        if (s.chunk.records.empty() && !include_idle) continue;
        close_stream(tag, s, now, optimized ? max_records : s.chunk.records.size(), include_idle);
    }
}

void Sealer::tick(uint64_t now) {
    bool expired = false;
    for (auto& [tag, s] : streams_) {
        if (s.chunk.open && now >= s.chunk.opened_at + policy_.max_age_sec) expired = true;
        // An idle stream that has sealed before owes a marker chunk once
        // the interval elapses, so a one-chunk gap stays distinguishable
        // from deleted data.
        if (!s.chunk.open && s.ever_sealed && now >= s.last_close + policy_.max_age_sec)
            expired = true;
    }
    if (expired) close_batch(now, true);
}

void Sealer::flush(uint64_t now) {
    close_batch(now, false);
}

policy::NoticeBundle Sealer::publish_rule(const policy::DataCaptureRule& rule,
                                          ByteView notifier_public_key) {
    // Enforcement precedes notification availability.
    rules_.rules.push_back(rule);
    rules_.digest = policy::ruleset_digest(rules_.default_polarity, rules_.rules);
    return policy::seal_notice(rule, keys_, notifier_public_key);
}

bool Sealer::register_ack(const policy::Acknowledgment& ack, ByteView device_public_key) {
    return acks_.register_ack(rules_, ack, device_public_key);
}

}  // namespace notary::sealing
