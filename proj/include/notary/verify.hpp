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

#include "notary/sealing.hpp"
#include "notary/store.hpp"

namespace notary::verify {

enum class FailKind : uint8_t {
    format,            // chunk bytes unparseable / structurally inconsistent
    missing_neighbor,  // g of an adjacent chunk unavailable
    pad_count,         // declared pads exceed the digest slots
    link,              // chain digest i does not recompute
    user_row,          // user digest row i does not recompute from records
    pi_signature,
    pu_signature,
    missing_chunk,     // gap in the requested index range
};

const char* fail_kind_name(FailKind k);

struct Failure {
    FailKind kind;
    size_t index = 0;  // link / row / chunk index where applicable
    std::string detail;
};

struct Result {
    std::optional<Failure> failure;
    bool pass() const { return !failure.has_value(); }

    static Result ok() { return {}; }
    static Result fail(FailKind k, size_t index = 0, std::string detail = {}) {
        return Result{Failure{k, index, std::move(detail)}};
    }
};

// Full-integrity verification from what SP serves plus the trusted public
// key: recomputes the hash chain and the user digest rows from the records,
// then checks both proofs against S_eoc rebuilt from the neighbor strings.
Result verify_auditor(const model::SealedChunk& chunk,
                      const std::optional<model::RandomString>& g_prev,
                      const std::optional<model::RandomString>& g_next,
                      ByteView trusted_public_key);

inline Result verify_retrieved(const store::RetrievedChunk& rc, ByteView trusted_public_key) {
    return verify_auditor(rc.chunk, rc.g_prev, rc.g_next, trusted_public_key);
}

// User-side verification of a served digest view. Presence/absence
// conclusions are withheld when integrity fails.
struct UserReport {
    Result integrity;
    std::vector<model::Timestamp> matched;  // times whose o matched my device
    bool reliable() const { return integrity.pass(); }
    bool present() const { return reliable() && !matched.empty(); }
};

UserReport verify_user(const store::UserChunkView& view, ByteView trusted_public_key,
                       const model::DeviceId& my_device);

// Range verification: every chunk individually plus index contiguity.
struct RangeOutcome {
    std::vector<std::pair<model::ChunkId, Result>> per_chunk;
    std::optional<Failure> range_failure;

    bool pass() const;
};

RangeOutcome verify_range(std::span<const store::RetrievedChunk> chunks,
                          ByteView trusted_public_key,
                          sealing::Parallelism par = sealing::Parallelism::parallel);

}  // namespace notary::verify
