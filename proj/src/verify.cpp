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

#include "notary/verify.hpp"

#include <algorithm>

namespace notary::verify {

const char* fail_kind_name(FailKind k) {
    switch (k) {
        case FailKind::format: return "format";
        case FailKind::missing_neighbor: return "missing-neighbor";
        case FailKind::pad_count: return "pad-count";
        case FailKind::link: return "link";
        case FailKind::user_row: return "user-row";
        case FailKind::pi_signature: return "pi-signature";
        case FailKind::pu_signature: return "pu-signature";
        case FailKind::missing_chunk: return "missing-chunk";
    }
    return "unknown";
}

Result verify_auditor(const model::SealedChunk& chunk,
                      const std::optional<model::RandomString>& g_prev,
                      const std::optional<model::RandomString>& g_next,
                      ByteView trusted_public_key) {
    if (!g_prev) return Result::fail(FailKind::missing_neighbor, 0, "previous chunk string");
    if (!g_next) return Result::fail(FailKind::missing_neighbor, 0, "next chunk string");

    const size_t n = chunk.records.size();
    if (n == 0) return Result::fail(FailKind::format, 0, "no records");
    if (chunk.chain_digests.size() != chunk.user_digests.size())
        return Result::fail(FailKind::format, 0, "digest section size mismatch");
    if (chunk.chain_digests.size() != n + chunk.pi.pad_count)
        return Result::fail(FailKind::pad_count, 0, "slots != records + pads");

    // Chain recomputation; the declared pad slots are not verified.
    Digest prev = model::chain_seed();
    for (size_t i = 0; i < n; ++i) {
        prev = crypto::sha256(model::encode_reading_for_chain(chunk.records[i], prev));
        if (prev != chunk.chain_digests[i]) return Result::fail(FailKind::link, i);
    }

    // User rows must re-derive from the same records.
    Digest hu_end{};
    for (size_t i = 0; i < n; ++i) {
        const auto& rec = chunk.records[i];
        const auto& row = chunk.user_digests[i];
        const Bytes& ident =
            rec.kind == model::RecordKind::full ? rec.device.bytes : rec.sensor.bytes;
        Digest o = crypto::sha256(model::encode_user_presence(ident, rec.time));
        if (o != row.o || row.state != rec.state() || row.time != rec.time)
            return Result::fail(FailKind::user_row, i);
        hu_end = xor_digests(hu_end, crypto::sha256(model::encode_user_link(row.o, row.state)));
    }

    const model::RandomString s_eoc =
        xor_digests(xor_digests(*g_prev, chunk.pi.g), *g_next);
    if (!crypto::verify_sig(trusted_public_key,
                            sealing::pi_message(prev, s_eoc, chunk.pi.pad_count),
                            chunk.pi.signature))
        return Result::fail(FailKind::pi_signature);
    if (!crypto::verify_sig(trusted_public_key, sealing::pu_message(hu_end, s_eoc),
                            chunk.pu.signature))
        return Result::fail(FailKind::pu_signature);
    return Result::ok();
}

UserReport verify_user(const store::UserChunkView& view, ByteView trusted_public_key,
                       const model::DeviceId& my_device) {
    UserReport report;
    if (!view.g_prev || !view.g_next) {
        report.integrity = Result::fail(FailKind::missing_neighbor);
        return report;
    }
    if (view.pad_count > view.rows.size()) {
        report.integrity = Result::fail(FailKind::pad_count);
        return report;
    }
    const size_t real = view.rows.size() - view.pad_count;
    if (real == 0) {
        report.integrity = Result::fail(FailKind::format, 0, "no real rows");
        return report;
    }

    Digest hu_end{};
    for (size_t i = 0; i < real; ++i)
        hu_end = xor_digests(
            hu_end, crypto::sha256(model::encode_user_link(view.rows[i].o, view.rows[i].state)));
    const model::RandomString s_eoc = xor_digests(xor_digests(*view.g_prev, view.g), *view.g_next);
    if (!crypto::verify_sig(trusted_public_key, sealing::pu_message(hu_end, s_eoc),
                            view.pu_signature)) {
        report.integrity = Result::fail(FailKind::pu_signature);
        return report;  // presence conclusions withheld
    }
    report.integrity = Result::ok();
    for (size_t i = 0; i < real; ++i) {
        Digest o = crypto::sha256(model::encode_user_presence(my_device.bytes, view.rows[i].time));
        if (o == view.rows[i].o) report.matched.push_back(view.rows[i].time);
    }
    return report;
}

bool RangeOutcome::pass() const {
    if (range_failure) return false;
    return std::all_of(per_chunk.begin(), per_chunk.end(),
                       [](const auto& p) { return p.second.pass(); });
}

RangeOutcome verify_range(std::span<const store::RetrievedChunk> chunks,
                          ByteView trusted_public_key, sealing::Parallelism par) {
    RangeOutcome out;
    out.per_chunk.resize(chunks.size());

    const auto n = static_cast<ptrdiff_t>(chunks.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (par == sealing::Parallelism::parallel)
#else
    (void)par;
#endif
    for (ptrdiff_t i = 0; i < n; ++i) {
        out.per_chunk[size_t(i)] = {chunks[size_t(i)].chunk.id,
                                    verify_retrieved(chunks[size_t(i)], trusted_public_key)};
    }

    // Contiguity per stream: indices must step by one.
    std::map<std::string, std::vector<uint64_t>> by_stream;
    for (const auto& rc : chunks)
        by_stream[rc.chunk.id.stream_tag].push_back(rc.chunk.id.index);
    for (auto& [tag, idx] : by_stream) {
        std::sort(idx.begin(), idx.end());
        for (size_t i = 1; i < idx.size(); ++i) {
            if (idx[i] == idx[i - 1]) {
                out.range_failure = Failure{FailKind::format, size_t(idx[i]),
                                            "duplicate chunk index in " + tag};
                return out;
            }
            if (idx[i] != idx[i - 1] + 1) {
                out.range_failure = Failure{FailKind::missing_chunk, size_t(idx[i - 1] + 1),
                                            "gap in " + tag};
                return out;
            }
        }
    }
    return out;
}

}  // namespace notary::verify
