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

#include "notary/model.hpp"

#include "notary/crypto.hpp"

namespace notary::model {

static const char* kHexDigits = "0123456789abcdef";

}  // namespace notary::model

namespace notary {

std::string hex_encode(ByteView b) {
    std::string out;
    out.reserve(b.size() * 2);
    for (uint8_t c : b) {
        out.push_back(model::kHexDigits[c >> 4]);
        out.push_back(model::kHexDigits[c & 0xf]);
    }
    return out;
}

static int hex_val(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

Bytes hex_decode(std::string_view s) {
    if (s.size() % 2 != 0) throw FormatError("odd hex length");
    Bytes out;
    out.reserve(s.size() / 2);
    for (size_t i = 0; i < s.size(); i += 2) {
        int hi = hex_val(s[i]), lo = hex_val(s[i + 1]);
        if (hi < 0 || lo < 0) throw FormatError("bad hex digit");
        out.push_back(uint8_t(hi << 4 | lo));
    }
    return out;
}

}  // namespace notary

namespace notary::model {

const SensorId& empty_marker_sensor() {
    static const SensorId marker{Bytes(kMaxIdBytes, 0x00)};
    return marker;
}

bool is_empty_marker(const StoredRecord& r) {
    return r.kind == RecordKind::tombstone && r.sensor == empty_marker_sensor();
}

bool valid_device_id(const DeviceId& d) {
    return !d.bytes.empty() && d.bytes.size() <= kMaxIdBytes;
}

bool valid_sensor_id(const SensorId& s) {
    return !s.bytes.empty() && s.bytes.size() <= kMaxIdBytes;
}

const Digest& chain_seed() {
    static const Digest seed = [] {
        uint8_t zero = 0;
        return crypto::sha256(ByteView(&zero, 1));
    }();
    return seed;
}

Bytes encode_reading_for_chain(const StoredRecord& record, const Digest& prev_digest) {
    ByteWriter w;
    if (record.kind == RecordKind::full) {
        w.field(record.device.bytes);
    }
    w.field(record.sensor.bytes);
    uint8_t state = record.kind == RecordKind::full ? 1 : 0;
    w.field(ByteView(&state, 1));
    ByteWriter tw;
    tw.u64(record.time.epoch_seconds);
    w.field(tw.bytes());
    w.field(prev_digest);
    return w.take();
}

DecodedChainEntry decode_chain_encoding(ByteView encoded) {
    // Count fields first: 5 for a full record, 4 for a tombstone.
    size_t fields = 0;
    {
        ByteReader probe(encoded);
        while (!probe.done()) {
            probe.field();
            ++fields;
        }
    }
    if (fields != 4 && fields != 5) throw FormatError("bad field count");

    ByteReader r(encoded);
    DecodedChainEntry out;
    if (fields == 5) {
        out.record.kind = RecordKind::full;
        out.record.device.bytes = r.field();
    } else {
        out.record.kind = RecordKind::tombstone;
    }
    out.record.sensor.bytes = r.field();
    Bytes state = r.field();
    if (state.size() != 1 || state[0] > 1) throw FormatError("bad state field");
    if ((state[0] == 1) != (fields == 5)) throw FormatError("state/field mismatch");
    Bytes time = r.field();
    if (time.size() != 8) throw FormatError("bad time field");
    out.record.time.epoch_seconds = ByteReader(time).u64();
    Bytes prev = r.field();
    if (prev.size() != 32) throw FormatError("bad prev digest");
    std::copy(prev.begin(), prev.end(), out.prev.begin());
    r.expect_done();
    return out;
}

Bytes encode_user_presence(ByteView id_bytes, Timestamp t) {
    ByteWriter w;
    w.field(id_bytes);
    ByteWriter tw;
    tw.u64(t.epoch_seconds);
    w.field(tw.bytes());
    return w.take();
}

Bytes encode_user_link(const Digest& o, SensorState state) {
    ByteWriter w;
    w.field(o);
    uint8_t s = uint8_t(state);
    w.field(ByteView(&s, 1));
    return w.take();
}

Bytes encode_id_pair(ByteView a, ByteView b) {
    ByteWriter w;
    w.field(a);
    w.field(b);
    return w.take();
}

}  // namespace notary::model
