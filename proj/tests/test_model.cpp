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

#include <doctest.h>

#include <random>

#include "notary/crypto.hpp"
#include "notary/model.hpp"

using namespace notary;
using model::RecordKind;
using model::StoredRecord;

namespace {

// Shared fixture ids; expected digests below were produced by the
// straight-line reference in tests/golden/make_golden.py.
const model::DeviceId kD1{hex_decode("112233445501")};
const model::SensorId kS1{to_bytes("ap-1")};
const model::SensorId kS2{to_bytes("ap-3")};

StoredRecord random_record(std::mt19937_64& rng) {
    StoredRecord r;
    r.kind = rng() % 2 ? RecordKind::full : RecordKind::tombstone;
    auto rand_id = [&](size_t max_len) {
        Bytes b(1 + rng() % max_len);
        for (auto& c : b) c = uint8_t(rng());
        return b;
    };
    if (r.kind == RecordKind::full) r.device.bytes = rand_id(12);
    r.sensor.bytes = rand_id(12);
    r.time.epoch_seconds = rng() % (1ull << 40);
    return r;
}

}  // namespace

TEST_CASE("chain seed is the hash of one zero byte") {
    CHECK(hex_encode(model::chain_seed()) ==
          "6e340b9cffb37a989ca544e6bb780a2c78901d3fb33738768511a30617afa01d");
}

TEST_CASE("chain encoding matches the reference byte layout") {
    StoredRecord full = StoredRecord::make_full(kD1, kS1, model::Timestamp{1000});
    CHECK(hex_encode(model::encode_reading_for_chain(full, model::chain_seed())) ==
          "000000061122334455010000000461702d3100000001010000000800000000000003e8000000206e"
          "340b9cffb37a989ca544e6bb780a2c78901d3fb33738768511a30617afa01d");

    StoredRecord tomb = StoredRecord::make_tombstone(kS2, model::Timestamp{7});
    CHECK(hex_encode(model::encode_reading_for_chain(tomb, model::chain_seed())) ==
          "0000000461702d330000000100000000080000000000000007000000206e340b9cffb37a989ca544"
          "e6bb780a2c78901d3fb33738768511a30617afa01d");
}

TEST_CASE("params never enter the chain encoding") {
    StoredRecord bare = StoredRecord::make_full(kD1, kS1, model::Timestamp{42});
    StoredRecord with_params = StoredRecord::make_full(kD1, kS1, model::Timestamp{42},
                                                       to_bytes("rssi=-60;snr=25"));
    CHECK(model::encode_reading_for_chain(bare, model::chain_seed()) ==
          model::encode_reading_for_chain(with_params, model::chain_seed()));
}

TEST_CASE("encode/decode round trip") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 500; ++i) {
        StoredRecord r = random_record(rng);
        Digest prev;
        for (auto& b : prev) b = uint8_t(rng());
        auto decoded = model::decode_chain_encoding(model::encode_reading_for_chain(r, prev));
        CHECK(decoded.record == r);
        CHECK(decoded.prev == prev);
    }
}

TEST_CASE("encoding injectivity under randomized collision search") {
    // 1e5 random record pairs; any collision of encodings for distinct
    // records falsifies the length-prefix design.
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100000; ++i) {
        StoredRecord a = random_record(rng);
        StoredRecord b = random_record(rng);
        Digest prev{};
        Bytes ea = model::encode_reading_for_chain(a, prev);
        Bytes eb = model::encode_reading_for_chain(b, prev);
        CHECK((ea == eb) == (a == b));
    }
}

TEST_CASE("full and tombstone encodings are disjoint") {
    // A tombstone whose sensor equals a full record's device still differs:
    // field counts and the state byte separate the two shapes.
    StoredRecord full = StoredRecord::make_full(model::DeviceId{to_bytes("ap-1")}, kS1,
                                                model::Timestamp{5});
    StoredRecord tomb = StoredRecord::make_tombstone(model::SensorId{to_bytes("ap-1")},
                                                     model::Timestamp{5});
    CHECK(model::encode_reading_for_chain(full, model::chain_seed()) !=
          model::encode_reading_for_chain(tomb, model::chain_seed()));
}

TEST_CASE("same device at two times yields distinct presence digests") {
    Bytes a = model::encode_user_presence(kD1.bytes, model::Timestamp{1000});
    Bytes b = model::encode_user_presence(kD1.bytes, model::Timestamp{1001});
    CHECK(a != b);
    CHECK(crypto::sha256(a) != crypto::sha256(b));
}

TEST_CASE("id validation bounds") {
    CHECK(!model::valid_device_id(model::DeviceId{}));
    CHECK(model::valid_device_id(model::DeviceId{Bytes(32, 1)}));
    CHECK(!model::valid_device_id(model::DeviceId{Bytes(33, 1)}));
    CHECK(model::valid_sensor_id(model::SensorId{Bytes(1, 0)}));
}

TEST_CASE("hex round trip") {
    Bytes b = hex_decode("00ff10ab");
    CHECK(hex_encode(b) == "00ff10ab");
    CHECK_THROWS_AS(hex_decode("0g"), FormatError);
    CHECK_THROWS_AS(hex_decode("abc"), FormatError);
}
