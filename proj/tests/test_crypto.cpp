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

#include <bit>
#include <cmath>
#include <set>

#include "notary/crypto.hpp"

using namespace notary;

TEST_CASE("sha256 standard vectors") {
    CHECK(hex_encode(crypto::sha256({})) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    uint8_t zero = 0;
    CHECK(hex_encode(crypto::sha256(ByteView(&zero, 1))) ==
          "6e340b9cffb37a989ca544e6bb780a2c78901d3fb33738768511a30617afa01d");
    Bytes abc = to_bytes("abc");
    CHECK(hex_encode(crypto::sha256(abc)) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("signature round trip over random messages") {
    auto kp = crypto::sign_keygen();
    for (int i = 0; i < 1000; ++i) {
        Bytes msg = crypto::random_bytes(1 + size_t(i) % 96);
        Bytes sig = crypto::sign(kp.secret_key, msg);
        CHECK(crypto::verify_sig(kp.public_key, msg, sig));
    }
}

TEST_CASE("any single message bit flip breaks the signature") {
    auto kp = crypto::sign_keygen();
    Bytes msg = crypto::random_bytes(64);
    Bytes sig = crypto::sign(kp.secret_key, msg);
    for (size_t byte = 0; byte < msg.size(); ++byte) {
        for (int bit = 0; bit < 8; ++bit) {
            Bytes m = msg;
            m[byte] ^= uint8_t(1u << bit);
            CHECK_FALSE(crypto::verify_sig(kp.public_key, m, sig));
        }
    }
}

TEST_CASE("verify is total and keys do not cross") {
    auto kp = crypto::sign_keygen();
    auto other = crypto::sign_keygen();
    Bytes msg = to_bytes("message");
    Bytes sig = crypto::sign(kp.secret_key, msg);
    CHECK_FALSE(crypto::verify_sig(other.public_key, msg, sig));
    CHECK_FALSE(crypto::verify_sig(kp.public_key, msg, Bytes(64, 0)));
    CHECK_FALSE(crypto::verify_sig(kp.public_key, msg, Bytes(12, 0)));  // malformed length
    CHECK_FALSE(crypto::verify_sig(Bytes(3, 1), msg, sig));             // malformed key
}

TEST_CASE("dh agreement symmetry over random pairs") {
    for (int i = 0; i < 100; ++i) {
        auto a = crypto::dh_keygen();
        auto b = crypto::dh_keygen();
        auto s1 = crypto::dh_shared(a.scalar, b.element);
        auto s2 = crypto::dh_shared(b.scalar, a.element);
        REQUIRE(s1.has_value());
        REQUIRE(s2.has_value());
        CHECK(*s1 == *s2);
    }
}

TEST_CASE("dh rejects the identity element") {
    auto a = crypto::dh_keygen();
    Digest zero{};
    CHECK_FALSE(crypto::dh_shared(a.scalar, zero).has_value());
    CHECK_FALSE(crypto::valid_group_element(zero));
}

TEST_CASE("aead round trip and tamper fuzz") {
    Digest key = crypto::random_string();
    Bytes msg = crypto::random_bytes(200);
    Bytes ad = to_bytes("hdr");
    Bytes ct = crypto::aead_encrypt(key, msg, ad);
    auto back = crypto::aead_decrypt(key, ct, ad);
    REQUIRE(back.has_value());
    CHECK(*back == msg);
    CHECK_FALSE(crypto::aead_decrypt(key, ct, to_bytes("other")).has_value());
    for (int i = 0; i < 200; ++i) {
        Bytes bad = ct;
        size_t pos = size_t(i) * 31 % bad.size();
        bad[pos] ^= uint8_t(1 + i % 255);
        CHECK_FALSE(crypto::aead_decrypt(key, bad, ad).has_value());
    }
}

TEST_CASE("public-key encryption of the feed") {
    auto kp = crypto::sign_keygen();
    Bytes msg = to_bytes("reading");
    Bytes ct = crypto::pk_encrypt(kp.public_key, msg);
    auto back = crypto::pk_decrypt(kp, ct);
    REQUIRE(back.has_value());
    CHECK(*back == msg);
    for (int i = 0; i < 100; ++i) {
        Bytes bad = ct;
        bad[size_t(i) * 7 % bad.size()] ^= 0x40;
        CHECK_FALSE(crypto::pk_decrypt(kp, bad).has_value());
    }
    auto other = crypto::sign_keygen();
    CHECK_FALSE(crypto::pk_decrypt(other, ct).has_value());
}

TEST_CASE("kdf separates labels and secrets") {
    Digest s1 = crypto::random_string();
    Digest s2 = crypto::random_string();
    CHECK(crypto::kdf(s1, "session") != crypto::kdf(s1, "mac"));
    CHECK(crypto::kdf(s1, "session") != crypto::kdf(s2, "session"));
    CHECK(crypto::kdf(s1, "session") == crypto::kdf(s1, "session"));
}

TEST_CASE("random strings: no repeats and monobit sanity") {
    std::set<Digest> seen;
    uint64_t ones = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        Digest d = crypto::random_string();
        CHECK(seen.insert(d).second);
        for (uint8_t b : d) ones += uint64_t(std::popcount(b));
    }
    // 4 sigma around n/2 for n = draws * 256 bits.
    const double n = draws * 256.0;
    const double dev = 4 * std::sqrt(n) / 2;
    CHECK(double(ones) > n / 2 - dev);
    CHECK(double(ones) < n / 2 + dev);
}

TEST_CASE("deterministic random source reproduces and differs across draws") {
    Digest seed{};
    seed[0] = 9;
    crypto::DeterministicRandom a(seed), b(seed);
    Digest d1 = a.random_string(), d2 = a.random_string();
    CHECK(d1 != d2);
    CHECK(b.random_string() == d1);
    CHECK(b.random_string() == d2);
}
