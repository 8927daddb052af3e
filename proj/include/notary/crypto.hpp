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

#include <optional>

#include "notary/bytes.hpp"

namespace notary::crypto {

class CryptoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Idempotent; called lazily by every entry point but cheap to call up front.
void init();

constexpr size_t kSignPublicBytes = 32;
constexpr size_t kSignSecretBytes = 64;
constexpr size_t kSignatureBytes = 64;
constexpr size_t kGroupElementBytes = 32;
constexpr size_t kKeyBytes = 32;

struct SigningKeyPair {
    Bytes public_key;  // kSignPublicBytes
    Bytes secret_key;  // kSignSecretBytes, never leaves the owner's key store
};

Digest sha256(ByteView input);

SigningKeyPair sign_keygen();
SigningKeyPair sign_keygen_from_seed(const Digest& seed);  // deterministic, test fixtures
Bytes sign(ByteView secret_key, ByteView message);
// Total: returns false on any malformed key/signature rather than throwing.
bool verify_sig(ByteView public_key, ByteView message, ByteView signature);

// HMAC-SHA256 with a 32-byte key.
Digest mac(const Digest& mac_key, ByteView message);
// Single-block extract-style KDF: HMAC-SHA256(secret, label).
Digest kdf(const Digest& secret, ByteView label);
inline Digest kdf(const Digest& secret, std::string_view label) {
    return kdf(secret, ByteView(reinterpret_cast<const uint8_t*>(label.data()), label.size()));
}

// X25519 over the curve25519 group.
struct DhKeyPair {
    Digest scalar{};
    Digest element{};
};
DhKeyPair dh_keygen();
bool valid_group_element(const Digest& element);
// Empty on the identity / low-order inputs.
std::optional<Digest> dh_shared(const Digest& scalar, const Digest& peer_element);

// XChaCha20-Poly1305; the random nonce is prepended to the ciphertext.
Bytes aead_encrypt(const Digest& key, ByteView plaintext, ByteView associated = {});
std::optional<Bytes> aead_decrypt(const Digest& key, ByteView ciphertext, ByteView associated = {});

// Public-key encryption of the sensor feed: sealed boxes keyed off the
// recipient's Ed25519 pair (converted to curve25519 internally).
Bytes pk_encrypt(ByteView sign_public_key, ByteView plaintext);
std::optional<Bytes> pk_decrypt(const SigningKeyPair& keys, ByteView ciphertext);

// Source of per-chunk random strings and pad digests. The deterministic
// variant exists so sealed output can be reproduced bit-for-bit in tests.
class RandomSource {
public:
    virtual ~RandomSource() = default;
    virtual void fill(std::span<uint8_t> out) = 0;
    Digest random_string();
};

class SystemRandom final : public RandomSource {
public:
    void fill(std::span<uint8_t> out) override;
};

class DeterministicRandom final : public RandomSource {
public:
    explicit DeterministicRandom(const Digest& seed) : seed_(seed) {}
    void fill(std::span<uint8_t> out) override;

private:
    Digest seed_;
    uint64_t counter_ = 0;
};

Digest random_string();  // from the process-wide system RNG
Bytes random_bytes(size_t n);

}  // namespace notary::crypto
