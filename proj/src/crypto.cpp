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

#include "notary/crypto.hpp"

#include <sodium.h>

namespace notary::crypto {

void init() {
    static const int rc = sodium_init();
    if (rc < 0) throw CryptoError("sodium_init failed");
}

Digest sha256(ByteView input) {
    init();
    Digest out;
    crypto_hash_sha256(out.data(), input.data(), input.size());
    return out;
}

SigningKeyPair sign_keygen() {
    init();
    SigningKeyPair kp;
    kp.public_key.resize(crypto_sign_PUBLICKEYBYTES);
    kp.secret_key.resize(crypto_sign_SECRETKEYBYTES);
    crypto_sign_keypair(kp.public_key.data(), kp.secret_key.data());
    return kp;
}

SigningKeyPair sign_keygen_from_seed(const Digest& seed) {
    init();
    SigningKeyPair kp;
    kp.public_key.resize(crypto_sign_PUBLICKEYBYTES);
    kp.secret_key.resize(crypto_sign_SECRETKEYBYTES);
    crypto_sign_seed_keypair(kp.public_key.data(), kp.secret_key.data(), seed.data());
    return kp;
}

Bytes sign(ByteView secret_key, ByteView message) {
    init();
    if (secret_key.size() != crypto_sign_SECRETKEYBYTES) throw CryptoError("bad signing key size");
    Bytes sig(crypto_sign_BYTES);
    crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), secret_key.data());
    return sig;
}

bool verify_sig(ByteView public_key, ByteView message, ByteView signature) {
    init();
    if (public_key.size() != crypto_sign_PUBLICKEYBYTES) return false;
    if (signature.size() != crypto_sign_BYTES) return false;
    return crypto_sign_verify_detached(signature.data(), message.data(), message.size(),
                                       public_key.data()) == 0;
}

Digest mac(const Digest& mac_key, ByteView message) {
    init();
    static_assert(crypto_auth_hmacsha256_KEYBYTES == 32);
    Digest out;
    crypto_auth_hmacsha256(out.data(), message.data(), message.size(), mac_key.data());
    return out;
}

Digest kdf(const Digest& secret, ByteView label) {
    return mac(secret, label);
}

DhKeyPair dh_keygen() {
    init();
    DhKeyPair kp;
    randombytes_buf(kp.scalar.data(), kp.scalar.size());
    crypto_scalarmult_base(kp.element.data(), kp.scalar.data());
    return kp;
}

bool valid_group_element(const Digest& element) {
    for (uint8_t b : element)
        if (b != 0) return true;
    return false;
}

std::optional<Digest> dh_shared(const Digest& scalar, const Digest& peer_element) {
    init();
    if (!valid_group_element(peer_element)) return std::nullopt;
    Digest out;
    if (crypto_scalarmult(out.data(), scalar.data(), peer_element.data()) != 0) return std::nullopt;
    if (!valid_group_element(out)) return std::nullopt;
    return out;
}

Bytes aead_encrypt(const Digest& key, ByteView plaintext, ByteView associated) {
    init();
    static_assert(crypto_aead_xchacha20poly1305_ietf_KEYBYTES == 32);
    Bytes out(crypto_aead_xchacha20poly1305_ietf_NPUBBYTES + plaintext.size() +
              crypto_aead_xchacha20poly1305_ietf_ABYTES);
    randombytes_buf(out.data(), crypto_aead_xchacha20poly1305_ietf_NPUBBYTES);
    unsigned long long clen = 0;
    crypto_aead_xchacha20poly1305_ietf_encrypt(
        out.data() + crypto_aead_xchacha20poly1305_ietf_NPUBBYTES, &clen, plaintext.data(),
        plaintext.size(), associated.data(), associated.size(), nullptr, out.data(), key.data());
    out.resize(crypto_aead_xchacha20poly1305_ietf_NPUBBYTES + clen);
    return out;
}

std::optional<Bytes> aead_decrypt(const Digest& key, ByteView ciphertext, ByteView associated) {
    init();
    const size_t npub = crypto_aead_xchacha20poly1305_ietf_NPUBBYTES;
    if (ciphertext.size() < npub + crypto_aead_xchacha20poly1305_ietf_ABYTES) return std::nullopt;
    Bytes out(ciphertext.size() - npub - crypto_aead_xchacha20poly1305_ietf_ABYTES);
    unsigned long long mlen = 0;
    if (crypto_aead_xchacha20poly1305_ietf_decrypt(out.data(), &mlen, nullptr,
                                                   ciphertext.data() + npub,
                                                   ciphertext.size() - npub, associated.data(),
                                                   associated.size(), ciphertext.data(),
                                                   key.data()) != 0) {
        return std::nullopt;
    }
    out.resize(mlen);
    return out;
}

Bytes pk_encrypt(ByteView sign_public_key, ByteView plaintext) {
    init();
    if (sign_public_key.size() != crypto_sign_PUBLICKEYBYTES) throw CryptoError("bad public key size");
    uint8_t box_pk[crypto_box_PUBLICKEYBYTES];
    if (crypto_sign_ed25519_pk_to_curve25519(box_pk, sign_public_key.data()) != 0)
        throw CryptoError("public key conversion failed");
    Bytes out(plaintext.size() + crypto_box_SEALBYTES);
    crypto_box_seal(out.data(), plaintext.data(), plaintext.size(), box_pk);
    return out;
}

std::optional<Bytes> pk_decrypt(const SigningKeyPair& keys, ByteView ciphertext) {
    init();
    if (keys.secret_key.size() != crypto_sign_SECRETKEYBYTES) return std::nullopt;
    if (ciphertext.size() < crypto_box_SEALBYTES) return std::nullopt;
    uint8_t box_pk[crypto_box_PUBLICKEYBYTES];
    uint8_t box_sk[crypto_box_SECRETKEYBYTES];
    if (crypto_sign_ed25519_pk_to_curve25519(box_pk, keys.public_key.data()) != 0)
        return std::nullopt;
    if (crypto_sign_ed25519_sk_to_curve25519(box_sk, keys.secret_key.data()) != 0)
        return std::nullopt;
    Bytes out(ciphertext.size() - crypto_box_SEALBYTES);
    int rc = crypto_box_seal_open(out.data(), ciphertext.data(), ciphertext.size(), box_pk, box_sk);
    sodium_memzero(box_sk, sizeof box_sk);
    if (rc != 0) return std::nullopt;
    return out;
}

Digest RandomSource::random_string() {
    Digest d;
    fill(d);
    return d;
}

void SystemRandom::fill(std::span<uint8_t> out) {
    init();
    randombytes_buf(out.data(), out.size());
}

void DeterministicRandom::fill(std::span<uint8_t> out) {
    init();
    // Counterized so successive draws differ; stream itself is ChaCha20.
    uint8_t seed[randombytes_SEEDBYTES];
    std::memcpy(seed, seed_.data(), 24);
    for (int i = 0; i < 8; ++i) seed[24 + i] = uint8_t(counter_ >> (56 - 8 * i));
    ++counter_;
    randombytes_buf_deterministic(out.data(), out.size(), seed);
}

Digest random_string() {
    SystemRandom r;
    return r.random_string();
}

Bytes random_bytes(size_t n) {
    init();
    Bytes out(n);
    randombytes_buf(out.data(), out.size());
    return out;
}

}  // namespace notary::crypto
