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

#include <atomic>
#include <functional>
#include <thread>

#include "notary/crypto.hpp"
#include "notary/model.hpp"
#include "notary/store.hpp"

namespace notary::ake {

// Wire framing: 4-byte big-endian total length, 1-byte type, payload.
enum class MsgType : uint8_t {
    msg1 = 0x01,      // initiator exponent g^x
    msg2 = 0x02,      // g^y, SP id, MAC(SP id || g^x || g^y)
    msg3 = 0x03,      // AEAD(v id, MAC(v id || SP id || g^x || g^y), query, sig)
    response = 0x04,  // AEAD(log payload)
    error = 0x05,
};

struct Frame {
    MsgType type;
    Bytes payload;
};

Bytes frame(MsgType type, ByteView payload);
Frame parse_frame(ByteView bytes);  // whole buffer must be one frame

enum class Role : uint8_t { auditor = 1, user = 2 };

struct VerifierEntry {
    std::string v_id;
    Role role = Role::auditor;
    std::optional<model::DeviceId> device;  // user role: the device it may query
    Bytes sign_public_key;                  // user role: transcript signature key
};

struct VerifierRegistry {
    std::vector<VerifierEntry> entries;
    const VerifierEntry* find(const std::string& v_id) const;
};

struct LogQuery {
    enum class Kind : uint8_t { time_range = 1, chunk_ids = 2, device_bucket = 3 };
    Kind kind = Kind::time_range;
    std::optional<std::string> stream;
    uint64_t from = 0, to = 0;  // [from, to)
    std::vector<model::ChunkId> ids;
    Bytes device;
};

Bytes serialize_query(const LogQuery& q);
LogQuery parse_query(ByteView bytes);

struct SessionKeys {
    Digest e{};        // session key, kdf(g^xy, "session")
    Digest mac_key{};  // kdf(e, "mac")
};

enum class SessionState : uint8_t { init, sent_exponent, key_derived, authenticated, closed };

// Initiator (verifier) side of the 3-round exchange. Identity is revealed
// only inside the AEAD-protected third message.
class Initiator {
public:
    explicit Initiator(std::string v_id,
                       std::optional<crypto::SigningKeyPair> device_keys = std::nullopt);

    Bytes msg1();
    // Empty result = accept; otherwise the abort reason. Closed on abort.
    std::optional<std::string> on_msg2(ByteView payload);
    Bytes msg3(const LogQuery& query);
    std::optional<Bytes> open_response(ByteView payload, std::string* err = nullptr);

    SessionState state() const { return state_; }
    const SessionKeys& keys() const { return keys_; }
    const std::string& sp_id() const { return sp_id_; }

private:
    std::string v_id_;
    std::optional<crypto::SigningKeyPair> device_keys_;
    crypto::DhKeyPair dh_;
    Digest peer_exponent_{};
    std::string sp_id_;
    SessionKeys keys_;
    SessionState state_ = SessionState::init;
    uint64_t recv_seq_ = 1;
};

// Responder (SP) side. Holds no long-term secret; authorization comes from
// the registered-verifier list checked at message 3.
class Responder {
public:
    Responder(std::string sp_id, const VerifierRegistry* registry);

    std::optional<Bytes> on_msg1(ByteView payload, std::string* err = nullptr);
    struct Msg3Result {
        std::string v_id;
        const VerifierEntry* verifier;
        LogQuery query;
    };
    std::optional<Msg3Result> on_msg3(ByteView payload, std::string* err = nullptr);
    Bytes make_response(ByteView plaintext);

    SessionState state() const { return state_; }
    const SessionKeys& keys() const { return keys_; }

private:
    std::string sp_id_;
    const VerifierRegistry* registry_;
    crypto::DhKeyPair dh_;
    Digest peer_exponent_{};
    SessionKeys keys_;
    SessionState state_ = SessionState::init;
    uint64_t send_seq_ = 1;
};

// Retrieval payloads. Auditors get full chunks with neighbor strings; users
// get digest views only.
Bytes serialize_auditor_payload(std::span<const store::RetrievedChunk> chunks);
std::vector<store::RetrievedChunk> parse_auditor_payload(ByteView bytes);
Bytes serialize_user_payload(std::span<const store::UserChunkView> views);
std::vector<store::UserChunkView> parse_user_payload(ByteView bytes);

// Resolves a query against the store, enforcing the verifier's role: users
// may only issue time-range queries answered with digest views of their own
// bucket (per-user stores) or of the covering chunks otherwise.
struct ServedPayload {
    Bytes plaintext;
    std::string error;  // non-empty = refuse, send nothing
};
ServedPayload serve_query(const store::ChunkStore& store, const VerifierEntry& verifier,
                          const LogQuery& query);

// One session per TCP connection.
class RetrievalServer {
public:
    RetrievalServer(const store::ChunkStore& store, VerifierRegistry registry, std::string sp_id);
    ~RetrievalServer();

    uint16_t start(uint16_t port = 0);  // 0 picks an ephemeral port
    void stop();
    uint16_t port() const { return port_; }

private:
    void accept_loop();
    void handle_connection(int fd);

    const store::ChunkStore& store_;
    VerifierRegistry registry_;
    std::string sp_id_;
    int listen_fd_ = -1;
    uint16_t port_ = 0;
    std::atomic<bool> running_{false};
    std::thread accept_thread_;
    std::vector<std::thread> workers_;
};

struct FetchResult {
    Bytes payload;  // decrypted response
    std::string error;
    bool ok() const { return error.empty(); }
};

FetchResult fetch(const std::string& host, uint16_t port, const std::string& v_id,
                  const std::optional<crypto::SigningKeyPair>& device_keys, const LogQuery& query);

// Socket-level frame IO, exposed for protocol tests.
bool send_frame(int fd, MsgType type, ByteView payload);
std::optional<Frame> recv_frame(int fd);

}  // namespace notary::ake
