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

#include "notary/ake.hpp"

#include "notary/sealing.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>

namespace notary::ake {

constexpr size_t kMaxFrameBytes = 1u << 30;

Bytes frame(MsgType type, ByteView payload) {
    ByteWriter w;
    w.u32(uint32_t(payload.size() + 1));
    w.u8(uint8_t(type));
    w.raw(payload);
    return w.take();
}

Frame parse_frame(ByteView bytes) {
    ByteReader r(bytes);
    uint32_t len = r.u32();
    if (len == 0 || len > kMaxFrameBytes) throw FormatError("bad frame length");
    uint8_t type = r.u8();
    if (type < uint8_t(MsgType::msg1) || type > uint8_t(MsgType::error))
        throw FormatError("bad frame type");
    Frame f;
    f.type = MsgType(type);
    f.payload = r.raw(len - 1);
    r.expect_done();
    return f;
}

const VerifierEntry* VerifierRegistry::find(const std::string& v_id) const {
    for (const auto& e : entries)
        if (e.v_id == v_id) return &e;
    return nullptr;
}

Bytes serialize_query(const LogQuery& q) {
    ByteWriter w;
    w.u8(uint8_t(q.kind));
    w.u8(q.stream ? 1 : 0);
    if (q.stream) w.field(*q.stream);
    w.u64(q.from);
    w.u64(q.to);
    w.u32(uint32_t(q.ids.size()));
    for (const auto& id : q.ids) {
        w.field(id.stream_tag);
        w.u64(id.index);
    }
    w.field(q.device);
    return w.take();
}

LogQuery parse_query(ByteView bytes) {
    ByteReader r(bytes);
    LogQuery q;
    uint8_t kind = r.u8();
    if (kind < 1 || kind > 3) throw FormatError("bad query kind");
    q.kind = LogQuery::Kind(kind);
    if (r.u8()) q.stream = to_string(r.field());
    q.from = r.u64();
    q.to = r.u64();
    uint32_t n = r.u32();
    if (n > (1u << 20)) throw FormatError("implausible id count");
    for (uint32_t i = 0; i < n; ++i) {
        model::ChunkId id;
        id.stream_tag = to_string(r.field());
        id.index = r.u64();
        q.ids.push_back(std::move(id));
    }
    q.device = r.field();
    r.expect_done();
    return q;
}

namespace {

// MAC transcripts use the same length-prefixed field encoding as the rest
// of the wire format, so no concatenation ambiguity exists.
Bytes transcript2(const std::string& sp_id, const Digest& gx, const Digest& gy) {
    ByteWriter w;
    w.field(sp_id);
    w.field(gx);
    w.field(gy);
    return w.take();
}

Bytes transcript3(const std::string& v_id, const std::string& sp_id, const Digest& gx,
                  const Digest& gy) {
    ByteWriter w;
    w.field(v_id);
    w.field(sp_id);
    w.field(gx);
    w.field(gy);
    return w.take();
}

SessionKeys derive_keys(const Digest& shared) {
    SessionKeys k;
    k.e = crypto::kdf(shared, "session");
    k.mac_key = crypto::kdf(k.e, "mac");
    return k;
}

Bytes aead_ad(MsgType type, uint64_t seq) {
    ByteWriter w;
    w.u8(uint8_t(type));
    w.u64(seq);
    return w.take();
}

}  // namespace

Initiator::Initiator(std::string v_id, std::optional<crypto::SigningKeyPair> device_keys)
    : v_id_(std::move(v_id)), device_keys_(std::move(device_keys)) {}

Bytes Initiator::msg1() {
    dh_ = crypto::dh_keygen();
    state_ = SessionState::sent_exponent;
    ByteWriter w;
    w.field(dh_.element);
    return w.take();
}

std::optional<std::string> Initiator::on_msg2(ByteView payload) {
    if (state_ != SessionState::sent_exponent) return "unexpected message";
    state_ = SessionState::closed;
    Digest gy;
    std::string sp_id;
    Bytes mac_bytes;
    try {
        ByteReader r(payload);
        Bytes gyb = r.field();
        if (gyb.size() != crypto::kGroupElementBytes) return "bad exponent size";
        std::copy(gyb.begin(), gyb.end(), gy.begin());
        sp_id = to_string(r.field());
        mac_bytes = r.field();
        r.expect_done();
    } catch (const FormatError& e) {
        return std::string("malformed msg2: ") + e.what();
    }
    auto shared = crypto::dh_shared(dh_.scalar, gy);
    if (!shared) return "invalid group element";
    keys_ = derive_keys(*shared);
    Digest expect = crypto::mac(keys_.mac_key, transcript2(sp_id, dh_.element, gy));
    if (mac_bytes.size() != expect.size() ||
        !std::equal(expect.begin(), expect.end(), mac_bytes.begin()))
        return "msg2 mac mismatch";
    peer_exponent_ = gy;
    sp_id_ = sp_id;
    state_ = SessionState::key_derived;
    return std::nullopt;
}

Bytes Initiator::msg3(const LogQuery& query) {
    if (state_ != SessionState::key_derived) throw FormatError("msg3 before msg2");
    Bytes t3 = transcript3(v_id_, sp_id_, dh_.element, peer_exponent_);
    Digest mac3 = crypto::mac(keys_.mac_key, t3);
    ByteWriter inner;
    inner.field(v_id_);
    inner.field(mac3);
    inner.field(serialize_query(query));
    if (device_keys_) {
        inner.field(crypto::sign(device_keys_->secret_key, t3));
    } else {
        inner.field(Bytes{});
    }
    // The initiator's identity travels only inside this AEAD envelope.
    Bytes ct = crypto::aead_encrypt(keys_.e, inner.bytes(), aead_ad(MsgType::msg3, 0));
    state_ = SessionState::authenticated;
    ByteWriter w;
    w.field(ct);
    return w.take();
}

std::optional<Bytes> Initiator::open_response(ByteView payload, std::string* err) {
    try {
        ByteReader r(payload);
        Bytes ct = r.field();
        r.expect_done();
        auto plain = crypto::aead_decrypt(keys_.e, ct, aead_ad(MsgType::response, recv_seq_));
        if (!plain) {
            if (err) *err = "response authentication failed";
            return std::nullopt;
        }
        ++recv_seq_;
        return plain;
    } catch (const FormatError& e) {
        if (err) *err = e.what();
        return std::nullopt;
    }
}

Responder::Responder(std::string sp_id, const VerifierRegistry* registry)
    : sp_id_(std::move(sp_id)), registry_(registry) {}

std::optional<Bytes> Responder::on_msg1(ByteView payload, std::string* err) {
    Digest gx;
    try {
        ByteReader r(payload);
        Bytes gxb = r.field();
        if (gxb.size() != crypto::kGroupElementBytes) throw FormatError("bad exponent size");
        std::copy(gxb.begin(), gxb.end(), gx.begin());
        r.expect_done();
    } catch (const FormatError& e) {
        if (err) *err = e.what();
        state_ = SessionState::closed;
        return std::nullopt;
    }
    dh_ = crypto::dh_keygen();
    auto shared = crypto::dh_shared(dh_.scalar, gx);
    if (!shared) {
        if (err) *err = "invalid group element";
        state_ = SessionState::closed;
        return std::nullopt;
    }
    peer_exponent_ = gx;
    keys_ = derive_keys(*shared);
    state_ = SessionState::key_derived;

    Digest m = crypto::mac(keys_.mac_key, transcript2(sp_id_, gx, dh_.element));
    ByteWriter w;
    w.field(dh_.element);
    w.field(sp_id_);
    w.field(m);
    return w.take();
}

std::optional<Responder::Msg3Result> Responder::on_msg3(ByteView payload, std::string* err) {
    auto abort = [&](const std::string& reason) -> std::optional<Msg3Result> {
        if (err) *err = reason;
        state_ = SessionState::closed;
        return std::nullopt;
    };
    if (state_ != SessionState::key_derived) return abort("unexpected message");

    Bytes ct;
    try {
        ByteReader r(payload);
        ct = r.field();
        r.expect_done();
    } catch (const FormatError& e) {
        return abort(std::string("malformed msg3: ") + e.what());
    }
    auto plain = crypto::aead_decrypt(keys_.e, ct, aead_ad(MsgType::msg3, 0));
    if (!plain) return abort("msg3 authentication failed");

    Msg3Result out;
    Bytes mac_bytes, query_bytes, sig;
    try {
        ByteReader r(*plain);
        out.v_id = to_string(r.field());
        mac_bytes = r.field();
        query_bytes = r.field();
        sig = r.field();
        r.expect_done();
    } catch (const FormatError& e) {
        return abort(std::string("malformed msg3 body: ") + e.what());
    }

    Bytes t3 = transcript3(out.v_id, sp_id_, peer_exponent_, dh_.element);
    Digest expect = crypto::mac(keys_.mac_key, t3);
    if (mac_bytes.size() != expect.size() ||
        !std::equal(expect.begin(), expect.end(), mac_bytes.begin()))
        return abort("msg3 mac mismatch");

    const VerifierEntry* entry = registry_ ? registry_->find(out.v_id) : nullptr;
    if (!entry) return abort("unknown verifier");
    if (entry->role == Role::user) {
        // User sessions additionally prove control of the registered device
        // key over the session transcript.
        if (!crypto::verify_sig(entry->sign_public_key, t3, sig))
            return abort("transcript signature invalid");
    }
    try {
        out.query = parse_query(query_bytes);
    } catch (const FormatError& e) {
        return abort(std::string("bad query: ") + e.what());
    }
    out.verifier = entry;
    state_ = SessionState::authenticated;
    return out;
}

Bytes Responder::make_response(ByteView plaintext) {
    Bytes ct = crypto::aead_encrypt(keys_.e, plaintext, aead_ad(MsgType::response, send_seq_));
    ++send_seq_;
    ByteWriter w;
    w.field(ct);
    return w.take();
}

Bytes serialize_auditor_payload(std::span<const store::RetrievedChunk> chunks) {
    ByteWriter w;
    w.u32(uint32_t(chunks.size()));
    for (const auto& rc : chunks) {
        w.field(store::serialize_chunk(rc.chunk));
        w.u8(rc.g_prev ? 1 : 0);
        if (rc.g_prev) w.raw(*rc.g_prev);
        w.u8(rc.g_next ? 1 : 0);
        if (rc.g_next) w.raw(*rc.g_next);
    }
    return w.take();
}

std::vector<store::RetrievedChunk> parse_auditor_payload(ByteView bytes) {
    ByteReader r(bytes);
    uint32_t n = r.u32();
    // Each entry is at least a length prefix plus a minimal chunk file.
    if (uint64_t(n) * 64 > r.remaining()) throw FormatError("chunk count exceeds payload");
    std::vector<store::RetrievedChunk> out;
    out.reserve(n);
    for (uint32_t i = 0; i < n; ++i) {
        store::RetrievedChunk rc;
        rc.chunk = store::parse_chunk(r.field());
        if (r.u8()) rc.g_prev = r.digest();
        if (r.u8()) rc.g_next = r.digest();
        out.push_back(std::move(rc));
    }
    r.expect_done();
    return out;
}

Bytes serialize_user_payload(std::span<const store::UserChunkView> views) {
    ByteWriter w;
    w.u32(uint32_t(views.size()));
    for (const auto& v : views) w.field(store::serialize_user_view(v));
    return w.take();
}

std::vector<store::UserChunkView> parse_user_payload(ByteView bytes) {
    ByteReader r(bytes);
    uint32_t n = r.u32();
    if (uint64_t(n) * 64 > r.remaining()) throw FormatError("view count exceeds payload");
    std::vector<store::UserChunkView> out;
    out.reserve(n);
    for (uint32_t i = 0; i < n; ++i) out.push_back(store::parse_user_view(r.field()));
    r.expect_done();
    return out;
}

ServedPayload serve_query(const store::ChunkStore& store, const VerifierEntry& verifier,
                          const LogQuery& query) {
    ServedPayload out;
    if (verifier.role == Role::user) {
        if (query.kind != LogQuery::Kind::time_range) {
            out.error = "users may only query by time range";
            return out;
        }
        if (!verifier.device) {
            out.error = "user verifier lacks a registered device";
            return out;
        }
        std::optional<std::string> stream;
        auto meta = store.meta();
        if (meta && meta->mode == model::SealMode::per_user) {
            // Confine the answer to the requester's own bucket.
            stream = sealing::bucket_stream_tag(
                model::SealMode::per_user,
                sealing::bucket_index(verifier.device->bytes, meta->bucket_count));
        }
        auto chunks = store.get_time_range(stream, query.from, query.to);
        std::vector<store::UserChunkView> views;
        views.reserve(chunks.size());
        for (const auto& rc : chunks) views.push_back(store::user_view_of(rc));
        out.plaintext = serialize_user_payload(views);
        return out;
    }

    std::vector<store::RetrievedChunk> chunks;
    switch (query.kind) {
        case LogQuery::Kind::time_range:
            chunks = store.get_time_range(query.stream, query.from, query.to);
            break;
        case LogQuery::Kind::chunk_ids:
            for (const auto& id : query.ids) {
                if (auto rc = store.get_chunk(id)) chunks.push_back(std::move(*rc));
            }
            break;
        case LogQuery::Kind::device_bucket: {
            auto meta = store.meta();
            uint32_t buckets = meta ? meta->bucket_count : 1;
            std::string tag = sealing::bucket_stream_tag(
                model::SealMode::per_user, sealing::bucket_index(query.device, buckets));
            chunks = store.get_index_range(tag, 0, UINT64_MAX);
            break;
        }
    }
    out.plaintext = serialize_auditor_payload(chunks);
    return out;
}

// --- socket plumbing ---------------------------------------------------------

bool send_frame(int fd, MsgType type, ByteView payload) {
    Bytes f = frame(type, payload);
    size_t sent = 0;
    while (sent < f.size()) {
        ssize_t n = ::send(fd, f.data() + sent, f.size() - sent, MSG_NOSIGNAL);
        if (n <= 0) return false;
        sent += size_t(n);
    }
    return true;
}

static bool recv_exact(int fd, uint8_t* buf, size_t n) {
    size_t got = 0;
    while (got < n) {
        ssize_t r = ::recv(fd, buf + got, n - got, 0);
        if (r <= 0) return false;
        got += size_t(r);
    }
    return true;
}

std::optional<Frame> recv_frame(int fd) {
    uint8_t head[4];
    if (!recv_exact(fd, head, 4)) return std::nullopt;
    uint32_t len = (uint32_t(head[0]) << 24) | (uint32_t(head[1]) << 16) |
                   (uint32_t(head[2]) << 8) | uint32_t(head[3]);
    if (len == 0 || len > kMaxFrameBytes) return std::nullopt;
    Bytes body(len);
    if (!recv_exact(fd, body.data(), len)) return std::nullopt;
    Frame f;
    if (body[0] < uint8_t(MsgType::msg1) || body[0] > uint8_t(MsgType::error)) return std::nullopt;
    f.type = MsgType(body[0]);
    f.payload.assign(body.begin() + 1, body.end());
    return f;
}

RetrievalServer::RetrievalServer(const store::ChunkStore& store, VerifierRegistry registry,
                                 std::string sp_id)
    : store_(store), registry_(std::move(registry)), sp_id_(std::move(sp_id)) {}

RetrievalServer::~RetrievalServer() {
    stop();
}

uint16_t RetrievalServer::start(uint16_t port) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw std::runtime_error("socket() failed");
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        ::close(listen_fd_);
        throw std::runtime_error("bind() failed");
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    if (::listen(listen_fd_, 16) != 0) {
        ::close(listen_fd_);
        throw std::runtime_error("listen() failed");
    }
    running_ = true;
    accept_thread_ = std::thread([this] { accept_loop(); });
    return port_;
}

void RetrievalServer::stop() {
    if (!running_.exchange(false)) return;
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    if (accept_thread_.joinable()) accept_thread_.join();
    for (auto& t : workers_)
        if (t.joinable()) t.join();
    workers_.clear();
}

void RetrievalServer::accept_loop() {
    while (running_) {
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) break;
        workers_.emplace_back([this, fd] {
            handle_connection(fd);
            ::close(fd);
        });
    }
}

void RetrievalServer::handle_connection(int fd) {
    auto send_error = [&](const std::string& msg) {
        ByteWriter w;
        w.field(msg);
        send_frame(fd, MsgType::error, w.bytes());
    };

    Responder responder(sp_id_, &registry_);
    auto f1 = recv_frame(fd);
    if (!f1 || f1->type != MsgType::msg1) return send_error("expected msg1");
    std::string err;
    auto m2 = responder.on_msg1(f1->payload, &err);
    if (!m2) return send_error(err);
    if (!send_frame(fd, MsgType::msg2, *m2)) return;

    auto f3 = recv_frame(fd);
    if (!f3 || f3->type != MsgType::msg3) return send_error("expected msg3");
    auto m3 = responder.on_msg3(f3->payload, &err);
    if (!m3) return send_error(err);  // no log bytes leave on a failed handshake

    ServedPayload served = serve_query(store_, *m3->verifier, m3->query);
    if (!served.error.empty()) return send_error(served.error);
    send_frame(fd, MsgType::response, responder.make_response(served.plaintext));
}

static std::string error_text(const Frame& f) {
    try {
        ByteReader r(f.payload);
        return to_string(r.field());
    } catch (const FormatError&) {
        return "unreadable error frame";
    }
}

FetchResult fetch(const std::string& host, uint16_t port, const std::string& v_id,
                  const std::optional<crypto::SigningKeyPair>& device_keys,
                  const LogQuery& query) {
    FetchResult out;
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) {
        out.error = "socket() failed";
        return out;
    }
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        out.error = "bad host address";
        ::close(fd);
        return out;
    }
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        out.error = "connect() failed";
        ::close(fd);
        return out;
    }

    Initiator initiator(v_id, device_keys);
    auto fail = [&](const std::string& msg) {
        out.error = msg;
        ::close(fd);
        return out;
    };
    if (!send_frame(fd, MsgType::msg1, initiator.msg1())) return fail("send msg1 failed");
    auto f2 = recv_frame(fd);
    if (!f2) return fail("connection closed before msg2");
    if (f2->type == MsgType::error) return fail("server: " + error_text(*f2));
    if (f2->type != MsgType::msg2) return fail("unexpected frame");
    if (auto err = initiator.on_msg2(f2->payload)) return fail(*err);
    if (!send_frame(fd, MsgType::msg3, initiator.msg3(query))) return fail("send msg3 failed");

    auto fr = recv_frame(fd);
    if (!fr) return fail("connection closed before response");
    if (fr->type == MsgType::error) return fail("server: " + error_text(*fr));
    if (fr->type != MsgType::response) return fail("unexpected frame");
    std::string err;
    auto plain = initiator.open_response(fr->payload, &err);
    if (!plain) return fail(err);
    out.payload = std::move(*plain);
    ::close(fd);
    return out;
}

}  // namespace notary::ake
