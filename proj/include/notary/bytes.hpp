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

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace notary {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;
using Digest = std::array<uint8_t, 32>;

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline std::string to_string(ByteView b) {
    return std::string(b.begin(), b.end());
}

std::string hex_encode(ByteView b);
Bytes hex_decode(std::string_view s);  // throws FormatError on bad input

inline Digest xor_digests(const Digest& a, const Digest& b) {
    Digest out;
    for (size_t i = 0; i < out.size(); ++i) out[i] = a[i] ^ b[i];
    return out;
}

// Canonical serializer: every variable-length field is a 4-byte big-endian
// length followed by the field bytes. Multi-byte integers are big-endian.
class ByteWriter {
public:
    void u8(uint8_t v) { buf_.push_back(v); }
    void u32(uint32_t v) {
        buf_.push_back(uint8_t(v >> 24));
        buf_.push_back(uint8_t(v >> 16));
        buf_.push_back(uint8_t(v >> 8));
        buf_.push_back(uint8_t(v));
    }
    void u64(uint64_t v) {
        u32(uint32_t(v >> 32));
        u32(uint32_t(v));
    }
    void raw(ByteView b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
    void field(ByteView b) {
        if (b.size() > UINT32_MAX) throw FormatError("field too long");
        u32(uint32_t(b.size()));
        raw(b);
    }
    void field(const std::string& s) { field(ByteView(reinterpret_cast<const uint8_t*>(s.data()), s.size())); }

    const Bytes& bytes() const { return buf_; }
    Bytes take() { return std::move(buf_); }
    size_t size() const { return buf_.size(); }

private:
    Bytes buf_;
};

class ByteReader {
public:
    explicit ByteReader(ByteView data) : data_(data) {}

    uint8_t u8() {
        need(1);
        return data_[pos_++];
    }
    uint32_t u32() {
        need(4);
        uint32_t v = (uint32_t(data_[pos_]) << 24) | (uint32_t(data_[pos_ + 1]) << 16) |
                     (uint32_t(data_[pos_ + 2]) << 8) | uint32_t(data_[pos_ + 3]);
        pos_ += 4;
        return v;
    }
    uint64_t u64() {
        uint64_t hi = u32();
        return (hi << 32) | u32();
    }
    Bytes field() {
        uint32_t n = u32();
        need(n);
        Bytes out(data_.begin() + pos_, data_.begin() + pos_ + n);
        pos_ += n;
        return out;
    }
    Digest digest() {
        need(32);
        Digest d;
        std::memcpy(d.data(), data_.data() + pos_, 32);
        pos_ += 32;
        return d;
    }
    Bytes raw(size_t n) {
        need(n);
        Bytes out(data_.begin() + pos_, data_.begin() + pos_ + n);
        pos_ += n;
        return out;
    }
    size_t remaining() const { return data_.size() - pos_; }
    bool done() const { return pos_ == data_.size(); }
    void expect_done() const {
        if (!done()) throw FormatError("trailing bytes");
    }

private:
    void need(size_t n) const {
        if (data_.size() - pos_ < n) throw FormatError("short read");
    }
    ByteView data_;
    size_t pos_ = 0;
};

}  // namespace notary
