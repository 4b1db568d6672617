#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "slrma/error.hpp"

namespace slrma {

/// Adaptive binary model: counts of zeros and ones seen so far, starting
/// at 1/1 and halved once their sum passes kRescaleLimit.
class BitModel {
 public:
  static constexpr std::uint32_t kIncrement = 24;
  static constexpr std::uint32_t kRescaleLimit = 1u << 16;

  std::uint32_t zeros() const { return counts_[0]; }
  std::uint32_t total() const { return counts_[0] + counts_[1]; }

  void update(int bit) {
    counts_[bit] += kIncrement;
    if (total() > kRescaleLimit) {
      counts_[0] = (counts_[0] + 1) / 2;
      counts_[1] = (counts_[1] + 1) / 2;
    }
  }

 private:
  std::uint32_t counts_[2] = {1, 1};
};

inline constexpr std::uint32_t kRangeTop = 1u << 24;

// Carry-propagating range encoder: 32-bit range, 64-bit low with a
// one-byte cache plus a run of pending 0xFF bytes.
class RangeEncoder {
 public:
  void encode(BitModel& model, int bit) {
    const std::uint32_t bound = (range_ / model.total()) * model.zeros();
    if (bit == 0) {
      range_ = bound;
    } else {
      low_ += bound;
      range_ -= bound;
    }
    model.update(bit);
    while (range_ < kRangeTop) {
      range_ <<= 8;
      shift_low();
    }
  }

  std::vector<std::uint8_t> finish() {
    for (int i = 0; i < 5; ++i) shift_low();
    return std::move(out_);
  }

 private:
  void shift_low() {
    if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
      const auto carry = static_cast<std::uint8_t>(low_ >> 32);
      std::uint8_t byte = cache_;
      do {
        out_.push_back(static_cast<std::uint8_t>(byte + carry));
        byte = 0xFF;
      } while (--pending_ != 0);
      cache_ = static_cast<std::uint8_t>(low_ >> 24);
    }
    ++pending_;
    low_ = (low_ & 0x00FFFFFFu) << 8;
  }

  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint8_t cache_ = 0;
  std::uint64_t pending_ = 1;
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const std::uint8_t> in) : in_(in) {
    if (in_.size() < 5) fail(Errc::CorruptStream, "entropy stream shorter than its preamble");
    if (in_[0] != 0) fail(Errc::CorruptStream, "entropy stream preamble is not zero");
    for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | next();
  }

  int decode(BitModel& model) {
    const std::uint32_t bound = (range_ / model.total()) * model.zeros();
    int bit;
    if (code_ < bound) {
      range_ = bound;
      bit = 0;
    } else {
      code_ -= bound;
      range_ -= bound;
      bit = 1;
    }
    model.update(bit);
    while (range_ < kRangeTop) {
      range_ <<= 8;
      code_ = (code_ << 8) | next();
    }
    return bit;
  }

  size_t consumed() const { return pos_; }

  // The encoder's flush leaves exactly the bytes the decoder pulls in.
  void expect_end() const {
    if (pos_ != in_.size()) fail(Errc::CorruptStream, "entropy stream has trailing bytes");
  }

 private:
  std::uint32_t next() {
    if (pos_ >= in_.size()) fail(Errc::CorruptStream, "entropy stream ended early");
    return in_[pos_++];
  }

  std::span<const std::uint8_t> in_;
  size_t pos_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint32_t code_ = 0;
};

}  // namespace slrma
