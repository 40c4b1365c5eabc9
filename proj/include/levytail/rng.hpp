#pragma once

#include <array>
#include <cstdint>

namespace levytail {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter encrypt(Counter ctr, Key key);
};

// One independent substream: key = master seed, counter high words = stream id.
// Substreams never overlap for fewer than 2^64 blocks per stream.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint32_t next_u32();
    // uniform on the open interval (0, 1), 53-bit resolution
    double uniform();
    double normal();
    // standard exponential
    double exponential();

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t block_ = 0;
    Philox4x32::Key key_;
    Philox4x32::Counter buf_{};
    int pos_ = 4;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

}  // namespace levytail
