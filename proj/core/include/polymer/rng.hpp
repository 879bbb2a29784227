#pragma once

#include <array>
#include <cstdint>

namespace polymer {

// Philox4x32-10 counter-based generator. A stream is identified by
// (seed, stream_id); replicas use stream_id = replica index so ensemble
// results do not depend on how work is split across threads.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key);
};

class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint32_t next_u32();
    std::uint64_t next_u64();
    // Uniform on the open interval (0, 1), 53 bits.
    double uniform();
    // Standard normal by Box-Muller; platform independent, unlike
    // std::normal_distribution.
    double normal();

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t counter_ = 0;
    Philox4x32::Counter buffer_{};
    int buffered_ = 0;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

// splitmix64 finalizer; used to derive independent seeds from (seed, tag).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace polymer
