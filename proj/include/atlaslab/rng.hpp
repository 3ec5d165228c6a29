#pragma once

#include <cstdint>
#include <span>

#include "atlaslab/kernels.hpp"

namespace atlaslab {

// Substream conventions used across the lab. Keeping them centralized means a
// report's (seed, replica, substream) triple is enough to replay any draw.
enum : uint32_t {
    kSubstreamInit = 0,   // initial-condition sampling
    kSubstreamPath = 1,   // driving noise of the path
    kSubstreamAux = 2,    // anything experiment-specific
};

// Counter-based stream: the n-th double of a (seed, replica, substream)
// triple is a pure function of those four integers. Consumption order is
// fixed, so mixing single draws and batch fills cannot change the sequence.
class RngStream {
  public:
    RngStream(uint64_t seed, uint32_t replica, uint32_t substream)
        : seed_(seed), replica_(replica), substream_(substream) {}

    double next_u01() {
        if (has_carry_) {
            has_carry_ = false;
            return carry_;
        }
        double pair[2];
        kern::active().fill_u01(seed_, replica_, substream_, next_block_++, 1,
                                pair);
        carry_ = pair[1];
        has_carry_ = true;
        return pair[0];
    }

    double next_normal() { return kern::det_norminv(next_u01()); }

    double next_exponential(double rate) {
        return -kern::det_log(next_u01()) / rate;
    }

    void fill_u01(std::span<double> out);

    void fill_normals(std::span<double> out) {
        fill_u01(out);
        kern::active().normal_from_u01(out.data(), out.size());
    }

    void fill_exponentials(std::span<double> out, double rate) {
        fill_u01(out);
        kern::active().exp_from_u01(out.data(), out.size(), rate);
    }

    uint64_t seed() const { return seed_; }
    uint32_t replica() const { return replica_; }
    uint32_t substream() const { return substream_; }

  private:
    uint64_t seed_;
    uint32_t replica_;
    uint32_t substream_;
    uint64_t next_block_ = 0;
    double carry_ = 0.0;
    bool has_carry_ = false;
};

}  // namespace atlaslab
