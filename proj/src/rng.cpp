#include "atlaslab/rng.hpp"

namespace atlaslab {

void RngStream::fill_u01(std::span<double> out) {
    std::size_t i = 0;
    if (has_carry_ && !out.empty()) {
        out[0] = carry_;
        has_carry_ = false;
        i = 1;
    }
    const std::size_t remaining = out.size() - i;
    const std::size_t full_blocks = remaining / 2;
    if (full_blocks > 0) {
        kern::active().fill_u01(seed_, replica_, substream_, next_block_,
                                full_blocks, out.data() + i);
        next_block_ += full_blocks;
        i += 2 * full_blocks;
    }
    if (i < out.size()) {
        double pair[2];
        kern::active().fill_u01(seed_, replica_, substream_, next_block_++, 1,
                                pair);
        out[i] = pair[0];
        carry_ = pair[1];
        has_carry_ = true;
    }
}

}  // namespace atlaslab
