#pragma once

#include "bsuv/types.hpp"

namespace bsuv {

/// Stacks current, recent-background and empty-background frames with their
/// FPMs into the 12-channel layout of ChannelOrder. Throws ShapeMismatch
/// unless all six inputs share one resolution.
NetworkInput assemble_input(const ColorFrame& current, const ProbabilityMap& current_fpm,
                            const ColorFrame& recent_bg, const ProbabilityMap& recent_fpm,
                            const ColorFrame& empty_bg, const ProbabilityMap& empty_fpm);

}  // namespace bsuv
