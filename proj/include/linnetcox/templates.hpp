#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "linnetcox/network.hpp"

namespace linnet {

enum class NetworkTemplate { dendrite, path, star, random_tree };
std::string_view to_string(NetworkTemplate t);
NetworkTemplate network_template_from_string(std::string_view s);

/// Size knobs; unset values take template defaults.
struct TemplateOptions {
    std::optional<double> length;        // path: total length (10)
    std::optional<int> arms;             // star: number of arms (3)
    std::optional<double> arm_length;    // star: arm length (10)
    std::optional<int> edges;            // random-tree: edge count (200)
    std::optional<double> main_length;   // dendrite: |L_m|, drawn from [178, 286] when unset
    std::optional<double> side_length;   // dendrite: |L_s|, drawn from [202, 652] when unset
    std::optional<int> side_branches;    // dendrite: side subtrees, drawn from 4..10 when unset
};

/// Synthetic labelled tree. Deterministic given the seed.
LinearNetwork make_network(NetworkTemplate t, std::uint64_t seed, const TemplateOptions& opts = {});

} // namespace linnet
