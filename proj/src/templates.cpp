#include "linnetcox/templates.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "linnetcox/errors.hpp"
#include "linnetcox/random.hpp"

namespace linnet {

std::string_view to_string(NetworkTemplate t) {
    switch (t) {
    case NetworkTemplate::dendrite: return "dendrite";
    case NetworkTemplate::path: return "path";
    case NetworkTemplate::star: return "star";
    case NetworkTemplate::random_tree: return "random-tree";
    }
    return "?";
}

NetworkTemplate network_template_from_string(std::string_view s) {
    for (auto t : {NetworkTemplate::dendrite, NetworkTemplate::path, NetworkTemplate::star, NetworkTemplate::random_tree})
        if (to_string(t) == s) return t;
    throw ValidationError("unknown network template '" + std::string(s) + "'");
}

namespace {

class Builder {
public:
    long vertex() {
        vertices_.push_back({static_cast<long>(vertices_.size()), {}, {}});
        return vertices_.back().id;
    }
    void edge(long from, long to, double length, Branch b) {
        edges_.push_back({static_cast<long>(edges_.size()), from, to, length, b});
    }
    LinearNetwork build() { return LinearNetwork(std::move(vertices_), std::move(edges_)); }

private:
    std::vector<VertexRecord> vertices_;
    std::vector<EdgeRecord> edges_;
};

double positive(std::optional<double> v, double fallback, const char* what) {
    const double x = v.value_or(fallback);
    if (!(x > 0.0) || !std::isfinite(x)) throw ValidationError(std::string(what) + " must be positive");
    return x;
}

LinearNetwork make_path(const TemplateOptions& o) {
    Builder b;
    const long a = b.vertex(), c = b.vertex();
    b.edge(a, c, positive(o.length, 10.0, "length"), Branch::main);
    return b.build();
}

LinearNetwork make_star(const TemplateOptions& o) {
    const int arms = o.arms.value_or(3);
    if (arms < 1) throw ValidationError("a star needs at least one arm");
    const double len = positive(o.arm_length, 10.0, "arm length");
    Builder b;
    const long centre = b.vertex();
    for (int i = 0; i < arms; ++i) b.edge(centre, b.vertex(), len, i < 2 ? Branch::main : Branch::side);
    return b.build();
}

// Uniform attachment tree; the path from vertex 0 to the farthest vertex is
// labelled main.
LinearNetwork make_random_tree(const TemplateOptions& o, Rng& rng) {
    const int n = o.edges.value_or(200);
    if (n < 1) throw ValidationError("a random tree needs at least one edge");
    std::uniform_real_distribution<double> len(1.0, 10.0);
    std::vector<long> parent(static_cast<std::size_t>(n) + 1, -1);
    std::vector<double> length(parent.size(), 0.0), depth(parent.size(), 0.0);
    for (std::size_t v = 1; v < parent.size(); ++v) {
        parent[v] = std::uniform_int_distribution<long>(0, static_cast<long>(v) - 1)(rng);
        length[v] = len(rng);
        depth[v] = depth[static_cast<std::size_t>(parent[v])] + length[v];
    }
    std::vector<bool> main(parent.size(), false);
    for (auto v = static_cast<long>(std::max_element(depth.begin(), depth.end()) - depth.begin()); v > 0;
         v = parent[static_cast<std::size_t>(v)])
        main[static_cast<std::size_t>(v)] = true;
    Builder b;
    for (std::size_t v = 0; v < parent.size(); ++v) b.vertex();
    for (std::size_t v = 1; v < parent.size(); ++v)
        b.edge(parent[v], static_cast<long>(v), length[v], main[v] ? Branch::main : Branch::side);
    return b.build();
}

// Main chain with side subtrees hanging off interior points. A subtree is a
// single edge or a stem that forks into two twigs.
LinearNetwork make_dendrite(const TemplateOptions& o, Rng& rng) {
    auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    const double main_len = o.main_length ? positive(o.main_length, 0.0, "main length") : uniform(178.0, 286.0);
    const double side_len = o.side_length ? positive(o.side_length, 0.0, "side length") : uniform(202.0, 652.0);
    const int count = o.side_branches.value_or(std::uniform_int_distribution<int>(4, 10)(rng));
    if (count < 1) throw ValidationError("a dendrite needs at least one side branch");
    if (main_len < 2.0 * count) throw ValidationError("main branch too short for the requested side branches");

    // Attachment points at least 1 um apart and away from the ends.
    std::vector<double> at;
    for (int tries = 0; static_cast<int>(at.size()) < count; ++tries) {
        if (tries > 10000) throw ValidationError("cannot place side branches on the main branch");
        const double x = uniform(0.05, 0.95) * main_len;
        if (std::all_of(at.begin(), at.end(), [&](double y) { return std::abs(x - y) >= 1.0; })) at.push_back(x);
    }
    std::sort(at.begin(), at.end());

    std::gamma_distribution<double> share(2.0, 1.0);
    std::vector<double> w(static_cast<std::size_t>(count));
    for (auto& x : w) x = share(rng);
    const double wsum = std::accumulate(w.begin(), w.end(), 0.0);

    Builder b;
    long prev = b.vertex();
    double pos = 0.0;
    for (int i = 0; i < count; ++i) {
        const long joint = b.vertex();
        b.edge(prev, joint, at[static_cast<std::size_t>(i)] - pos, Branch::main);
        prev = joint;
        pos = at[static_cast<std::size_t>(i)];

        const double total = side_len * w[static_cast<std::size_t>(i)] / wsum;
        if (uniform(0.0, 1.0) < 0.5) {
            b.edge(joint, b.vertex(), total, Branch::side);
        } else {
            const double stem = total * uniform(0.3, 0.6);
            const double left = (total - stem) * uniform(0.3, 0.7);
            const long fork = b.vertex();
            b.edge(joint, fork, stem, Branch::side);
            b.edge(fork, b.vertex(), left, Branch::side);
            b.edge(fork, b.vertex(), total - stem - left, Branch::side);
        }
    }
    b.edge(prev, b.vertex(), main_len - pos, Branch::main);
    return b.build();
}

} // namespace

LinearNetwork make_network(NetworkTemplate t, std::uint64_t seed, const TemplateOptions& opts) {
    Rng rng = make_rng(seed);
    switch (t) {
    case NetworkTemplate::path: return make_path(opts);
    case NetworkTemplate::star: return make_star(opts);
    case NetworkTemplate::random_tree: return make_random_tree(opts, rng);
    case NetworkTemplate::dendrite: return make_dendrite(opts, rng);
    }
    throw ValidationError("unknown network template");
}

} // namespace linnet
