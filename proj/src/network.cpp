#include "linnetcox/network.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "linnetcox/errors.hpp"

namespace linnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd dijkstra(const std::vector<std::vector<Incidence>>& adj,
                         const std::vector<EdgeRecord>& edges, Index source) {
    Eigen::VectorXd dist = Eigen::VectorXd::Constant(static_cast<Index>(adj.size()), kInf);
    using Item = std::pair<double, Index>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    dist[source] = 0.0;
    queue.emplace(0.0, source);
    while (!queue.empty()) {
        auto [d, v] = queue.top();
        queue.pop();
        if (d > dist[v]) continue;
        for (const auto& inc : adj[v]) {
            double nd = d + edges[inc.edge].length;
            if (nd < dist[inc.other]) {
                dist[inc.other] = nd;
                queue.emplace(nd, inc.other);
            }
        }
    }
    return dist;
}

} // namespace

std::string_view to_string(Branch b) { return b == Branch::main ? "main" : "side"; }

Branch branch_from_string(std::string_view s) {
    if (s == "main" || s == "m") return Branch::main;
    if (s == "side" || s == "s") return Branch::side;
    throw ValidationError("unknown branch label '" + std::string(s) + "'");
}

LinearNetwork::LinearNetwork(std::vector<VertexRecord> vertices, std::vector<EdgeRecord> edges)
    : vertices_(std::move(vertices)), edges_(std::move(edges)) {
    if (vertices_.empty()) throw ValidationError("network has no vertices");
    if (edges_.empty()) throw ValidationError("network has no edges");

    std::unordered_map<long, Index> vindex;
    for (Index v = 0; v < vertex_count(); ++v) {
        if (!vindex.emplace(vertices_[v].id, v).second)
            throw ValidationError("duplicate vertex id " + std::to_string(vertices_[v].id));
    }
    std::unordered_set<long> eids;
    adjacency_.resize(vertices_.size());
    tail_.reserve(edges_.size());
    head_.reserve(edges_.size());
    for (Index e = 0; e < edge_count(); ++e) {
        const auto& rec = edges_[e];
        if (!eids.insert(rec.id).second)
            throw ValidationError("duplicate edge id " + std::to_string(rec.id));
        if (!(rec.length > 0.0) || !std::isfinite(rec.length))
            throw ValidationError("edge " + std::to_string(rec.id) + " has nonpositive length");
        auto a = vindex.find(rec.from);
        auto b = vindex.find(rec.to);
        if (a == vindex.end() || b == vindex.end())
            throw ValidationError("edge " + std::to_string(rec.id) + " references an unknown vertex");
        if (a->second == b->second)
            throw ValidationError("edge " + std::to_string(rec.id) + " is a self-loop");
        tail_.push_back(a->second);
        head_.push_back(b->second);
        adjacency_[a->second].push_back({e, b->second, true});
        adjacency_[b->second].push_back({e, a->second, false});
        total_length_ += rec.length;
        if (rec.branch == Branch::main) main_length_ += rec.length;
    }

    const Index n = vertex_count();
    vertex_dist_.resize(n, n);
    for (Index v = 0; v < n; ++v) vertex_dist_.col(v) = dijkstra(adjacency_, edges_, v);
    if (!vertex_dist_.col(0).allFinite()) throw ValidationError("network is disconnected");
    // Symmetrize away round-off from differing summation orders.
    vertex_dist_ = (0.5 * (vertex_dist_ + vertex_dist_.transpose())).eval();

    is_tree_ = edge_count() == n - 1;

    for (Index v = 0; v < n; ++v)
        if (degree(v) == 1) leaves_.push_back(v);
    nearest_leaf_.assign(n, kInf);
    for (Index v = 0; v < n; ++v)
        for (Index leaf : leaves_) nearest_leaf_[v] = std::min(nearest_leaf_[v], vertex_dist_(v, leaf));
}

double LinearNetwork::branch_length(Branch b) const {
    return b == Branch::main ? main_length_ : total_length_ - main_length_;
}

Index LinearNetwork::vertex_index(long id) const {
    for (Index v = 0; v < vertex_count(); ++v)
        if (vertices_[v].id == id) return v;
    throw ValidationError("unknown vertex id " + std::to_string(id));
}

Index LinearNetwork::edge_index(long id) const {
    for (Index e = 0; e < edge_count(); ++e)
        if (edges_[e].id == id) return e;
    throw ValidationError("unknown edge id " + std::to_string(id));
}

void LinearNetwork::check(const NetworkPoint& p) const {
    if (p.edge < 0 || p.edge >= edge_count())
        throw ValidationError("point references edge index " + std::to_string(p.edge) +
                              " which is not on the network");
    if (!(p.offset >= 0.0 && p.offset <= length(p.edge)))
        throw ValidationError("point offset " + std::to_string(p.offset) + " outside edge " +
                              std::to_string(edges_[p.edge].id));
}

std::optional<Index> LinearNetwork::vertex_at(const NetworkPoint& p) const {
    if (p.offset == 0.0) return tail_[p.edge];
    if (p.offset == length(p.edge)) return head_[p.edge];
    return std::nullopt;
}

NetworkPoint LinearNetwork::point_at_vertex(Index v) const {
    Index best = -1;
    bool at_tail = true;
    for (const auto& inc : adjacency_[v]) {
        if (best < 0 || inc.edge < best) {
            best = inc.edge;
            at_tail = inc.at_tail;
        }
    }
    return {best, at_tail ? 0.0 : length(best)};
}

NetworkPoint LinearNetwork::canonical(NetworkPoint p) const {
    check(p);
    if (auto v = vertex_at(p)) return point_at_vertex(*v);
    return p;
}

double LinearNetwork::distance(const NetworkPoint& p, const NetworkPoint& q) const {
    check(p);
    check(q);
    const double lp = length(p.edge), lq = length(q.edge);
    const Index pt = tail_[p.edge], ph = head_[p.edge];
    const Index qt = tail_[q.edge], qh = head_[q.edge];
    double d = std::min({p.offset + vertex_dist_(pt, qt) + q.offset,
                         p.offset + vertex_dist_(pt, qh) + (lq - q.offset),
                         (lp - p.offset) + vertex_dist_(ph, qt) + q.offset,
                         (lp - p.offset) + vertex_dist_(ph, qh) + (lq - q.offset)});
    if (p.edge == q.edge) d = std::min(d, std::abs(p.offset - q.offset));
    return d;
}

double LinearNetwork::distance_to_vertex(const NetworkPoint& p, Index v) const {
    return std::min(p.offset + vertex_dist_(tail_[p.edge], v),
                    length(p.edge) - p.offset + vertex_dist_(head_[p.edge], v));
}

double LinearNetwork::leaf_distance(const NetworkPoint& p) const {
    return std::min(p.offset + nearest_leaf_[tail_[p.edge]],
                    length(p.edge) - p.offset + nearest_leaf_[head_[p.edge]]);
}

// ---------------------------------------------------------------------------

PointPattern::PointPattern(NetworkPtr net, std::vector<NetworkPoint> points)
    : net_(std::move(net)), points_(std::move(points)) {
    if (!net_) throw ValidationError("point pattern without a network");
    for (auto& p : points_) p = net_->canonical(p);
}

std::size_t PointPattern::count(Branch b) const {
    return static_cast<std::size_t>(std::count_if(points_.begin(), points_.end(), [&](const auto& p) {
        return net_->branch(p.edge) == b;
    }));
}

Eigen::MatrixXd pairwise_distances(const PointPattern& x) {
    const auto n = static_cast<Index>(x.size());
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = x.network().distance(x[i], x[j]);
    return d;
}

// ---------------------------------------------------------------------------

double SubNetwork::measure() const {
    double m = 0.0;
    for (const auto& edge : intervals)
        for (const auto& iv : edge) m += iv.length();
    return m;
}

bool SubNetwork::contains(const LinearNetwork& net, const NetworkPoint& p) const {
    auto on_edge = [&](const NetworkPoint& q) {
        if (q.edge >= static_cast<Index>(intervals.size())) return false;
        return std::any_of(intervals[q.edge].begin(), intervals[q.edge].end(),
                           [&](const Interval& iv) { return iv.contains(q.offset); });
    };
    if (on_edge(p)) return true;
    // A junction point belongs to every incident edge.
    if (auto v = net.vertex_at(p)) {
        for (const auto& inc : net.incident(*v))
            if (on_edge({inc.edge, inc.at_tail ? 0.0 : net.length(inc.edge)})) return true;
    }
    return false;
}

std::size_t SubNetwork::count(const LinearNetwork& net, std::span<const NetworkPoint> pts) const {
    return static_cast<std::size_t>(
        std::count_if(pts.begin(), pts.end(), [&](const auto& p) { return contains(net, p); }));
}

SubNetwork erode(const LinearNetwork& net, double r) {
    if (!(r >= 0.0)) throw ValidationError("erosion radius must be nonnegative");
    SubNetwork out;
    out.intervals.resize(static_cast<std::size_t>(net.edge_count()));
    for (Index e = 0; e < net.edge_count(); ++e) {
        const double len = net.length(e);
        // A point at offset x survives iff x + d_tail > r and (len - x) + d_head > r.
        const double lo = r - net.leaf_distance({e, 0.0}) + 0.0;
        const double hi = len - r + net.leaf_distance({e, len});
        Interval iv;
        iv.lo_open = lo >= 0.0;
        iv.hi_open = hi <= len;
        iv.lo = std::max(lo, 0.0);
        iv.hi = std::min(hi, len);
        if (iv.hi > iv.lo) out.intervals[e].push_back(iv);
    }
    return out;
}

// ---------------------------------------------------------------------------

Lattice make_lattice(const LinearNetwork& net, double spacing) {
    if (!(spacing > 0.0)) throw ValidationError("lattice spacing must be positive");
    Lattice lat;
    lat.site_of.resize(static_cast<std::size_t>(net.edge_count()));
    std::vector<Index> vertex_site(static_cast<std::size_t>(net.vertex_count()), -1);
    for (Index e = 0; e < net.edge_count(); ++e) {
        const double len = net.length(e);
        const auto steps = static_cast<Index>(std::ceil(len / spacing - 1e-9));
        auto& sites = lat.site_of[e];
        for (Index j = 0; j <= steps; ++j) {
            if (j == 0 || j == steps) {
                const Index v = j == 0 ? net.tail(e) : net.head(e);
                if (vertex_site[v] < 0) {
                    vertex_site[v] = static_cast<Index>(lat.points.size());
                    lat.points.push_back(net.point_at_vertex(v));
                }
                sites.push_back(vertex_site[v]);
            } else {
                sites.push_back(static_cast<Index>(lat.points.size()));
                lat.points.push_back({e, len * static_cast<double>(j) / static_cast<double>(steps)});
            }
        }
    }
    return lat;
}

std::vector<NetworkPoint> lattice(const LinearNetwork& net, double spacing) {
    return make_lattice(net, spacing).points;
}

Index Lattice::nearest_site(const LinearNetwork& net, const NetworkPoint& p) const {
    const auto& sites = site_of[p.edge];
    const auto steps = static_cast<double>(sites.size() - 1);
    const double pos = p.offset / net.length(p.edge) * steps;
    auto j = static_cast<Index>(std::floor(pos));
    if (pos - static_cast<double>(j) > 0.5) ++j;
    j = std::clamp<Index>(j, 0, static_cast<Index>(sites.size()) - 1);
    return sites[static_cast<std::size_t>(j)];
}

// ---------------------------------------------------------------------------

SphereCounter::SphereCounter(const LinearNetwork& net, const NetworkPoint& origin) {
    if (!net.is_tree()) throw ValidationError("sphere counts require a tree network");
    net.check(origin);
    // Along each simple path from the origin the distance grows linearly, so
    // each edge piece contributes one level crossing over (d0, d1].
    struct Frame {
        Index vertex;
        Index via;
        double dist;
    };
    std::vector<Frame> stack;
    const Index e0 = origin.edge;
    const double to_tail = origin.offset;
    const double to_head = net.length(e0) - origin.offset;
    if (to_tail > 0.0) { starts_.push_back(0.0); ends_.push_back(to_tail); }
    if (to_head > 0.0) { starts_.push_back(0.0); ends_.push_back(to_head); }
    stack.push_back({net.tail(e0), e0, to_tail});
    stack.push_back({net.head(e0), e0, to_head});
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        for (const auto& inc : net.incident(f.vertex)) {
            if (inc.edge == f.via) continue;
            const double far = f.dist + net.length(inc.edge);
            starts_.push_back(f.dist);
            ends_.push_back(far);
            stack.push_back({inc.other, inc.edge, far});
        }
    }
    std::sort(starts_.begin(), starts_.end());
    std::sort(ends_.begin(), ends_.end());
}

int SphereCounter::count(double t) const {
    if (t < 0.0) return 0;
    if (t == 0.0) return 1;
    const auto opened = std::lower_bound(starts_.begin(), starts_.end(), t) - starts_.begin();
    const auto closed = std::lower_bound(ends_.begin(), ends_.end(), t) - ends_.begin();
    return static_cast<int>(opened - closed);
}

int sphere_count(const LinearNetwork& net, const NetworkPoint& u, double t) {
    return SphereCounter(net, u).count(t);
}

// ---------------------------------------------------------------------------

Simplification simplify_tree_mapped(const LinearNetwork& net) {
    if (!net.is_tree()) throw ValidationError("simplify_tree requires a tree network");
    const Index n = net.vertex_count();
    std::vector<char> removable(static_cast<std::size_t>(n), 0);
    for (Index v = 0; v < n; ++v) {
        if (net.degree(v) != 2) continue;
        auto inc = net.incident(v);
        removable[v] = net.branch(inc[0].edge) == net.branch(inc[1].edge);
    }

    std::vector<VertexRecord> vertices;
    for (Index v = 0; v < n; ++v)
        if (!removable[v]) vertices.push_back(net.vertices()[v]);

    struct Step {
        Index edge;
        bool forward;  // traversed tail -> head
    };
    std::vector<EdgeRecord> edges;
    std::vector<Simplification::EdgeMap> edge_map(static_cast<std::size_t>(net.edge_count()));
    std::vector<char> done(static_cast<std::size_t>(net.edge_count()), 0);

    for (Index e = 0; e < net.edge_count(); ++e) {
        if (done[e]) continue;
        // Walk backwards from the tail, then forwards from the head.
        std::vector<Step> back;
        Index v = net.tail(e), via = e;
        while (removable[v]) {
            auto inc = net.incident(v);
            const auto& next = inc[0].edge == via ? inc[1] : inc[0];
            back.push_back({next.edge, !next.at_tail});
            via = next.edge;
            v = next.other;
        }
        const Index start = v;
        std::vector<Step> chain(back.rbegin(), back.rend());
        chain.push_back({e, true});
        v = net.head(e);
        via = e;
        while (removable[v]) {
            auto inc = net.incident(v);
            const auto& next = inc[0].edge == via ? inc[1] : inc[0];
            chain.push_back({next.edge, next.at_tail});
            via = next.edge;
            v = next.other;
        }
        const Index end = v;

        const auto new_index = static_cast<Index>(edges.size());
        double pos = 0.0;
        for (const auto& s : chain) {
            done[s.edge] = 1;
            const double len = net.length(s.edge);
            edge_map[s.edge] = {new_index, s.forward ? pos : pos + len, !s.forward};
            pos += len;
        }
        edges.push_back({net.edges()[e].id, net.vertices()[start].id, net.vertices()[end].id, pos,
                         net.branch(e)});
    }
    return {LinearNetwork(std::move(vertices), std::move(edges)), std::move(edge_map)};
}

LinearNetwork simplify_tree(const LinearNetwork& net) { return simplify_tree_mapped(net).network; }

NetworkPoint Simplification::map(const NetworkPoint& p) const {
    const auto& m = edge_map.at(static_cast<std::size_t>(p.edge));
    const double off = m.reversed ? m.shift - p.offset : m.shift + p.offset;
    const double len = network.length(m.edge);
    return network.canonical({m.edge, std::clamp(off, 0.0, len)});
}

} // namespace linnet
