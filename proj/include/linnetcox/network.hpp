#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace linnet {

using Index = std::ptrdiff_t;

enum class Branch { main, side };

std::string_view to_string(Branch b);
Branch branch_from_string(std::string_view s);

struct VertexRecord {
    long id = 0;
    std::optional<double> x;
    std::optional<double> y;
};

/// An edge as stored in files: endpoints refer to vertex ids, not indices.
struct EdgeRecord {
    long id = 0;
    long from = 0;
    long to = 0;
    double length = 0.0;  // um
    Branch branch = Branch::main;
};

/// Location on a network: internal edge index plus offset from the edge's
/// first endpoint. Use LinearNetwork::canonical before comparing points.
struct NetworkPoint {
    Index edge = 0;
    double offset = 0.0;

    friend bool operator==(const NetworkPoint&, const NetworkPoint&) = default;
    friend auto operator<=>(const NetworkPoint&, const NetworkPoint&) = default;
};

struct Incidence {
    Index edge;
    Index other;      // vertex at the far end
    bool at_tail;     // true if this vertex is the edge's first endpoint
};

/// Connected undirected graph with positive edge lengths. Immutable after
/// construction; the all-pairs vertex distance table is built eagerly.
class LinearNetwork {
public:
    LinearNetwork(std::vector<VertexRecord> vertices, std::vector<EdgeRecord> edges);

    Index vertex_count() const { return static_cast<Index>(vertices_.size()); }
    Index edge_count() const { return static_cast<Index>(edges_.size()); }
    const std::vector<VertexRecord>& vertices() const { return vertices_; }
    const std::vector<EdgeRecord>& edges() const { return edges_; }

    Index tail(Index e) const { return tail_[e]; }
    Index head(Index e) const { return head_[e]; }
    double length(Index e) const { return edges_[e].length; }
    Branch branch(Index e) const { return edges_[e].branch; }

    Index degree(Index v) const { return static_cast<Index>(adjacency_[v].size()); }
    std::span<const Incidence> incident(Index v) const { return adjacency_[v]; }
    const std::vector<Index>& leaves() const { return leaves_; }

    bool is_tree() const { return is_tree_; }
    double total_length() const { return total_length_; }
    double branch_length(Branch b) const;

    Index vertex_index(long id) const;
    Index edge_index(long id) const;

    /// Shortest-path distances between vertices (indices, not ids).
    const Eigen::MatrixXd& vertex_distances() const { return vertex_dist_; }
    double vertex_distance(Index a, Index b) const { return vertex_dist_(a, b); }

    /// Throws ValidationError if the point is off the network.
    void check(const NetworkPoint& p) const;

    /// Junction points are mapped to the lowest incident edge index.
    NetworkPoint canonical(NetworkPoint p) const;
    std::optional<Index> vertex_at(const NetworkPoint& p) const;
    NetworkPoint point_at_vertex(Index v) const;

    double distance(const NetworkPoint& p, const NetworkPoint& q) const;
    double distance_to_vertex(const NetworkPoint& p, Index v) const;
    /// Distance from p to the nearest degree-1 vertex.
    double leaf_distance(const NetworkPoint& p) const;

private:
    std::vector<VertexRecord> vertices_;
    std::vector<EdgeRecord> edges_;
    std::vector<Index> tail_, head_;
    std::vector<std::vector<Incidence>> adjacency_;
    std::vector<Index> leaves_;
    std::vector<double> nearest_leaf_;  // per vertex
    Eigen::MatrixXd vertex_dist_;
    double total_length_ = 0.0;
    double main_length_ = 0.0;
    bool is_tree_ = false;
};

using NetworkPtr = std::shared_ptr<const LinearNetwork>;

/// Finite set of points on a network. Points are canonicalized on entry.
class PointPattern {
public:
    explicit PointPattern(NetworkPtr net, std::vector<NetworkPoint> points = {});

    const LinearNetwork& network() const { return *net_; }
    const NetworkPtr& network_ptr() const { return net_; }
    const std::vector<NetworkPoint>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }
    const NetworkPoint& operator[](std::size_t i) const { return points_[i]; }

    std::size_t count(Branch b) const;

private:
    NetworkPtr net_;
    std::vector<NetworkPoint> points_;
};

/// Symmetric matrix of shortest-path distances between pattern points.
Eigen::MatrixXd pairwise_distances(const PointPattern& x);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool lo_open = false;
    bool hi_open = false;

    double length() const { return hi > lo ? hi - lo : 0.0; }
    bool contains(double t) const {
        return (lo_open ? t > lo : t >= lo) && (hi_open ? t < hi : t <= hi);
    }
};

/// Per-edge disjoint sub-intervals of a network.
struct SubNetwork {
    std::vector<std::vector<Interval>> intervals;  // indexed by edge

    double measure() const;
    bool contains(const LinearNetwork& net, const NetworkPoint& p) const;
    std::size_t count(const LinearNetwork& net, std::span<const NetworkPoint> pts) const;
};

/// Points strictly farther than r from every degree-1 vertex.
SubNetwork erode(const LinearNetwork& net, double r);

struct Lattice {
    std::vector<NetworkPoint> points;
    /// site_of[e][j] is the index into points of the j-th site on edge e.
    std::vector<std::vector<Index>> site_of;

    /// Nearest site on the same edge; ties go to the lower offset.
    Index nearest_site(const LinearNetwork& net, const NetworkPoint& p) const;
};

/// ceil(len/spacing)+1 equidistant sites per edge, shared vertices once.
Lattice make_lattice(const LinearNetwork& net, double spacing);
std::vector<NetworkPoint> lattice(const LinearNetwork& net, double spacing);

/// Counts points at exactly distance t from a fixed origin on a tree.
/// Built once per origin in O(E log E); each query is O(log E).
class SphereCounter {
public:
    SphereCounter(const LinearNetwork& net, const NetworkPoint& origin);
    int count(double t) const;

private:
    std::vector<double> starts_;  // sorted left ends of (d0, d1]
    std::vector<double> ends_;    // sorted right ends
};

int sphere_count(const LinearNetwork& net, const NetworkPoint& u, double t);

struct Simplification {
    LinearNetwork network;
    struct EdgeMap {
        Index edge;      // edge in the simplified network
        double shift;    // offset of the old edge's tail along the new edge
        bool reversed;   // old edge runs head-to-tail along the new edge
    };
    std::vector<EdgeMap> edge_map;  // indexed by old edge

    NetworkPoint map(const NetworkPoint& old_point) const;
};

/// Merges chains of degree-2 vertices that share a branch label. A degree-2
/// vertex between edges of different labels is kept.
Simplification simplify_tree_mapped(const LinearNetwork& net);
LinearNetwork simplify_tree(const LinearNetwork& net);

} // namespace linnet
