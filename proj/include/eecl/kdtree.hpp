#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "eecl/math.hpp"

namespace eecl {

// Exact nearest-neighbor kd-tree over k-dimensional points. One point per
// node, split axis cycles with depth. Bulk construction splits on the median
// (ties toward the lower insertion index), so rebuilding from the same point
// order always yields the same tree. Single-point insertion is supported and
// keeps queries exact, at the cost of balance.
//
// nearest() returns the point of minimal Euclidean distance; ties are broken
// toward the earliest-inserted point, matching a first-minimum linear scan.
class KdTree {
public:
    KdTree() = default;

    explicit KdTree(int dim) : dim_(dim) {
        if (dim <= 0) throw std::invalid_argument("KdTree: dimension must be positive");
    }

    static KdTree build(int dim, std::vector<Vec> points) {
        KdTree tree(dim);
        for (const Vec& p : points) tree.check_dim(p);
        tree.pts_ = std::move(points);
        tree.rebuild();
        return tree;
    }

    int dim() const { return dim_; }
    std::size_t size() const { return pts_.size(); }
    bool empty() const { return pts_.empty(); }

    // Points in insertion order; index i is insertion id i.
    const std::vector<Vec>& points() const { return pts_; }

    void insert(const Vec& p) {
        check_dim(p);
        const std::size_t id = pts_.size();
        pts_.push_back(p);
        nodes_.push_back(Node{id, 0, -1, -1});
        if (root_ < 0) {
            root_ = static_cast<int>(id);
            return;
        }
        int cur = root_;
        for (;;) {
            Node& n = nodes_[cur];
            // ties go right, preserving "left <= node <= right" on the axis
            int& child = (p[n.axis] < pts_[n.point][n.axis]) ? n.left : n.right;
            if (child < 0) {
                nodes_[id].axis = (n.axis + 1) % dim_;
                child = static_cast<int>(id);
                return;
            }
            cur = child;
        }
    }

    // Median-balanced reconstruction from the current points.
    void rebuild() {
        nodes_.assign(pts_.size(), Node{});
        std::vector<std::size_t> ids(pts_.size());
        std::iota(ids.begin(), ids.end(), std::size_t{0});
        root_ = build_range(ids, 0, ids.size(), 0);
    }

    struct Neighbor {
        std::size_t index;  // insertion id of the nearest stored point
        double distance;    // exact Euclidean distance
    };

    std::optional<Neighbor> nearest(const Vec& query) const {
        check_dim(query);
        if (root_ < 0) return std::nullopt;
        Best best;
        search(root_, query, best);
        return Neighbor{best.id, std::sqrt(best.d2)};
    }

    const Vec& point(std::size_t id) const { return pts_[id]; }

    std::optional<Vec> root_point() const {
        if (root_ < 0) return std::nullopt;
        return pts_[nodes_[root_].point];
    }

    // In-order traversal of stored points; used to check that the tree holds
    // exactly the states it was fed.
    std::vector<Vec> in_order_points() const {
        std::vector<Vec> out;
        out.reserve(pts_.size());
        collect(root_, out);
        return out;
    }

private:
    struct Node {
        std::size_t point = 0;
        int axis = 0;
        int left = -1;
        int right = -1;
    };

    struct Best {
        double d2 = std::numeric_limits<double>::infinity();
        std::size_t id = 0;
    };

    void check_dim(const Vec& p) const {
        if (static_cast<int>(p.size()) != dim_)
            throw std::invalid_argument("KdTree: point has dimension " + std::to_string(p.size()) +
                                        ", expected " + std::to_string(dim_));
    }

    int build_range(std::vector<std::size_t>& ids, std::size_t lo, std::size_t hi, int depth) {
        if (lo >= hi) return -1;
        const int axis = depth % dim_;
        const std::size_t mid = lo + (hi - lo) / 2;
        std::nth_element(ids.begin() + lo, ids.begin() + mid, ids.begin() + hi,
                         [&](std::size_t a, std::size_t b) {
                             if (pts_[a][axis] != pts_[b][axis]) return pts_[a][axis] < pts_[b][axis];
                             return a < b;
                         });
        const std::size_t id = ids[mid];
        nodes_[id] = Node{id, axis, -1, -1};
        nodes_[id].left = build_range(ids, lo, mid, depth + 1);
        nodes_[id].right = build_range(ids, mid + 1, hi, depth + 1);
        return static_cast<int>(id);
    }

    void search(int idx, const Vec& q, Best& best) const {
        const Node& n = nodes_[idx];
        const double d2 = squared_distance(pts_[n.point], q);
        if (d2 < best.d2 || (d2 == best.d2 && n.point < best.id)) {
            best.d2 = d2;
            best.id = n.point;
        }
        const double diff = q[n.axis] - pts_[n.point][n.axis];
        const int near = diff < 0.0 ? n.left : n.right;
        const int far = diff < 0.0 ? n.right : n.left;
        if (near >= 0) search(near, q, best);
        // <= keeps equal-distance candidates reachable so the insertion-order
        // tie break stays exact.
        if (far >= 0 && diff * diff <= best.d2) search(far, q, best);
    }

    void collect(int idx, std::vector<Vec>& out) const {
        if (idx < 0) return;
        const Node& n = nodes_[idx];
        collect(n.left, out);
        out.push_back(pts_[n.point]);
        collect(n.right, out);
    }

    int dim_ = 0;
    std::vector<Vec> pts_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace eecl
