#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/geometry/boundary_nodes.hpp"

namespace curvtomo {

enum class DomainTag { inner, outer };

/// Values on outgoing boundary nodes laid out as positions x directions
/// (node q = position * n_directions + direction), with the boundary measure
/// weights of the nodes.
struct BoundarySinogram {
    std::vector<BoundaryNode> nodes;
    std::vector<double> values;
    std::size_t n_positions = 0;
    std::size_t n_directions = 0;
    DomainTag tag = DomainTag::outer;

    BoundarySinogram() = default;
    BoundarySinogram(std::vector<BoundaryNode> n, std::size_t positions, std::size_t directions,
                     DomainTag t = DomainTag::outer)
        : nodes(std::move(n)), values(nodes.size(), 0.0), n_positions(positions), n_directions(directions), tag(t) {
        if (nodes.size() != positions * directions) throw ArgumentError("BoundarySinogram: layout does not match node count");
    }

    std::size_t size() const { return nodes.size(); }
    double weight(std::size_t q) const { return nodes[q].weight; }

    /// Same nodes, zero values.
    BoundarySinogram zeros_like() const {
        BoundarySinogram s = *this;
        std::fill(s.values.begin(), s.values.end(), 0.0);
        return s;
    }

    bool same_nodes(const BoundarySinogram& o) const {
        if (o.nodes.size() != nodes.size() || o.n_positions != n_positions) return false;
        for (std::size_t q = 0; q < nodes.size(); ++q)
            if (!(o.nodes[q].x == nodes[q].x) || !(o.nodes[q].theta == nodes[q].theta)) return false;
        return true;
    }

    /// Weighted inner product sum_q w_q a_q b_q.
    double dot(const std::vector<double>& a, const std::vector<double>& b) const {
        if (a.size() != nodes.size() || b.size() != nodes.size()) throw ArgumentError("BoundarySinogram: size mismatch");
        double s = 0.0;
        for (std::size_t q = 0; q < nodes.size(); ++q) s += nodes[q].weight * a[q] * b[q];
        return s;
    }
    double norm() const { return std::sqrt(dot(values, values)); }

    /// Bilinear interpolation of the values at boundary polar angle phi
    /// (periodic) and relative direction angle alpha (clamped to the node
    /// range).
    double interpolate(double phi, double alpha) const {
        const double dphi = kTwoPi / static_cast<double>(n_positions);
        const double fp = wrap_angle(phi) / dphi;
        std::size_t i0 = static_cast<std::size_t>(std::floor(fp)) % n_positions;
        const double tp = fp - std::floor(fp);
        const std::size_t i1 = (i0 + 1) % n_positions;

        std::size_t j0 = 0, j1 = 0;
        double ta = 0.0;
        const double first = nodes[0].relative_angle, last = nodes[n_directions - 1].relative_angle;
        if (alpha <= first) {
            j0 = j1 = 0;
        } else if (alpha >= last) {
            j0 = j1 = n_directions - 1;
        } else {
            std::size_t lo = 0, hi = n_directions - 1;
            while (hi - lo > 1) {
                const std::size_t mid = (lo + hi) / 2;
                (nodes[mid].relative_angle <= alpha ? lo : hi) = mid;
            }
            j0 = lo;
            j1 = hi;
            ta = (alpha - nodes[lo].relative_angle) / (nodes[hi].relative_angle - nodes[lo].relative_angle);
        }
        auto v = [&](std::size_t i, std::size_t j) { return values[i * n_directions + j]; };
        return (1.0 - tp) * ((1.0 - ta) * v(i0, j0) + ta * v(i0, j1)) + tp * ((1.0 - ta) * v(i1, j0) + ta * v(i1, j1));
    }
};

}  // namespace curvtomo
