#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/core/vec.hpp"

namespace curvtomo {

struct Box {
    double x_min = -1.0, x_max = 1.0, y_min = -1.0, y_max = 1.0;
    friend bool operator==(const Box&, const Box&) = default;
};

/// One bilinear interpolation weight.
struct StencilEntry {
    std::uint32_t index;
    double weight;
};

/// Up to four bilinear weights; nodes that fall outside the grid are dropped
/// (the grid function is extended by zero).
struct BilinearStencil {
    std::array<StencilEntry, 4> entries{};
    std::size_t count = 0;
};

/// Uniform cell-centred grid over an axis-aligned box. Node (i, j) sits at the
/// centre of cell i along x and cell j along y; linear index is j * nx + i.
class SpatialGrid {
  public:
    SpatialGrid() = default;
    SpatialGrid(const Box& box, std::size_t nx, std::size_t ny) : box_(box), nx_(nx), ny_(ny) {
        if (nx < 2 || ny < 2) throw ArgumentError("SpatialGrid: need at least 2 cells per axis");
        if (!(box.x_max > box.x_min) || !(box.y_max > box.y_min)) throw ArgumentError("SpatialGrid: empty box");
        dx_ = (box.x_max - box.x_min) / static_cast<double>(nx);
        dy_ = (box.y_max - box.y_min) / static_cast<double>(ny);
    }

    const Box& box() const { return box_; }
    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    std::size_t size() const { return nx_ * ny_; }
    double dx() const { return dx_; }
    double dy() const { return dy_; }
    double cell_area() const { return dx_ * dy_; }

    std::size_t index(std::size_t i, std::size_t j) const { return j * nx_ + i; }
    Vec2 center(std::size_t i, std::size_t j) const {
        return Vec2{{box_.x_min + (static_cast<double>(i) + 0.5) * dx_,
                     box_.y_min + (static_cast<double>(j) + 0.5) * dy_}};
    }
    Vec2 center(std::size_t idx) const { return center(idx % nx_, idx / nx_); }

    BilinearStencil bilinear(const Vec2& x) const {
        BilinearStencil s;
        const double fx = (x[0] - box_.x_min) / dx_ - 0.5;
        const double fy = (x[1] - box_.y_min) / dy_ - 0.5;
        const double ix = std::floor(fx), iy = std::floor(fy);
        const double tx = fx - ix, ty = fy - iy;
        const long i0 = static_cast<long>(ix), j0 = static_cast<long>(iy);
        const double wx[2] = {1.0 - tx, tx};
        const double wy[2] = {1.0 - ty, ty};
        for (int b = 0; b < 2; ++b) {
            const long j = j0 + b;
            if (j < 0 || j >= static_cast<long>(ny_)) continue;
            for (int a = 0; a < 2; ++a) {
                const long i = i0 + a;
                if (i < 0 || i >= static_cast<long>(nx_)) continue;
                const double w = wx[a] * wy[b];
                if (w == 0.0) continue;
                s.entries[s.count++] = {static_cast<std::uint32_t>(index(i, j)), w};
            }
        }
        return s;
    }

    double interpolate(const std::vector<double>& values, const Vec2& x) const {
        const auto s = bilinear(x);
        double v = 0.0;
        for (std::size_t k = 0; k < s.count; ++k) v += s.entries[k].weight * values[s.entries[k].index];
        return v;
    }

    friend bool operator==(const SpatialGrid& a, const SpatialGrid& b) {
        return a.box_ == b.box_ && a.nx_ == b.nx_ && a.ny_ == b.ny_;
    }

  private:
    Box box_{};
    std::size_t nx_ = 0, ny_ = 0;
    double dx_ = 0.0, dy_ = 0.0;
};

/// Values on a SpatialGrid.
struct GridImage {
    SpatialGrid grid;
    std::vector<double> values;

    GridImage() = default;
    explicit GridImage(const SpatialGrid& g) : grid(g), values(g.size(), 0.0) {}
    GridImage(const SpatialGrid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (values.size() != grid.size()) throw ArgumentError("GridImage: payload size does not match grid");
    }
    double& operator()(std::size_t i, std::size_t j) { return values[grid.index(i, j)]; }
    double operator()(std::size_t i, std::size_t j) const { return values[grid.index(i, j)]; }
};

}  // namespace curvtomo
