#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "beliefnav/geometry.hpp"

namespace beliefnav {

/// Sparse voxel map: hash-indexed, grows with observations. Reads are safe
/// under concurrent readers; writes require exclusive access.
template <class T>
class VoxelGrid {
public:
    using Map = std::unordered_map<VoxelCoord, T, VoxelCoordHash>;
    using const_iterator = typename Map::const_iterator;
    using iterator = typename Map::iterator;

    const T* find(const VoxelCoord& u) const {
        auto it = cells_.find(u);
        return it == cells_.end() ? nullptr : &it->second;
    }
    T* find(const VoxelCoord& u) {
        auto it = cells_.find(u);
        return it == cells_.end() ? nullptr : &it->second;
    }
    bool contains(const VoxelCoord& u) const { return cells_.count(u) != 0; }

    /// Inserts a default-constructed payload when absent.
    T& operator[](const VoxelCoord& u) { return cells_[u]; }

    bool erase(const VoxelCoord& u) { return cells_.erase(u) != 0; }

    std::size_t size() const { return cells_.size(); }
    bool empty() const { return cells_.empty(); }
    void clear() { cells_.clear(); }
    void reserve(std::size_t n) { cells_.reserve(n); }

    iterator begin() { return cells_.begin(); }
    iterator end() { return cells_.end(); }
    const_iterator begin() const { return cells_.begin(); }
    const_iterator end() const { return cells_.end(); }

    /// Keys in deterministic (x,y,z) lexicographic order.
    std::vector<VoxelCoord> sorted_keys() const {
        std::vector<VoxelCoord> keys;
        keys.reserve(cells_.size());
        for (const auto& [u, _] : cells_) keys.push_back(u);
        std::sort(keys.begin(), keys.end());
        return keys;
    }

private:
    Map cells_;
};

/// Occupancy flag grid. Any present entry with a nonzero value blocks rays.
using OccupancyGrid = VoxelGrid<std::uint8_t>;

inline bool is_occupied(const OccupancyGrid& grid, const VoxelCoord& u) {
    const std::uint8_t* v = grid.find(u);
    return v != nullptr && *v != 0;
}

/// Voxels pierced by the ray, in order of increasing distance, truncated at
/// the first occupied voxel (inclusive), max_range, or the grid bounds.
std::vector<VoxelCoord> ray_cast(const Vec3& origin, const Vec3& direction, double max_range,
                                 const GridConfig& cfg, const OccupancyGrid& occupancy);

} // namespace beliefnav
